//! KITTI calibration text: `KEY: v0 v1 ...` lines carrying the projection
//! matrices (P2/P3), the rectifying rotation (R0_rect) and the sensor-to-
//! camera rigid transform (Tr_velo_to_cam).

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use nalgebra::{Matrix3, Matrix4, Vector4};

use super::IngestError;

/// Stereo rig baseline used when P3 is absent (the KITTI rig).
pub const DEFAULT_BASELINE_M: f64 = 0.54;

/// Pinhole intrinsics of the rectified left camera plus the two 4x4
/// row-major transforms mapping sensor frame <-> rectified camera frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub focal_u: f64,
    pub focal_v: f64,
    pub center_u: f64,
    pub center_v: f64,
    /// Stereo baseline in meters.
    pub baseline: f64,
    /// Rectifying rotation, promoted to homogeneous 4x4 (row-major).
    pub rect: [[f64; 4]; 4],
    /// Sensor-to-camera rigid transform, promoted to 4x4 (row-major).
    pub velo_to_cam: [[f64; 4]; 4],
}

const IDENTITY4: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
];

impl Calibration {
    /// Calibration with identity extrinsics, handy for synthetic data.
    pub fn identity(focal_u: f64, focal_v: f64, center_u: f64, center_v: f64, baseline: f64) -> Self {
        Self {
            focal_u,
            focal_v,
            center_u,
            center_v,
            baseline,
            rect: IDENTITY4,
            velo_to_cam: IDENTITY4,
        }
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        if !(self.focal_u > 0.0 && self.focal_v > 0.0) {
            return Err(IngestError::DegenerateCalibration(format!(
                "focal lengths must be positive, got ({}, {})",
                self.focal_u, self.focal_v
            )));
        }
        if !(self.baseline > 0.0) {
            return Err(IngestError::DegenerateCalibration(format!(
                "baseline must be positive, got {}",
                self.baseline
            )));
        }
        for (name, m) in [("rect", &self.rect), ("velo_to_cam", &self.velo_to_cam)] {
            let bottom = m[3];
            if (bottom[0] != 0.0) || (bottom[1] != 0.0) || (bottom[2] != 0.0) || (bottom[3] != 1.0)
            {
                return Err(IngestError::DegenerateCalibration(format!(
                    "{name} bottom row is {bottom:?}, expected (0, 0, 0, 1)"
                )));
            }
            let upper = Matrix3::new(
                m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
            );
            if upper.determinant().abs() < 1e-12 {
                return Err(IngestError::DegenerateCalibration(format!(
                    "{name} upper 3x3 is singular"
                )));
            }
        }
        Ok(())
    }

    fn as_matrix(m: &[[f64; 4]; 4]) -> Matrix4<f64> {
        Matrix4::from_fn(|r, c| m[r][c])
    }

    /// Composed sensor-to-rectified-camera transform (rect * velo_to_cam).
    pub(crate) fn sensor_to_camera_na(&self) -> Matrix4<f64> {
        Self::as_matrix(&self.rect) * Self::as_matrix(&self.velo_to_cam)
    }

    /// Inverse of [`Self::sensor_to_camera_na`].
    ///
    /// Returns `None` when the composed transform is singular; a calibration
    /// that passed [`Self::validate`] always succeeds.
    pub(crate) fn camera_to_sensor_na(&self) -> Option<Matrix4<f64>> {
        self.sensor_to_camera_na().try_inverse()
    }

    /// Map a sensor-frame point into the rectified camera frame.
    pub fn sensor_to_camera(&self, p: [f64; 3]) -> [f64; 3] {
        apply(&self.sensor_to_camera_na(), p)
    }

    /// Map a rectified-camera-frame point into the sensor frame.
    ///
    /// Requires an invertible calibration (see [`Self::validate`]).
    pub fn camera_to_sensor(&self, p: [f64; 3]) -> [f64; 3] {
        let inv = self
            .camera_to_sensor_na()
            .expect("calibration transform is singular");
        apply(&inv, p)
    }
}

pub(crate) fn apply(m: &Matrix4<f64>, p: [f64; 3]) -> [f64; 3] {
    let out = m * Vector4::new(p[0], p[1], p[2], 1.0);
    [out[0], out[1], out[2]]
}

fn promote_3x3(v: &[f64]) -> [[f64; 4]; 4] {
    let mut m = IDENTITY4;
    for r in 0..3 {
        for c in 0..3 {
            m[r][c] = v[r * 3 + c];
        }
    }
    m
}

fn promote_3x4(v: &[f64]) -> [[f64; 4]; 4] {
    let mut m = IDENTITY4;
    for r in 0..3 {
        for c in 0..4 {
            m[r][c] = v[r * 4 + c];
        }
    }
    m
}

fn matrix_values(
    entries: &HashMap<&str, (usize, &str)>,
    key: &'static str,
    expected: usize,
) -> Result<Vec<f64>, IngestError> {
    let (line, raw) = entries
        .get(key)
        .ok_or_else(|| IngestError::MissingKey(key.to_string()))?;
    let mut values = Vec::with_capacity(expected);
    for tok in raw.split_whitespace() {
        values.push(tok.parse::<f64>().map_err(|e| IngestError::ParseError {
            line: *line,
            field: key,
            message: format!("`{tok}`: {e}"),
        })?);
    }
    if values.len() != expected {
        return Err(IngestError::MatrixShapeError {
            key: key.to_string(),
            expected,
            got: values.len(),
        });
    }
    Ok(values)
}

pub fn parse_calibration(text: &str) -> Result<Calibration, IngestError> {
    parse_calibration_with_baseline(text, DEFAULT_BASELINE_M)
}

/// Parse a calibration file, deriving the stereo baseline from the P2/P3
/// horizontal offsets when P3 is present and falling back to
/// `fallback_baseline` otherwise.
pub fn parse_calibration_with_baseline(
    text: &str,
    fallback_baseline: f64,
) -> Result<Calibration, IngestError> {
    let mut entries: HashMap<&str, (usize, &str)> = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some((key, rest)) = line.split_once(':') {
            entries.insert(key.trim(), (i + 1, rest));
        }
    }

    let p2 = matrix_values(&entries, "P2", 12)?;
    let r0 = matrix_values(&entries, "R0_rect", 9)?;
    let tr = matrix_values(&entries, "Tr_velo_to_cam", 12)?;

    let focal_u = p2[0];
    let center_u = p2[2];
    let focal_v = p2[5];
    let center_v = p2[6];

    let baseline = if entries.contains_key("P3") {
        let p3 = matrix_values(&entries, "P3", 12)?;
        (p2[3] - p3[3]) / focal_u
    } else {
        fallback_baseline
    };

    let calib = Calibration {
        focal_u,
        focal_v,
        center_u,
        center_v,
        baseline,
        rect: promote_3x3(&r0),
        velo_to_cam: promote_3x4(&tr),
    };
    calib.validate()?;
    Ok(calib)
}

pub fn read_calibration(path: impl AsRef<Path>) -> Result<Calibration, IngestError> {
    parse_calibration(&fs::read_to_string(path)?)
}

pub fn read_calibration_with_baseline(
    path: impl AsRef<Path>,
    fallback_baseline: f64,
) -> Result<Calibration, IngestError> {
    parse_calibration_with_baseline(&fs::read_to_string(path)?, fallback_baseline)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const KITTI_SAMPLE: &str = "\
P0: 7.215377000000e+02 0.000000000000e+00 6.095593000000e+02 0.000000000000e+00 0.000000000000e+00 7.215377000000e+02 1.728540000000e+02 0.000000000000e+00 0.000000000000e+00 0.000000000000e+00 1.000000000000e+00 0.000000000000e+00
P2: 7.215377000000e+02 0.000000000000e+00 6.095593000000e+02 4.485728000000e+01 0.000000000000e+00 7.215377000000e+02 1.728540000000e+02 2.163791000000e-01 0.000000000000e+00 0.000000000000e+00 1.000000000000e+00 2.745884000000e-03
P3: 7.215377000000e+02 0.000000000000e+00 6.095593000000e+02 -3.395242000000e+02 0.000000000000e+00 7.215377000000e+02 1.728540000000e+02 2.199936000000e+00 0.000000000000e+00 0.000000000000e+00 1.000000000000e+00 2.729905000000e-03
R0_rect: 9.999239000000e-01 9.837760000000e-03 -7.445048000000e-03 -9.869795000000e-03 9.999421000000e-01 -4.278459000000e-03 7.402527000000e-03 4.351614000000e-03 9.999631000000e-01
Tr_velo_to_cam: 7.533745000000e-03 -9.999714000000e-01 -6.166020000000e-04 -4.069766000000e-03 1.480249000000e-02 7.280733000000e-04 -9.998902000000e-01 -7.631618000000e-02 9.998621000000e-01 7.523790000000e-03 1.480755000000e-02 -2.717806000000e-01
";

    #[test]
    fn parses_kitti_intrinsics() {
        let calib = parse_calibration(KITTI_SAMPLE).unwrap();
        assert_eq!(calib.focal_u, 721.5377);
        assert_eq!(calib.focal_v, 721.5377);
        assert_eq!(calib.center_u, 609.5593);
        assert_eq!(calib.center_v, 172.854);
        // baseline from the P2/P3 horizontal offsets, ~0.54 m on the KITTI rig
        assert_abs_diff_eq!(
            calib.baseline,
            (44.85728 - -339.5242) / 721.5377,
            epsilon = 1e-12
        );
        assert!(calib.baseline > 0.53 && calib.baseline < 0.536);
    }

    #[test]
    fn baseline_falls_back_without_p3() {
        let text = KITTI_SAMPLE
            .lines()
            .filter(|l| !l.starts_with("P3:"))
            .collect::<Vec<_>>()
            .join("\n");
        let calib = parse_calibration(&text).unwrap();
        assert_eq!(calib.baseline, DEFAULT_BASELINE_M);
        let calib = parse_calibration_with_baseline(&text, 0.12).unwrap();
        assert_eq!(calib.baseline, 0.12);
    }

    #[test]
    fn identity_transforms_compose_to_identity() {
        let text = "\
P2: 100.0 0.0 50.0 0.0 0.0 100.0 50.0 0.0 0.0 0.0 1.0 0.0
R0_rect: 1 0 0 0 1 0 0 0 1
Tr_velo_to_cam: 1 0 0 0 0 1 0 0 0 0 1 0
";
        let calib = parse_calibration(text).unwrap();
        let p = [1.5, -2.0, 3.25];
        assert_eq!(calib.sensor_to_camera(p), p);
        assert_eq!(calib.camera_to_sensor(p), p);
    }

    #[test]
    fn missing_transform_is_reported() {
        let text = "P2: 1 0 0 0 0 1 0 0 0 0 1 0\nR0_rect: 1 0 0 0 1 0 0 0 1\n";
        match parse_calibration(text) {
            Err(IngestError::MissingKey(k)) => assert_eq!(k, "Tr_velo_to_cam"),
            other => panic!("expected MissingKey, got {other:?}"),
        }
    }

    #[test]
    fn wrong_value_count_is_a_shape_error() {
        let text = "P2: 1 2 3\nR0_rect: 1 0 0 0 1 0 0 0 1\nTr_velo_to_cam: 1 0 0 0 0 1 0 0 0 0 1 0\n";
        match parse_calibration(text) {
            Err(IngestError::MatrixShapeError { key, expected, got }) => {
                assert_eq!(key, "P2");
                assert_eq!(expected, 12);
                assert_eq!(got, 3);
            }
            other => panic!("expected MatrixShapeError, got {other:?}"),
        }
    }

    #[test]
    fn real_transforms_round_trip() {
        let calib = parse_calibration(KITTI_SAMPLE).unwrap();
        for p in [[10.0, -3.0, 0.5], [0.0, 0.0, 0.0], [69.0, 39.0, -2.5]] {
            let there = calib.sensor_to_camera(p);
            let back = calib.camera_to_sensor(there);
            for k in 0..3 {
                assert_abs_diff_eq!(back[k], p[k], epsilon = 1e-9);
            }
        }
    }
}
