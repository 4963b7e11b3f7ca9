//! Stereo disparity to point cloud conversion and the inverse pinhole
//! projection. Depth comes from `focal_u * baseline / disparity`; the
//! back-projected camera-frame point is mapped into the sensor frame through
//! the inverse rectification / sensor transforms.

use thiserror::Error;

use crate::ingest::{Calibration, Point, PointCloud, Raster};

#[derive(Debug, Error)]
pub enum PseudoLidarError {
    #[error("segmentation raster is {seg_w}x{seg_h} but disparity is {disp_w}x{disp_h}")]
    DimensionMismatch {
        disp_w: u32,
        disp_h: u32,
        seg_w: u32,
        seg_h: u32,
    },
    #[error("calibration transform is singular")]
    InvalidCalibration,
}

/// Range limits applied to projected clouds.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionConfig {
    /// Camera-frame depth cap in meters.
    pub max_depth: f64,
    /// Pixels with disparity at or below this are skipped; 0 marks an
    /// invalid pixel, and small positive disparities map to implausibly
    /// distant points.
    pub min_disparity: f64,
    /// Sensor-frame height window (z_min, z_max) in meters.
    pub height_window: (f64, f64),
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        Self {
            max_depth: 80.0,
            min_disparity: 1.0,
            height_window: (-3.0, 1.0),
        }
    }
}

/// Convert a disparity raster into a sensor-frame point cloud.
///
/// Pixels are visited in row-major order and the output preserves that
/// order. The `v` field is the segmentation value at the pixel when `seg`
/// is given (nearest-neighbor, clamped into [0, 1]) and 1.0 otherwise.
pub fn disparity_to_cloud(
    disp: &Raster,
    calib: &Calibration,
    cfg: &ProjectionConfig,
    seg: Option<&Raster>,
) -> Result<PointCloud, PseudoLidarError> {
    if let Some(seg) = seg {
        if !disp.same_shape(seg) {
            return Err(PseudoLidarError::DimensionMismatch {
                disp_w: disp.width,
                disp_h: disp.height,
                seg_w: seg.width,
                seg_h: seg.height,
            });
        }
    }
    let cam_to_sensor = calib
        .camera_to_sensor_na()
        .ok_or(PseudoLidarError::InvalidCalibration)?;
    let (z_min, z_max) = cfg.height_window;
    let fu_b = calib.focal_u * calib.baseline;

    let mut points = Vec::new();
    for v in 0..disp.height {
        for u in 0..disp.width {
            let d = disp.get(u, v) as f64;
            if !(d > cfg.min_disparity) {
                continue;
            }
            let zc = fu_b / d;
            if zc > cfg.max_depth {
                continue;
            }
            let xc = (u as f64 - calib.center_u) * zc / calib.focal_u;
            let yc = (v as f64 - calib.center_v) * zc / calib.focal_v;
            let p = crate::ingest::calib_apply(&cam_to_sensor, [xc, yc, zc]);
            if p[2] < z_min || p[2] > z_max {
                continue;
            }
            let value = match seg {
                Some(s) => (s.get(u, v) as f64).clamp(0.0, 1.0),
                None => 1.0,
            };
            points.push(Point {
                x: p[0],
                y: p[1],
                z: p[2],
                v: value,
            });
        }
    }
    Ok(PointCloud::new(points))
}

/// Pinhole-project a sensor-frame cloud back onto the image plane.
///
/// Returns `(u, v, depth)` per point with positive camera-frame depth;
/// points behind the camera are omitted.
pub fn project_cloud_to_image(cloud: &PointCloud, calib: &Calibration) -> Vec<(f64, f64, f64)> {
    let sensor_to_cam = calib.sensor_to_camera_na();
    let mut out = Vec::with_capacity(cloud.points.len());
    for p in &cloud.points {
        let c = crate::ingest::calib_apply(&sensor_to_cam, [p.x, p.y, p.z]);
        let (xc, yc, zc) = (c[0], c[1], c[2]);
        if zc <= 0.0 {
            continue;
        }
        let u = calib.focal_u * xc / zc + calib.center_u;
        let v = calib.focal_v * yc / zc + calib.center_v;
        out.push((u, v, zc));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn synthetic_calib() -> Calibration {
        Calibration::identity(721.5377, 721.5377, 50.0, 50.0, 0.54)
    }

    fn wide_cfg() -> ProjectionConfig {
        ProjectionConfig {
            max_depth: 1000.0,
            min_disparity: 1.0,
            height_window: (-1000.0, 1000.0),
        }
    }

    #[test]
    fn principal_point_lands_on_optical_axis() {
        let calib = synthetic_calib();
        // choose d so that depth is exactly 20 m
        let d = (calib.focal_u * calib.baseline / 20.0) as f32;
        let mut values = vec![0.0f32; 101 * 101];
        values[50 * 101 + 50] = d;
        let disp = Raster::new(101, 101, values);
        let cloud = disparity_to_cloud(&disp, &calib, &wide_cfg(), None).unwrap();
        assert_eq!(cloud.len(), 1);
        let p = cloud.points[0];
        assert_abs_diff_eq!(p.x, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(p.y, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(p.z, 20.0, epsilon = 1e-6);
        assert_eq!(p.v, 1.0);
    }

    #[test]
    fn kitti_depth_for_ten_pixel_disparity() {
        // f = 721.5377, b = 0.54, d = 10 -> depth 38.963 m
        let calib = synthetic_calib();
        let disp = Raster::new(1, 1, vec![10.0]);
        let cloud = disparity_to_cloud(&disp, &calib, &wide_cfg(), None).unwrap();
        assert_eq!(cloud.len(), 1);
        assert_abs_diff_eq!(cloud.points[0].z, 38.963, epsilon = 1e-3);
    }

    #[test]
    fn all_zero_disparity_is_empty() {
        let calib = synthetic_calib();
        let disp = Raster::new(8, 8, vec![0.0; 64]);
        let cloud = disparity_to_cloud(&disp, &calib, &ProjectionConfig::default(), None).unwrap();
        assert!(cloud.is_empty());
    }

    #[test]
    fn mismatched_segmentation_dimensions_error() {
        let calib = synthetic_calib();
        let disp = Raster::new(4, 4, vec![5.0; 16]);
        let seg = Raster::new(4, 3, vec![0.5; 12]);
        assert!(matches!(
            disparity_to_cloud(&disp, &calib, &ProjectionConfig::default(), Some(&seg)),
            Err(PseudoLidarError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn segmentation_values_are_attached() {
        let calib = synthetic_calib();
        let disp = Raster::new(2, 1, vec![8.0, 9.0]);
        let seg = Raster::new(2, 1, vec![0.25, 0.75]);
        let cloud = disparity_to_cloud(&disp, &calib, &wide_cfg(), Some(&seg)).unwrap();
        let vs: Vec<f64> = cloud.points.iter().map(|p| p.v).collect();
        assert_eq!(vs, vec![0.25, 0.75]);
    }

    #[test]
    fn depth_decreases_with_disparity() {
        let calib = synthetic_calib();
        let mut prev = f64::INFINITY;
        for d in [2.0f32, 4.0, 8.0, 16.0, 32.0] {
            let disp = Raster::new(1, 1, vec![d]);
            let cloud = disparity_to_cloud(&disp, &calib, &wide_cfg(), None).unwrap();
            assert!(cloud.points[0].z < prev);
            prev = cloud.points[0].z;
        }
    }

    #[test]
    fn point_on_axis_projects_to_principal_point() {
        let calib = synthetic_calib();
        let cloud = PointCloud::new(vec![Point {
            x: 0.0,
            y: 0.0,
            z: 17.0,
            v: 1.0,
        }]);
        let px = project_cloud_to_image(&cloud, &calib);
        assert_eq!(px.len(), 1);
        assert_abs_diff_eq!(px[0].0, 50.0, epsilon = 1e-9);
        assert_abs_diff_eq!(px[0].1, 50.0, epsilon = 1e-9);
        assert_abs_diff_eq!(px[0].2, 17.0, epsilon = 1e-12);
    }

    #[test]
    fn points_behind_camera_are_culled() {
        let calib = synthetic_calib();
        let cloud = PointCloud::new(vec![
            Point {
                x: 0.0,
                y: 0.0,
                z: -5.0,
                v: 1.0,
            },
            Point {
                x: 1.0,
                y: 1.0,
                z: 5.0,
                v: 1.0,
            },
        ]);
        // identity transforms: camera depth is the z coordinate here
        let px = project_cloud_to_image(&cloud, &calib);
        assert_eq!(px.len(), 1);
        assert_abs_diff_eq!(px[0].2, 5.0, epsilon = 1e-12);
    }

    #[test]
    fn round_trip_recovers_pixels_and_depth() {
        let calib = synthetic_calib();
        let (w, h) = (40u32, 30u32);
        let mut values = vec![0.0f32; (w * h) as usize];
        for v in 0..h {
            for u in 0..w {
                values[(v * w + u) as usize] = 5.0 + 0.1 * (u + v) as f32;
            }
        }
        let disp = Raster::new(w, h, values);
        let cloud = disparity_to_cloud(&disp, &calib, &wide_cfg(), None).unwrap();
        assert_eq!(cloud.len(), (w * h) as usize);
        let px = project_cloud_to_image(&cloud, &calib);
        let mut i = 0;
        for v in 0..h {
            for u in 0..w {
                let (pu, pv, depth) = px[i];
                assert_abs_diff_eq!(pu, u as f64, epsilon = 1e-4);
                assert_abs_diff_eq!(pv, v as f64, epsilon = 1e-4);
                let d = disp.get(u, v) as f64;
                assert_abs_diff_eq!(depth, calib.focal_u * calib.baseline / d, epsilon = 1e-6);
                i += 1;
            }
        }
    }

    #[test]
    fn output_size_bounded_by_valid_pixels() {
        let calib = synthetic_calib();
        let disp = Raster::new(4, 4, vec![0.0, 3.0, 0.5, 9.0].repeat(4));
        let valid = disp
            .values
            .iter()
            .filter(|&&d| d as f64 > ProjectionConfig::default().min_disparity)
            .count();
        let cloud = disparity_to_cloud(&disp, &calib, &ProjectionConfig::default(), None).unwrap();
        assert!(cloud.len() <= valid);
    }
}
