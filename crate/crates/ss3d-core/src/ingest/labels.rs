//! KITTI object label files: one object per line,
//! `type trunc occ alpha x1 y1 x2 y2 h w l x y z ry [score]`.
//!
//! The 3D location in the file is the bottom-face center in the rectified
//! camera frame (x right, y down, z forward). [`read_labels`] maps it into
//! the sensor frame through the fixed KITTI axis permutation
//! (x_s, y_s, z_s) = (z_c, -x_c, -y_c); [`read_labels_with_calib`] applies
//! the full calibrated transform instead.

use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::Path;

use crate::box_geom::{normalize_angle, Box3D, Detection, Rect2};

use super::{Calibration, IngestError};

/// Class name marking regions excluded from evaluation.
pub const DONT_CARE: &str = "DontCare";

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledObject {
    /// Preserved verbatim, including `DontCare`.
    pub class_name: String,
    pub truncation: f64,
    pub occlusion: i32,
    /// Observation angle, kept for re-serialization.
    pub alpha: f64,
    /// Image box: (left, top, right, bottom) in pixels.
    pub box2d: Rect2,
    /// Sensor-frame box. For `DontCare` lines the dimension fields may carry
    /// the conventional -1 sentinels.
    pub box3d: Box3D,
    pub score: Option<f64>,
}

/// Camera frame (x right, y down, z forward) to sensor frame
/// (x forward, y left, z up), fixed axis permutation.
fn camera_to_sensor_fixed(p: [f64; 3]) -> [f64; 3] {
    [p[2], -p[0], -p[1]]
}

fn sensor_to_camera_fixed(p: [f64; 3]) -> [f64; 3] {
    [-p[1], -p[2], p[0]]
}

fn parse_labels_impl(
    text: &str,
    with_scores: bool,
    calib: Option<&Calibration>,
) -> Result<Vec<LabeledObject>, IngestError> {
    let expected = if with_scores { 16 } else { 15 };
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.len() != expected {
            return Err(IngestError::FieldCountError {
                line,
                expected,
                got: fields.len(),
            });
        }
        let num = |idx: usize, field: &'static str| -> Result<f64, IngestError> {
            fields[idx]
                .parse::<f64>()
                .map_err(|e| IngestError::ParseError {
                    line,
                    field,
                    message: format!("`{}`: {e}", fields[idx]),
                })
        };

        let class_name = fields[0].to_string();
        let truncation = num(1, "truncation")?;
        let occlusion = num(2, "occlusion")? as i32;
        let alpha = num(3, "alpha")?;
        let box2d = Rect2::new(
            num(4, "bbox_left")?,
            num(5, "bbox_top")?,
            num(6, "bbox_right")?,
            num(7, "bbox_bottom")?,
        );
        let h = num(8, "height")?;
        let w = num(9, "width")?;
        let l = num(10, "length")?;
        let location = [num(11, "x")?, num(12, "y")?, num(13, "z")?];
        let ry = num(14, "rotation_y")?;
        let score = if with_scores {
            Some(num(15, "score")?)
        } else {
            None
        };

        // DontCare lines conventionally carry -1 sentinels everywhere, so
        // semantic checks only apply to real objects.
        if class_name != DONT_CARE {
            if !(box2d.x_max > box2d.x_min && box2d.y_max > box2d.y_min) {
                return Err(IngestError::ParseError {
                    line,
                    field: "box2d",
                    message: "right/bottom must exceed left/top".to_string(),
                });
            }
            if !(h > 0.0 && w > 0.0 && l > 0.0) {
                return Err(IngestError::ParseError {
                    line,
                    field: "dimensions",
                    message: format!("h/w/l must be positive, got ({h}, {w}, {l})"),
                });
            }
            if !(0.0..=1.0).contains(&truncation) {
                return Err(IngestError::ParseError {
                    line,
                    field: "truncation",
                    message: format!("must lie in [0, 1], got {truncation}"),
                });
            }
            if !(0..=3).contains(&occlusion) {
                return Err(IngestError::ParseError {
                    line,
                    field: "occlusion",
                    message: format!("must lie in 0..=3, got {occlusion}"),
                });
            }
        }
        if let Some(s) = score {
            if !s.is_finite() || !(0.0..=1.0).contains(&s) {
                return Err(IngestError::ParseError {
                    line,
                    field: "score",
                    message: format!("must be finite in [0, 1], got {s}"),
                });
            }
        }

        let (bottom_s, yaw_s) = match calib {
            None => (camera_to_sensor_fixed(location), -ry - FRAC_PI_2),
            Some(c) => {
                let m = c.camera_to_sensor_na().ok_or_else(|| {
                    IngestError::DegenerateCalibration("transform is singular".to_string())
                })?;
                let bottom = super::calib::apply(&m, location);
                // heading direction in the camera frame, rotated only
                let d = [ry.cos(), 0.0, -ry.sin()];
                let dx = m[(0, 0)] * d[0] + m[(0, 1)] * d[1] + m[(0, 2)] * d[2];
                let dy = m[(1, 0)] * d[0] + m[(1, 1)] * d[1] + m[(1, 2)] * d[2];
                (bottom, dy.atan2(dx))
            }
        };
        let box3d = Box3D::new(
            bottom_s[0],
            bottom_s[1],
            bottom_s[2] + 0.5 * h,
            l,
            w,
            h,
            yaw_s,
        );

        out.push(LabeledObject {
            class_name,
            truncation,
            occlusion,
            alpha,
            box2d,
            box3d,
            score,
        });
    }
    Ok(out)
}

/// Parse label text, mapping boxes into the sensor frame via the fixed
/// axis permutation.
pub fn parse_labels(text: &str, with_scores: bool) -> Result<Vec<LabeledObject>, IngestError> {
    parse_labels_impl(text, with_scores, None)
}

pub fn read_labels(
    path: impl AsRef<Path>,
    with_scores: bool,
) -> Result<Vec<LabeledObject>, IngestError> {
    parse_labels(&fs::read_to_string(path)?, with_scores)
}

/// Like [`read_labels`] but maps locations and headings through the full
/// calibrated camera-to-sensor transform.
pub fn read_labels_with_calib(
    path: impl AsRef<Path>,
    with_scores: bool,
    calib: &Calibration,
) -> Result<Vec<LabeledObject>, IngestError> {
    parse_labels_impl(&fs::read_to_string(path)?, with_scores, Some(calib))
}

/// Serialize one object back to the KITTI line grammar (camera-frame fields
/// derived through the fixed axis permutation). Emits the trailing score
/// field when present.
pub fn format_label_line(obj: &LabeledObject) -> String {
    let h = obj.box3d.height;
    let bottom_s = [obj.box3d.cx, obj.box3d.cy, obj.box3d.cz - 0.5 * h];
    let cam = sensor_to_camera_fixed(bottom_s);
    let ry = normalize_angle(-obj.box3d.yaw - FRAC_PI_2);
    let mut line = format!(
        "{} {:.2} {} {:.6} {:.6} {:.6} {:.6} {:.6} {:.6} {:.6} {:.6} {:.6} {:.6} {:.6} {:.6}",
        obj.class_name,
        obj.truncation,
        obj.occlusion,
        obj.alpha,
        obj.box2d.x_min,
        obj.box2d.y_min,
        obj.box2d.x_max,
        obj.box2d.y_max,
        h,
        obj.box3d.width,
        obj.box3d.length,
        cam[0],
        cam[1],
        cam[2],
        ry
    );
    if let Some(s) = obj.score {
        line.push_str(&format!(" {s:.6}"));
    }
    line
}

pub fn write_labels(objs: &[LabeledObject], path: impl AsRef<Path>) -> Result<(), IngestError> {
    let mut text = String::new();
    for obj in objs {
        text.push_str(&format_label_line(obj));
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

/// Wrap a sensor-frame detection as a label record, deriving alpha from the
/// box heading and bearing. The caller supplies the image box.
pub fn label_from_detection(det: &Detection, box2d: Rect2) -> LabeledObject {
    let bottom_s = [
        det.box3d.cx,
        det.box3d.cy,
        det.box3d.cz - 0.5 * det.box3d.height,
    ];
    let cam = sensor_to_camera_fixed(bottom_s);
    let ry = normalize_angle(-det.box3d.yaw - FRAC_PI_2);
    let alpha = normalize_angle(ry - cam[0].atan2(cam[2]));
    LabeledObject {
        class_name: det.class_name.clone(),
        truncation: 0.0,
        occlusion: 0,
        alpha,
        box2d,
        box3d: det.box3d,
        score: Some(det.score),
    }
}
