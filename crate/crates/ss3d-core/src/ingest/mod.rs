//! Readers and writers for the external data formats: binary point clouds
//! (KITTI velodyne layout), camera calibration text, object label files and
//! single-channel PNG rasters.
//!
//! All readers are pure functions of their input bytes and safe to call from
//! any number of threads; the returned values are plain immutable data.

mod calib;
mod labels;
mod point_cloud;
mod raster;

pub(crate) use calib::apply as calib_apply;
pub use calib::{parse_calibration, parse_calibration_with_baseline, read_calibration,
                read_calibration_with_baseline, Calibration, DEFAULT_BASELINE_M};
pub use labels::{format_label_line, label_from_detection, parse_labels, read_labels,
                 read_labels_with_calib, write_labels, LabeledObject, DONT_CARE};
pub use point_cloud::{parse_point_cloud, read_point_cloud, write_point_cloud, Point, PointCloud};
pub use raster::{read_raster, Raster};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("i/o failure: {0}")]
    IoFailure(#[from] std::io::Error),
    #[error("point cloud byte length {0} is not a multiple of 16")]
    MalformedRecordLength(usize),
    #[error("calibration key `{0}` missing")]
    MissingKey(String),
    #[error("calibration key `{key}` has {got} values, expected {expected}")]
    MatrixShapeError {
        key: String,
        expected: usize,
        got: usize,
    },
    #[error("line {line}: expected {expected} fields, found {got}")]
    FieldCountError {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("line {line}, field `{field}`: {message}")]
    ParseError {
        line: usize,
        field: &'static str,
        message: String,
    },
    #[error("unsupported raster format: {0}")]
    UnsupportedFormat(String),
    #[error("calibration is degenerate: {0}")]
    DegenerateCalibration(String),
}
