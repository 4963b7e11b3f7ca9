//! Non-neural building blocks of a single-shot 3D object detection pipeline
//! over bird's-eye-view pillar grids.
//!
//! The crate covers everything around the network itself:
//!
//! - [`ingest`]: readers and writers for the external data formats — binary
//!   point clouds, camera calibration text, object label files and
//!   single-channel rasters (disparity / segmentation).
//! - [`pseudo_lidar`]: stereo disparity to point cloud conversion and the
//!   inverse pinhole projection.
//! - [`pillar`]: statistical pillar feature encoding (the four SS3D variants),
//!   an independent reference encoder, and the encoder cost model.
//! - [`box_geom`]: oriented boxes, rotated BEV IoU, volumetric IoU and NMS.
//! - [`anchor`]: SSD prior-box generation, target assignment, and the box
//!   regression codec with its binary target format.
//! - [`eval`]: the KITTI-style 3D detection evaluation protocol (difficulty
//!   stratification, greedy matching, interpolated average precision).
//!
//! Tensor and target exports use small self-describing binary formats (PFT1,
//! TGT1) so external trainers can consume them without linking this crate.

pub mod anchor;
pub mod box_geom;
pub mod eval;
pub mod ingest;
pub mod pillar;
pub mod pseudo_lidar;

pub use box_geom::{Box3D, Detection, Rect2};
pub use ingest::{Calibration, LabeledObject, Point, PointCloud, Raster};
pub use pillar::{FeatureMap, PillarGridConfig, PillarStats, Variant};
