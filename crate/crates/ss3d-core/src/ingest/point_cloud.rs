//! KITTI velodyne binary point clouds: headerless little-endian f32
//! quadruples (x, y, z, reflectance).

use std::fs;
use std::path::Path;

use super::IngestError;

const RECORD_BYTES: usize = 16;

/// One return in the sensor frame: x forward, y left, z up, all in meters.
/// `v` is a unitless scalar in [0, 1] — LiDAR reflectivity, a constant 1.0,
/// or a segmentation value depending on the cloud's origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub v: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point>,
    /// Records dropped on read because a field was NaN or infinite.
    pub dropped_non_finite: usize,
}

impl PointCloud {
    pub fn new(points: Vec<Point>) -> Self {
        Self {
            points,
            dropped_non_finite: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Decode a velodyne buffer. Non-finite records are dropped and counted
/// rather than failing the whole file; `v` is clamped into [0, 1].
pub fn parse_point_cloud(bytes: &[u8]) -> Result<PointCloud, IngestError> {
    if bytes.len() % RECORD_BYTES != 0 {
        return Err(IngestError::MalformedRecordLength(bytes.len()));
    }
    let mut points = Vec::with_capacity(bytes.len() / RECORD_BYTES);
    let mut dropped = 0usize;
    for rec in bytes.chunks_exact(RECORD_BYTES) {
        let x = f32::from_le_bytes(rec[0..4].try_into().unwrap());
        let y = f32::from_le_bytes(rec[4..8].try_into().unwrap());
        let z = f32::from_le_bytes(rec[8..12].try_into().unwrap());
        let v = f32::from_le_bytes(rec[12..16].try_into().unwrap());
        if !(x.is_finite() && y.is_finite() && z.is_finite() && v.is_finite()) {
            dropped += 1;
            continue;
        }
        points.push(Point {
            x: x as f64,
            y: y as f64,
            z: z as f64,
            v: (v as f64).clamp(0.0, 1.0),
        });
    }
    Ok(PointCloud {
        points,
        dropped_non_finite: dropped,
    })
}

pub fn read_point_cloud(path: impl AsRef<Path>) -> Result<PointCloud, IngestError> {
    parse_point_cloud(&fs::read(path)?)
}

/// Serialize back to the velodyne layout. Coordinates are narrowed to f32,
/// so clouds read from disk round-trip bit-exactly.
pub fn write_point_cloud(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<(), IngestError> {
    let mut buf = Vec::with_capacity(cloud.points.len() * RECORD_BYTES);
    for p in &cloud.points {
        buf.extend_from_slice(&(p.x as f32).to_le_bytes());
        buf.extend_from_slice(&(p.y as f32).to_le_bytes());
        buf.extend_from_slice(&(p.z as f32).to_le_bytes());
        buf.extend_from_slice(&(p.v as f32).to_le_bytes());
    }
    fs::write(path, buf)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn encode(records: &[[f32; 4]]) -> Vec<u8> {
        let mut buf = Vec::new();
        for r in records {
            for f in r {
                buf.extend_from_slice(&f.to_le_bytes());
            }
        }
        buf
    }

    #[test]
    fn decodes_two_records() {
        let bytes = encode(&[[1.0, 2.0, 0.5, 0.3], [5.0, -1.0, 0.0, 0.8]]);
        let cloud = parse_point_cloud(&bytes).unwrap();
        assert_eq!(cloud.len(), 2);
        assert_eq!(cloud.dropped_non_finite, 0);
        assert_eq!(
            cloud.points[0],
            Point {
                x: 1.0,
                y: 2.0,
                z: 0.5,
                v: 0.30000001192092896 // 0.3f32 promoted
            }
        );
        assert_eq!(cloud.points[1].x, 5.0);
        assert_eq!(cloud.points[1].y, -1.0);
    }

    #[test]
    fn empty_file_is_empty_cloud() {
        let cloud = parse_point_cloud(&[]).unwrap();
        assert!(cloud.is_empty());
        assert_eq!(cloud.dropped_non_finite, 0);
    }

    #[test]
    fn nan_record_is_dropped_and_counted() {
        let bytes = encode(&[[f32::NAN, 0.0, 0.0, 0.0]]);
        let cloud = parse_point_cloud(&bytes).unwrap();
        assert_eq!(cloud.len(), 0);
        assert_eq!(cloud.dropped_non_finite, 1);
    }

    #[test]
    fn truncated_record_is_an_error() {
        let err = parse_point_cloud(&[0u8; 17]).unwrap_err();
        assert!(matches!(err, IngestError::MalformedRecordLength(17)));
    }

    #[test]
    fn reflectivity_is_clamped() {
        let bytes = encode(&[[0.0, 0.0, 0.0, 1.5], [0.0, 0.0, 0.0, -0.25]]);
        let cloud = parse_point_cloud(&bytes).unwrap();
        assert_eq!(cloud.points[0].v, 1.0);
        assert_eq!(cloud.points[1].v, 0.0);
    }

    #[test]
    fn file_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cloud.bin");
        let bytes = encode(&[[1.25, -2.5, 0.125, 0.5], [69.0, 3.25, -1.75, 1.0]]);
        std::fs::write(&path, &bytes).unwrap();
        let cloud = read_point_cloud(&path).unwrap();
        let out = dir.path().join("out.bin");
        write_point_cloud(&cloud, &out).unwrap();
        assert_eq!(std::fs::read(&out).unwrap(), bytes);
    }
}
