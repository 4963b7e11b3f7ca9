//! Statistical pillar feature encoding over a fixed bird's-eye-view grid.
//!
//! A point cloud is binned into vertical column cells ("pillars"); each
//! occupied pillar is summarized into a fixed feature vector (occupancy,
//! count, height and intensity statistics, optionally pillar polar
//! coordinates and per-slice height maxima). The result is a dense
//! `height x width x channels` tensor suitable as network input.
//!
//! Rows index the lateral (y) axis, columns the forward (x) axis: with the
//! default ranges this yields the 496 x 432 grid (79.36 m wide, 69.12 m
//! deep at 0.16 m cells).

mod cost;
mod oracle;
mod pft;

pub use cost::{fc_encoder_macs, statistical_encoder_flops, STAT_ENCODER_OPS_PER_PILLAR,
               STAT_ENCODER_OPS_PER_POINT};
pub use oracle::{encode_oracle, oracle_pillar_stats};
pub use pft::{read_feature_map, write_feature_map, write_feature_map_to, PftError};

use thiserror::Error;

use crate::ingest::PointCloud;

/// The four feature layouts of the statistical encoder.
///
/// `*-6` layouts emit `[occupied, count, mean_height, mean_v, max_height,
/// v_of_highest]`; `*-10` layouts drop the occupancy bit and add pillar
/// center distance/angle plus three per-slice height maxima. The `Seg`
/// variants use the same formulas with the point `v` field carrying a
/// segmentation value instead of reflectivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Ss3d6,
    Ss3d10,
    Ss3dSeg6,
    Ss3dSeg10,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Ss3d6,
        Variant::Ss3d10,
        Variant::Ss3dSeg6,
        Variant::Ss3dSeg10,
    ];

    pub fn channels(self) -> usize {
        match self {
            Variant::Ss3d6 | Variant::Ss3dSeg6 => 6,
            Variant::Ss3d10 | Variant::Ss3dSeg10 => 10,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Ss3d6 => "SS3D-6",
            Variant::Ss3d10 => "SS3D-10",
            Variant::Ss3dSeg6 => "SS3D-Seg-6",
            Variant::Ss3dSeg10 => "SS3D-Seg-10",
        }
    }

    /// Whether the `v` field is expected to carry segmentation values.
    pub fn uses_segmentation(self) -> bool {
        matches!(self, Variant::Ss3dSeg6 | Variant::Ss3dSeg10)
    }
}

impl std::str::FromStr for Variant {
    type Err = GridConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| GridConfigError::UnknownVariant(s.to_string()))
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
pub enum GridConfigError {
    #[error("unknown variant `{0}` (expected SS3D-6, SS3D-10, SS3D-Seg-6 or SS3D-Seg-10)")]
    UnknownVariant(String),
    #[error("{axis} range ({min}, {max}) is empty or reversed")]
    EmptyRange { axis: char, min: f64, max: f64 },
    #[error("cell size must be positive, got {0}")]
    BadCell(f64),
    #[error("{axis} extent / cell = {ratio} is not an integer")]
    NonIntegerCellCount { axis: char, ratio: f64 },
}

/// Grid geometry plus the feature variant to emit.
#[derive(Debug, Clone, PartialEq)]
pub struct PillarGridConfig {
    /// Forward extent in meters (maps to columns).
    pub x_range: (f64, f64),
    /// Lateral extent in meters (maps to rows).
    pub y_range: (f64, f64),
    /// Pillar height extent in meters; both ends inclusive when filtering.
    pub z_range: (f64, f64),
    /// Square cell side in meters.
    pub cell: f64,
    pub variant: Variant,
}

impl Default for PillarGridConfig {
    fn default() -> Self {
        Self {
            x_range: (0.0, 69.12),
            y_range: (-39.68, 39.68),
            z_range: (-3.0, 1.0),
            cell: 0.16,
            variant: Variant::Ss3d6,
        }
    }
}

impl PillarGridConfig {
    pub fn with_variant(variant: Variant) -> Self {
        Self {
            variant,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), GridConfigError> {
        if !(self.cell > 0.0) {
            return Err(GridConfigError::BadCell(self.cell));
        }
        for (axis, (min, max)) in [('x', self.x_range), ('y', self.y_range), ('z', self.z_range)]
        {
            if !(max > min) {
                return Err(GridConfigError::EmptyRange { axis, min, max });
            }
        }
        for (axis, (min, max)) in [('x', self.x_range), ('y', self.y_range)] {
            let ratio = (max - min) / self.cell;
            if (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 1.0 {
                return Err(GridConfigError::NonIntegerCellCount { axis, ratio });
            }
        }
        Ok(())
    }

    /// Number of columns (forward / x axis). 432 with defaults.
    pub fn width(&self) -> usize {
        ((self.x_range.1 - self.x_range.0) / self.cell).round() as usize
    }

    /// Number of rows (lateral / y axis). 496 with defaults.
    pub fn height(&self) -> usize {
        ((self.y_range.1 - self.y_range.0) / self.cell).round() as usize
    }

    pub fn pillar_count(&self) -> usize {
        self.width() * self.height()
    }

    /// Pillar height in meters (z extent). 4.0 with defaults.
    pub fn pillar_height(&self) -> f64 {
        self.z_range.1 - self.z_range.0
    }

    /// Center of pillar (row, col) in sensor-frame meters.
    pub fn pillar_center(&self, row: usize, col: usize) -> (f64, f64) {
        (
            self.x_range.0 + (col as f64 + 0.5) * self.cell,
            self.y_range.0 + (row as f64 + 0.5) * self.cell,
        )
    }

    /// Boundaries splitting the z range into three equal slices.
    pub fn slice_bounds(&self) -> (f64, f64) {
        let third = self.pillar_height() / 3.0;
        (self.z_range.0 + third, self.z_range.0 + 2.0 * third)
    }
}

/// Grid cell for a BEV position: min edges inclusive, max edges exclusive.
/// `None` when (x, y) falls outside the grid; the z filter is the caller's.
#[inline]
pub fn pillar_index(x: f64, y: f64, cfg: &PillarGridConfig) -> Option<(usize, usize)> {
    let col = ((x - cfg.x_range.0) / cfg.cell).floor();
    let row = ((y - cfg.y_range.0) / cfg.cell).floor();
    if col < 0.0 || row < 0.0 {
        return None;
    }
    let (row, col) = (row as usize, col as usize);
    (row < cfg.height() && col < cfg.width()).then_some((row, col))
}

/// Per-pillar summary of the contained points, exposed so reference
/// implementations and tests can check individual pillars.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PillarStats {
    pub count: u32,
    pub mean_height: f64,
    pub mean_v: f64,
    pub max_height: f64,
    /// `v` of the highest point; ties on max height keep the point latest
    /// in input order.
    pub v_of_highest: f64,
    /// Max height within each of the three equal z slices, 0 when a slice
    /// holds no points.
    pub slice_max_heights: [f64; 3],
    pub center_distance: f64,
    pub center_angle: f64,
}

/// Dense `height x width x channels` tensor, row-major, channel-fastest.
/// Pillars with no in-range points are exactly zero in every channel.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub height: usize,
    pub width: usize,
    pub variant: Variant,
    pub data: Vec<f32>,
}

impl FeatureMap {
    pub fn zeros(height: usize, width: usize, variant: Variant) -> Self {
        Self {
            height,
            width,
            variant,
            data: vec![0.0; height * width * variant.channels()],
        }
    }

    pub fn channels(&self) -> usize {
        self.variant.channels()
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize, channel: usize) -> f32 {
        self.data[(row * self.width + col) * self.channels() + channel]
    }

    /// Feature vector of one pillar.
    pub fn pillar(&self, row: usize, col: usize) -> &[f32] {
        let c = self.channels();
        let base = (row * self.width + col) * c;
        &self.data[base..base + c]
    }
}

/// Binning counters reported alongside the encoded tensor.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EncodeStats {
    pub points_total: usize,
    /// Points inside the x/y grid and the closed z range.
    pub points_in_range: usize,
    pub occupied_pillars: usize,
}

#[derive(Clone, Copy)]
struct Accumulator {
    count: u32,
    sum_z: f64,
    sum_v: f64,
    max_z: f64,
    v_at_max: f64,
    slice_max: [f64; 3],
}

const EMPTY_ACC: Accumulator = Accumulator {
    count: 0,
    sum_z: 0.0,
    sum_v: 0.0,
    max_z: f64::NEG_INFINITY,
    v_at_max: 0.0,
    slice_max: [f64::NEG_INFINITY; 3],
};

fn write_channels(map: &mut FeatureMap, row: usize, col: usize, stats: &PillarStats) {
    let c = map.channels();
    let base = (row * map.width + col) * c;
    let out = &mut map.data[base..base + c];
    match c {
        6 => {
            out[0] = 1.0;
            out[1] = stats.count as f32;
            out[2] = stats.mean_height as f32;
            out[3] = stats.mean_v as f32;
            out[4] = stats.max_height as f32;
            out[5] = stats.v_of_highest as f32;
        }
        _ => {
            out[0] = stats.count as f32;
            out[1] = stats.mean_height as f32;
            out[2] = stats.mean_v as f32;
            out[3] = stats.max_height as f32;
            out[4] = stats.v_of_highest as f32;
            out[5] = stats.center_distance as f32;
            out[6] = stats.center_angle as f32;
            out[7] = stats.slice_max_heights[0] as f32;
            out[8] = stats.slice_max_heights[1] as f32;
            out[9] = stats.slice_max_heights[2] as f32;
        }
    }
}

/// Encode a cloud into the dense pillar feature tensor.
///
/// Out-of-range points are silently excluded; see [`encode_with_stats`]
/// for the counters.
pub fn encode(cloud: &PointCloud, cfg: &PillarGridConfig) -> FeatureMap {
    encode_with_stats(cloud, cfg).0
}

/// [`encode`] plus binning counters.
pub fn encode_with_stats(cloud: &PointCloud, cfg: &PillarGridConfig) -> (FeatureMap, EncodeStats) {
    let height = cfg.height();
    let width = cfg.width();
    let (z_min, z_max) = cfg.z_range;
    let (b1, b2) = cfg.slice_bounds();
    let inv_cell = 1.0 / cfg.cell;
    let (x0, y0) = (cfg.x_range.0, cfg.y_range.0);
    let (hf, wf) = (height as f64, width as f64);

    let mut accs = vec![EMPTY_ACC; height * width];
    let mut touched: Vec<u32> = Vec::new();
    let mut in_range = 0usize;

    for p in &cloud.points {
        if p.z < z_min || p.z > z_max {
            continue;
        }
        let col = (p.x - x0) * inv_cell;
        let row = (p.y - y0) * inv_cell;
        if col < 0.0 || row < 0.0 || col >= wf || row >= hf {
            continue;
        }
        let (col, row) = (col as usize, row as usize);
        if col >= width || row >= height {
            continue;
        }
        in_range += 1;
        let idx = row * width + col;
        let acc = &mut accs[idx];
        if acc.count == 0 {
            touched.push(idx as u32);
        }
        acc.count += 1;
        acc.sum_z += p.z;
        acc.sum_v += p.v;
        if p.z >= acc.max_z {
            acc.max_z = p.z;
            acc.v_at_max = p.v;
        }
        let slice = if p.z < b1 {
            0
        } else if p.z < b2 {
            1
        } else {
            2
        };
        if p.z > acc.slice_max[slice] {
            acc.slice_max[slice] = p.z;
        }
    }

    let mut map = FeatureMap::zeros(height, width, cfg.variant);
    for &idx in &touched {
        let idx = idx as usize;
        let acc = accs[idx];
        let (row, col) = (idx / width, idx % width);
        let (xc, yc) = cfg.pillar_center(row, col);
        let n = acc.count as f64;
        let stats = PillarStats {
            count: acc.count,
            mean_height: acc.sum_z / n,
            mean_v: acc.sum_v / n,
            max_height: acc.max_z,
            v_of_highest: acc.v_at_max,
            slice_max_heights: acc.slice_max.map(|m| if m.is_finite() { m } else { 0.0 }),
            center_distance: xc.hypot(yc),
            center_angle: yc.atan2(xc),
        };
        write_channels(&mut map, row, col, &stats);
    }

    let stats = EncodeStats {
        points_total: cloud.points.len(),
        points_in_range: in_range,
        occupied_pillars: touched.len(),
    };
    (map, stats)
}
