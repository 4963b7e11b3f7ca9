//! Reference encoder used to validate the streaming implementation: for
//! each pillar it rescans the point list with its own binning arithmetic
//! and recomputes every statistic from scratch. Kept deliberately naive and
//! free of any code shared with [`super::encode`]; only the per-point
//! numeric primitives (hypot/atan2 on the pillar center) are the same,
//! since the contract pins those formulas.

use crate::ingest::{Point, PointCloud};

use super::{FeatureMap, PillarGridConfig, PillarStats};

fn col_of(x: f64, cfg: &PillarGridConfig) -> Option<usize> {
    let ratio = (x - cfg.x_range.0) / cfg.cell;
    if ratio < 0.0 {
        return None;
    }
    let col = ratio.floor() as usize;
    (col < cfg.width()).then_some(col)
}

fn row_of(y: f64, cfg: &PillarGridConfig) -> Option<usize> {
    let ratio = (y - cfg.y_range.0) / cfg.cell;
    if ratio < 0.0 {
        return None;
    }
    let row = ratio.floor() as usize;
    (row < cfg.height()).then_some(row)
}

fn in_z_band(p: &Point, cfg: &PillarGridConfig) -> bool {
    p.z >= cfg.z_range.0 && p.z <= cfg.z_range.1
}

fn stats_from_members(members: &[&Point], cfg: &PillarGridConfig, row: usize, col: usize) -> PillarStats {
    let mut sum_z = 0.0;
    let mut sum_v = 0.0;
    for p in members {
        sum_z += p.z;
        sum_v += p.v;
    }
    let mut top = members[0];
    for p in &members[1..] {
        if p.z >= top.z {
            top = p;
        }
    }

    let (z_lo, z_hi) = cfg.z_range;
    let third = (z_hi - z_lo) / 3.0;
    let mut slice_max = [0.0f64; 3];
    for (s, out) in slice_max.iter_mut().enumerate() {
        let lo = z_lo + s as f64 * third;
        let best = members
            .iter()
            .filter(|p| {
                if s == 2 {
                    p.z >= lo && p.z <= z_hi
                } else {
                    p.z >= lo && p.z < z_lo + (s as f64 + 1.0) * third
                }
            })
            .map(|p| p.z)
            .fold(f64::NEG_INFINITY, f64::max);
        if best.is_finite() {
            *out = best;
        }
    }

    let xc = cfg.x_range.0 + (col as f64 + 0.5) * cfg.cell;
    let yc = cfg.y_range.0 + (row as f64 + 0.5) * cfg.cell;
    let n = members.len() as f64;
    PillarStats {
        count: members.len() as u32,
        mean_height: sum_z / n,
        mean_v: sum_v / n,
        max_height: top.z,
        v_of_highest: top.v,
        slice_max_heights: slice_max,
        center_distance: xc.hypot(yc),
        center_angle: yc.atan2(xc),
    }
}

/// Reference stats for a single pillar, `None` when it holds no in-range
/// points.
pub fn oracle_pillar_stats(
    cloud: &PointCloud,
    cfg: &PillarGridConfig,
    row: usize,
    col: usize,
) -> Option<PillarStats> {
    let members: Vec<&Point> = cloud
        .points
        .iter()
        .filter(|p| in_z_band(p, cfg) && row_of(p.y, cfg) == Some(row) && col_of(p.x, cfg) == Some(col))
        .collect();
    (!members.is_empty()).then(|| stats_from_members(&members, cfg, row, col))
}

/// Same contract as [`super::encode`], computed the slow way. Rows are
/// prefiltered once so the rescan stays tractable on full-size grids.
pub fn encode_oracle(cloud: &PointCloud, cfg: &PillarGridConfig) -> FeatureMap {
    let height = cfg.height();
    let width = cfg.width();
    let channels = cfg.variant.channels();
    let mut map = FeatureMap::zeros(height, width, cfg.variant);

    for row in 0..height {
        let row_points: Vec<&Point> = cloud
            .points
            .iter()
            .filter(|p| in_z_band(p, cfg) && row_of(p.y, cfg) == Some(row))
            .collect();
        if row_points.is_empty() {
            continue;
        }
        for col in 0..width {
            let members: Vec<&Point> = row_points
                .iter()
                .copied()
                .filter(|p| col_of(p.x, cfg) == Some(col))
                .collect();
            if members.is_empty() {
                continue;
            }
            let s = stats_from_members(&members, cfg, row, col);
            let base = (row * width + col) * channels;
            let out = &mut map.data[base..base + channels];
            if channels == 6 {
                out.copy_from_slice(&[
                    1.0,
                    s.count as f32,
                    s.mean_height as f32,
                    s.mean_v as f32,
                    s.max_height as f32,
                    s.v_of_highest as f32,
                ]);
            } else {
                out.copy_from_slice(&[
                    s.count as f32,
                    s.mean_height as f32,
                    s.mean_v as f32,
                    s.max_height as f32,
                    s.v_of_highest as f32,
                    s.center_distance as f32,
                    s.center_angle as f32,
                    s.slice_max_heights[0] as f32,
                    s.slice_max_heights[1] as f32,
                    s.slice_max_heights[2] as f32,
                ]);
            }
        }
    }
    map
}
