//! Cost model comparing the learned fully-connected pillar encoder against
//! the statistical one.

use super::PillarGridConfig;

/// Modeled work per binned point: two floor-divides, the z test, six
/// accumulator updates, the max compare, the slice classify and the v store.
pub const STAT_ENCODER_OPS_PER_POINT: u64 = 12;

/// Modeled work per occupied pillar: finalizing the two means plus the
/// center distance and angle.
pub const STAT_ENCODER_OPS_PER_PILLAR: u64 = 10;

/// Multiply-accumulate count of a per-pillar fully-connected encoder: every
/// pillar pushes `points_per_pillar` points of `in_features` values through
/// a dense layer with `out_features` outputs.
///
/// The PointPillars-style default (12000, 100, 9, 64) lands on 691.2 M MACs.
pub fn fc_encoder_macs(
    num_pillars: u64,
    points_per_pillar: u64,
    in_features: u64,
    out_features: u64,
) -> u64 {
    num_pillars * points_per_pillar * in_features * out_features
}

/// Modeled operation count of the statistical encoder: constant work per
/// in-range point plus constant finalization work bounded by the number of
/// pillars that can be occupied. The constants are a declared model, not a
/// measurement.
pub fn statistical_encoder_flops(cfg: &PillarGridConfig, n_points: u64) -> u64 {
    let occupied_bound = n_points.min(cfg.pillar_count() as u64);
    STAT_ENCODER_OPS_PER_POINT * n_points + STAT_ENCODER_OPS_PER_PILLAR * occupied_bound
}
