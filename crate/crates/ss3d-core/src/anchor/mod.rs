//! SSD prior boxes over the pillar grid: generation, target assignment
//! against ground truth, and the residual box codec consumed by external
//! trainers.

mod codec;
mod tgt;

pub use codec::{decode_box, direction_bit, encode_box, CodecError};
pub use tgt::{read_targets, write_targets, write_targets_to, TargetRecord, TgtError};

use std::f64::consts::FRAC_PI_2;

use crate::box_geom::{iou_2d_axis_aligned, Box3D, Rect2};
use crate::pillar::PillarGridConfig;

/// Prior-box layout and matching thresholds. Defaults follow the
/// PointPillars Car configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorConfig {
    /// Anchor width (lateral) in meters.
    pub width: f64,
    /// Anchor length (along heading) in meters.
    pub length: f64,
    /// Anchor height in meters.
    pub height: f64,
    /// One anchor per yaw per strided cell.
    pub yaws: Vec<f64>,
    /// Anchor center height in meters.
    pub z_center: f64,
    /// Anchor grid stride in cells (2 puts anchors on the half-resolution map).
    pub stride: usize,
    /// Min IoU for a positive match.
    pub pos_iou: f64,
    /// Max IoU below which an anchor is negative.
    pub neg_iou: f64,
}

impl Default for AnchorConfig {
    fn default() -> Self {
        Self {
            width: 1.6,
            length: 3.9,
            height: 1.56,
            yaws: vec![0.0, FRAC_PI_2],
            z_center: -1.0,
            stride: 2,
            pos_iou: 0.6,
            neg_iou: 0.45,
        }
    }
}

/// Prior boxes in deterministic row-major, yaw-fastest order:
/// `index = (row * cols + col) * yaws + yaw_index`.
#[derive(Debug, Clone)]
pub struct AnchorSet {
    pub anchors: Vec<Box3D>,
    pub rows: usize,
    pub cols: usize,
    pub yaws_per_cell: usize,
}

impl AnchorSet {
    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }
}

/// Tile one anchor per (strided cell x yaw), centered on the strided cell,
/// at the configured z center. Grid dimensions that do not divide evenly by
/// the stride round up, so a stride at least as large as the grid leaves a
/// single cell.
pub fn generate_anchors(grid: &PillarGridConfig, cfg: &AnchorConfig) -> AnchorSet {
    let stride = cfg.stride.max(1);
    let rows = grid.height().div_ceil(stride);
    let cols = grid.width().div_ceil(stride);
    let step = stride as f64 * grid.cell;
    let mut anchors = Vec::with_capacity(rows * cols * cfg.yaws.len());
    for r in 0..rows {
        let y = grid.y_range.0 + (r as f64 + 0.5) * step;
        for c in 0..cols {
            let x = grid.x_range.0 + (c as f64 + 0.5) * step;
            for &yaw in &cfg.yaws {
                anchors.push(Box3D::new(
                    x, y, cfg.z_center, cfg.length, cfg.width, cfg.height, yaw,
                ));
            }
        }
    }
    AnchorSet {
        anchors,
        rows,
        cols,
        yaws_per_cell: cfg.yaws.len(),
    }
}

/// Per-anchor assignment outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnchorLabel {
    /// Matched to the ground-truth box at this index.
    Positive(usize),
    Negative,
    Ignored,
}

/// Classification and regression targets for every anchor of a set.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetAssignment {
    pub labels: Vec<AnchorLabel>,
    /// Residuals per anchor; zero for non-positive anchors.
    pub regressions: Vec<[f64; 7]>,
    /// 1 iff the matched gt yaw lies in [0, pi); 0 for non-positive anchors.
    pub direction_bits: Vec<u8>,
}

impl TargetAssignment {
    pub fn num_positive(&self) -> usize {
        self.labels
            .iter()
            .filter(|l| matches!(l, AnchorLabel::Positive(_)))
            .count()
    }
}

/// Match anchors to ground-truth boxes by axis-aligned BEV footprint IoU.
///
/// The footprint of a box is the axis-aligned bounding rectangle of its
/// rotated BEV outline (exact for the yaw-0 / yaw-pi/2 anchors). An anchor
/// is positive when its best IoU reaches `pos_iou` (matched to the argmax
/// gt, ties to the lowest gt index), negative when below `neg_iou`, ignored
/// in between. Every gt whose best IoU is nonzero additionally force-matches
/// its argmax anchor; collisions keep the gt with the higher IoU, then the
/// lower index.
pub fn assign_targets(
    anchors: &AnchorSet,
    gts: &[Box3D],
    cfg: &AnchorConfig,
) -> TargetAssignment {
    let n = anchors.len();
    let mut labels = vec![AnchorLabel::Negative; n];
    let mut regressions = vec![[0.0f64; 7]; n];
    let mut direction_bits = vec![0u8; n];

    if !gts.is_empty() {
        let gt_rects: Vec<Rect2> = gts.iter().map(|g| g.bev_aabb()).collect();
        let mut anchor_best_iou = vec![0.0f64; n];
        let mut anchor_best_gt = vec![0usize; n];
        let mut gt_best_iou = vec![0.0f64; gts.len()];
        let mut gt_best_anchor = vec![0usize; gts.len()];

        for (ai, anchor) in anchors.anchors.iter().enumerate() {
            let rect = anchor.bev_aabb();
            for (gi, gt_rect) in gt_rects.iter().enumerate() {
                let iou = iou_2d_axis_aligned(&rect, gt_rect);
                if iou > anchor_best_iou[ai] {
                    anchor_best_iou[ai] = iou;
                    anchor_best_gt[ai] = gi;
                }
                if iou > gt_best_iou[gi] {
                    gt_best_iou[gi] = iou;
                    gt_best_anchor[gi] = ai;
                }
            }
        }

        // IoU-threshold labels; matched_iou backs the force-match collisions
        let mut matched_iou = vec![0.0f64; n];
        for ai in 0..n {
            if anchor_best_iou[ai] >= cfg.pos_iou {
                labels[ai] = AnchorLabel::Positive(anchor_best_gt[ai]);
                matched_iou[ai] = anchor_best_iou[ai];
            } else if anchor_best_iou[ai] < cfg.neg_iou {
                labels[ai] = AnchorLabel::Negative;
            } else {
                labels[ai] = AnchorLabel::Ignored;
            }
        }

        // force-match: every gt with any overlap owns its argmax anchor
        for gi in 0..gts.len() {
            if gt_best_iou[gi] <= 0.0 {
                continue;
            }
            let ai = gt_best_anchor[gi];
            if gt_best_iou[gi] > matched_iou[ai] {
                labels[ai] = AnchorLabel::Positive(gi);
                matched_iou[ai] = gt_best_iou[gi];
            }
        }

        for ai in 0..n {
            if let AnchorLabel::Positive(gi) = labels[ai] {
                regressions[ai] = encode_box(&gts[gi], &anchors.anchors[ai]);
                direction_bits[ai] = direction_bit(gts[gi].yaw);
            }
        }
    }

    TargetAssignment {
        labels,
        regressions,
        direction_bits,
    }
}
