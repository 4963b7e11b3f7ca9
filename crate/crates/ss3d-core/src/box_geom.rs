//! Oriented 3D boxes and the geometry built on them: rotated BEV IoU via
//! convex polygon clipping, volumetric IoU, axis-aligned IoU and greedy NMS.

use std::f64::consts::PI;

/// Intersection areas at or below this are treated as no overlap, so boxes
/// that merely share an edge or corner report IoU 0.
pub const AREA_EPS: f64 = 1e-12;

/// Default IoU threshold for [`nms_bev`] suppression.
pub const DEFAULT_NMS_IOU: f64 = 0.5;
/// Default minimum score for keeping a decoded detection.
pub const DEFAULT_SCORE_FLOOR: f64 = 0.05;

/// Oriented 3D box in the sensor frame (x forward, y left, z up).
///
/// `yaw` rotates about the vertical axis and is kept normalized to
/// `(-pi, pi]`; `length` runs along the heading, `width` across it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box3D {
    pub cx: f64,
    pub cy: f64,
    pub cz: f64,
    pub length: f64,
    pub width: f64,
    pub height: f64,
    pub yaw: f64,
}

impl Box3D {
    pub fn new(cx: f64, cy: f64, cz: f64, length: f64, width: f64, height: f64, yaw: f64) -> Self {
        Self {
            cx,
            cy,
            cz,
            length,
            width,
            height,
            yaw: normalize_angle(yaw),
        }
    }

    pub fn volume(&self) -> f64 {
        self.length * self.width * self.height
    }

    /// Vertical extent `[cz - h/2, cz + h/2]`.
    pub fn z_interval(&self) -> (f64, f64) {
        (self.cz - 0.5 * self.height, self.cz + 0.5 * self.height)
    }

    /// Axis-aligned bounding rectangle of the rotated BEV footprint.
    pub fn bev_aabb(&self) -> Rect2 {
        let corners = bev_corners(self);
        let mut r = Rect2 {
            x_min: f64::INFINITY,
            y_min: f64::INFINITY,
            x_max: f64::NEG_INFINITY,
            y_max: f64::NEG_INFINITY,
        };
        for [x, y] in corners {
            r.x_min = r.x_min.min(x);
            r.y_min = r.y_min.min(y);
            r.x_max = r.x_max.max(x);
            r.y_max = r.y_max.max(y);
        }
        r
    }
}

/// Axis-aligned rectangle. Doubles as an image box, in which case
/// (`x_min`, `y_min`) is (left, top) with y growing downward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect2 {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Rect2 {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Self {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
}

/// A scored, classified box.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub box3d: Box3D,
    pub class_name: String,
    pub score: f64,
}

/// Normalize an angle to `(-pi, pi]`.
pub fn normalize_angle(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Counter-clockwise corners of the yaw-rotated `length x width` footprint.
pub fn bev_corners(b: &Box3D) -> [[f64; 2]; 4] {
    let (s, c) = b.yaw.sin_cos();
    let hl = 0.5 * b.length;
    let hw = 0.5 * b.width;
    let local = [[hl, hw], [-hl, hw], [-hl, -hw], [hl, -hw]];
    local.map(|[lx, ly]| [b.cx + c * lx - s * ly, b.cy + s * lx + c * ly])
}

/// Signed distance sense of `p` relative to directed line `a -> b`:
/// positive means left of the line (inside, for CCW polygons).
fn edge_side(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
}

fn line_intersection(a: [f64; 2], b: [f64; 2], p: [f64; 2], q: [f64; 2]) -> [f64; 2] {
    let sp = edge_side(a, b, p);
    let sq = edge_side(a, b, q);
    let t = sp / (sp - sq);
    [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
}

/// Sutherland-Hodgman clip of a convex CCW `subject` against a convex CCW
/// `clipper`. Returns the intersection polygon (possibly empty).
fn clip_convex(subject: &[[f64; 2]], clipper: &[[f64; 2]; 4]) -> Vec<[f64; 2]> {
    let mut poly: Vec<[f64; 2]> = subject.to_vec();
    for i in 0..clipper.len() {
        if poly.is_empty() {
            break;
        }
        let a = clipper[i];
        let b = clipper[(i + 1) % clipper.len()];
        let mut clipped = Vec::with_capacity(poly.len() + 1);
        for j in 0..poly.len() {
            let p = poly[j];
            let q = poly[(j + 1) % poly.len()];
            let p_in = edge_side(a, b, p) >= 0.0;
            let q_in = edge_side(a, b, q) >= 0.0;
            match (p_in, q_in) {
                (true, true) => clipped.push(q),
                (true, false) => clipped.push(line_intersection(a, b, p, q)),
                (false, true) => {
                    clipped.push(line_intersection(a, b, p, q));
                    clipped.push(q);
                }
                (false, false) => {}
            }
        }
        poly = clipped;
    }
    poly
}

fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for i in 0..poly.len() {
        let [x0, y0] = poly[i];
        let [x1, y1] = poly[(i + 1) % poly.len()];
        twice += x0 * y1 - x1 * y0;
    }
    0.5 * twice
}

/// Intersection area of the two BEV footprints.
pub fn bev_intersection_area(a: &Box3D, b: &Box3D) -> f64 {
    let ca = bev_corners(a);
    let cb = bev_corners(b);
    polygon_area(&clip_convex(&ca, &cb)).max(0.0)
}

/// Rotated-rectangle IoU of the two BEV footprints.
pub fn iou_bev(a: &Box3D, b: &Box3D) -> f64 {
    let inter = bev_intersection_area(a, b);
    if inter <= AREA_EPS {
        return 0.0;
    }
    let union = a.length * a.width + b.length * b.width - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Volumetric IoU: BEV intersection area times vertical interval overlap.
pub fn iou_3d(a: &Box3D, b: &Box3D) -> f64 {
    let inter_area = bev_intersection_area(a, b);
    if inter_area <= AREA_EPS {
        return 0.0;
    }
    let (alo, ahi) = a.z_interval();
    let (blo, bhi) = b.z_interval();
    let overlap = (ahi.min(bhi) - alo.max(blo)).max(0.0);
    let inter_vol = inter_area * overlap;
    if inter_vol <= AREA_EPS {
        return 0.0;
    }
    let union = a.volume() + b.volume() - inter_vol;
    if union <= 0.0 {
        return 0.0;
    }
    (inter_vol / union).clamp(0.0, 1.0)
}

/// Standard interval-product IoU of two axis-aligned rectangles.
pub fn iou_2d_axis_aligned(a: &Rect2, b: &Rect2) -> f64 {
    let ix = (a.x_max.min(b.x_max) - a.x_min.max(b.x_min)).max(0.0);
    let iy = (a.y_max.min(b.y_max) - a.y_min.max(b.y_min)).max(0.0);
    let inter = ix * iy;
    if inter <= AREA_EPS {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Greedy descending-score suppression using [`iou_bev`].
///
/// Ties in score keep input order; a detection is removed when its BEV IoU
/// with an already-kept detection exceeds `iou_threshold`. Output is sorted
/// by descending score.
pub fn nms_bev(dets: &[Detection], iou_threshold: f64) -> Vec<Detection> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&i, &j| {
        dets[j]
            .score
            .partial_cmp(&dets[i].score)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut suppressed = vec![false; dets.len()];
    let mut kept = Vec::new();
    for (k, &i) in order.iter().enumerate() {
        if suppressed[i] {
            continue;
        }
        kept.push(dets[i].clone());
        for &j in &order[k + 1..] {
            if !suppressed[j] && iou_bev(&dets[i].box3d, &dets[j].box3d) > iou_threshold {
                suppressed[j] = true;
            }
        }
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn aab(cx: f64, cy: f64, l: f64, w: f64) -> Box3D {
        Box3D::new(cx, cy, 0.0, l, w, 1.0, 0.0)
    }

    #[test]
    fn corners_of_unit_box() {
        let c = bev_corners(&aab(0.0, 0.0, 1.0, 1.0));
        let expect = [[0.5, 0.5], [-0.5, 0.5], [-0.5, -0.5], [0.5, -0.5]];
        for (got, want) in c.iter().zip(expect.iter()) {
            assert_abs_diff_eq!(got[0], want[0], epsilon = 1e-12);
            assert_abs_diff_eq!(got[1], want[1], epsilon = 1e-12);
        }
    }

    #[test]
    fn corners_rotated_quarter_turn_same_set() {
        let a = bev_corners(&aab(0.0, 0.0, 1.0, 1.0));
        let b = bev_corners(&Box3D::new(0.0, 0.0, 0.0, 1.0, 1.0, 1.0, PI / 2.0));
        // same four corners, possibly in a different cyclic order
        for bc in b {
            assert!(a
                .iter()
                .any(|ac| (ac[0] - bc[0]).abs() < 1e-12 && (ac[1] - bc[1]).abs() < 1e-12));
        }
    }

    #[test]
    fn corners_rotated_45_degrees() {
        let b = Box3D::new(0.0, 0.0, 0.0, 2.0, 1.0, 1.0, PI / 4.0);
        let c = bev_corners(&b);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        // first local corner is (1.0, 0.5); rotated: (r*1 - r*0.5, r*1 + r*0.5)
        assert_abs_diff_eq!(c[0][0], r * 1.0 - r * 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(c[0][1], r * 1.0 + r * 0.5, epsilon = 1e-12);
    }

    #[test]
    fn iou_identical_is_one() {
        let b = Box3D::new(3.0, -2.0, 0.5, 3.9, 1.6, 1.56, 0.3);
        assert_abs_diff_eq!(iou_bev(&b, &b), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(iou_3d(&b, &b), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn iou_far_apart_is_zero() {
        let a = aab(0.0, 0.0, 2.0, 2.0);
        let b = aab(100.0, 0.0, 2.0, 2.0);
        assert_eq!(iou_bev(&a, &b), 0.0);
        assert_eq!(iou_3d(&a, &b), 0.0);
    }

    #[test]
    fn iou_offset_half_unit_squares() {
        let a = aab(0.0, 0.0, 1.0, 1.0);
        let b = aab(0.5, 0.0, 1.0, 1.0);
        assert_abs_diff_eq!(iou_bev(&a, &b), 1.0 / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn iou_shared_edge_is_zero() {
        let a = aab(0.0, 0.0, 1.0, 1.0);
        let b = aab(1.0, 0.0, 1.0, 1.0);
        assert_eq!(iou_bev(&a, &b), 0.0);
    }

    #[test]
    fn iou_3d_disjoint_vertical_intervals() {
        let a = Box3D::new(0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0);
        let b = Box3D::new(0.0, 0.0, 5.0, 1.0, 1.0, 1.0, 0.0);
        assert_eq!(iou_3d(&a, &b), 0.0);
        assert_abs_diff_eq!(iou_bev(&a, &b), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn iou_3d_half_vertical_overlap() {
        // same footprint, h = 2 each, centers 1 apart: overlap 1, union 3
        let a = Box3D::new(0.0, 0.0, 0.0, 1.0, 1.0, 2.0, 0.0);
        let b = Box3D::new(0.0, 0.0, 1.0, 1.0, 1.0, 2.0, 0.0);
        assert_abs_diff_eq!(iou_3d(&a, &b), 1.0 / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn iou_2d_offset_unit_squares() {
        let a = Rect2::new(0.0, 0.0, 1.0, 1.0);
        let b = Rect2::new(0.5, 0.5, 1.5, 1.5);
        assert_abs_diff_eq!(iou_2d_axis_aligned(&a, &b), 1.0 / 7.0, epsilon = 1e-12);
        assert_abs_diff_eq!(iou_2d_axis_aligned(&a, &a), 1.0, epsilon = 1e-12);
        let c = Rect2::new(5.0, 5.0, 6.0, 6.0);
        assert_eq!(iou_2d_axis_aligned(&a, &c), 0.0);
    }

    #[test]
    fn normalize_angle_range() {
        assert_abs_diff_eq!(normalize_angle(3.0 * PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(normalize_angle(-PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(normalize_angle(-0.5), -0.5, epsilon = 1e-12);
        assert_eq!(normalize_angle(0.0), 0.0);
    }

    fn det(b: Box3D, score: f64) -> Detection {
        Detection {
            box3d: b,
            class_name: "Car".to_string(),
            score,
        }
    }

    #[test]
    fn nms_identical_pair_keeps_best() {
        let b = aab(0.0, 0.0, 2.0, 2.0);
        let kept = nms_bev(&[det(b, 0.9), det(b, 0.8)], 0.5);
        assert_eq!(kept.len(), 1);
        assert_abs_diff_eq!(kept[0].score, 0.9);
    }

    #[test]
    fn nms_disjoint_keeps_all() {
        let kept = nms_bev(
            &[
                det(aab(0.0, 0.0, 1.0, 1.0), 0.9),
                det(aab(10.0, 0.0, 1.0, 1.0), 0.5),
                det(aab(0.0, 10.0, 1.0, 1.0), 0.7),
            ],
            0.5,
        );
        assert_eq!(kept.len(), 3);
        // sorted by descending score
        assert!(kept[0].score >= kept[1].score && kept[1].score >= kept[2].score);
    }

    #[test]
    fn nms_greedy_is_not_transitive() {
        // unit squares at x = 0, 0.25, 0.5: neighbours overlap at 0.6,
        // the ends only at 1/3, below the 0.5 threshold
        let a = det(aab(0.0, 0.0, 1.0, 1.0), 0.9);
        let b = det(aab(0.25, 0.0, 1.0, 1.0), 0.8);
        let c = det(aab(0.5, 0.0, 1.0, 1.0), 0.7);
        assert_abs_diff_eq!(iou_bev(&a.box3d, &b.box3d), 0.6, epsilon = 1e-9);
        assert_abs_diff_eq!(iou_bev(&b.box3d, &c.box3d), 0.6, epsilon = 1e-9);
        let kept = nms_bev(&[a, b, c], 0.5);
        let scores: Vec<f64> = kept.iter().map(|d| d.score).collect();
        assert_eq!(scores, vec![0.9, 0.7]);
    }

    #[test]
    fn nms_score_tie_keeps_input_order() {
        let a = det(aab(0.0, 0.0, 1.0, 1.0), 0.5);
        let b = det(aab(0.05, 0.0, 1.0, 1.0), 0.5);
        let kept = nms_bev(&[a.clone(), b], 0.9999);
        // high threshold: nothing suppressed, first input first
        assert_eq!(kept[0], a);
    }
}
