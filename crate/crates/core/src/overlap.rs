//! Spatial overlap between two agents' message footprints.

use serde::{Deserialize, Serialize};

use crate::se2::Pose;

/// Rectangle centered on the agent, `length` along its heading.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MessageFootprint {
    pub length: f64,
    pub width: f64,
}

impl Default for MessageFootprint {
    fn default() -> Self {
        MessageFootprint {
            length: 200.0,
            width: 80.0,
        }
    }
}

impl MessageFootprint {
    pub fn area(&self) -> f64 {
        self.length * self.width
    }

    /// Corners in world coordinates, counter-clockwise.
    pub fn corners(&self, pose: &Pose) -> [[f64; 2]; 4] {
        let (hl, hw) = (0.5 * self.length, 0.5 * self.width);
        [[-hl, -hw], [hl, -hw], [hl, hw], [-hl, hw]].map(|c| pose.transform_point(c))
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Shoelace area, positive for counter-clockwise rings.
pub fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    0.5 * (0..n)
        .map(|i| {
            let (p, q) = (poly[i], poly[(i + 1) % n]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum::<f64>()
}

/// Sutherland-Hodgman clip of `subject` against the convex counter-clockwise `clip`.
pub fn clip_convex(subject: &[[f64; 2]], clip: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut output = subject.to_vec();
    for i in 0..clip.len() {
        if output.is_empty() {
            break;
        }
        let (a, b) = (clip[i], clip[(i + 1) % clip.len()]);
        let input = std::mem::take(&mut output);
        for k in 0..input.len() {
            let cur = input[k];
            let prev = input[(k + input.len() - 1) % input.len()];
            let (dc, dp) = (cross(a, b, cur), cross(a, b, prev));
            if dc >= 0.0 {
                if dp < 0.0 {
                    output.push(intersect(prev, cur, dp, dc));
                }
                output.push(cur);
            } else if dp >= 0.0 {
                output.push(intersect(prev, cur, dp, dc));
            }
        }
    }
    output
}

fn intersect(p: [f64; 2], q: [f64; 2], dp: f64, dq: f64) -> [f64; 2] {
    let t = dp / (dp - dq);
    [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
}

/// Intersection area of the two footprints over one footprint's area, in `[0, 1]`.
pub fn overlap_fraction(pose_i: &Pose, pose_j: &Pose, fp: &MessageFootprint) -> f64 {
    let a = fp.corners(pose_i);
    let b = fp.corners(pose_j);
    let inter = clip_convex(&a, &b);
    (polygon_area(&inter) / fp.area()).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_poses_overlap_fully() {
        let p = Pose::from_degrees(12.0, -3.0, 37.0);
        let o = overlap_fraction(&p, &p, &MessageFootprint::default());
        assert!((o - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distant_agents_do_not_overlap() {
        let fp = MessageFootprint::default();
        let o = overlap_fraction(&Pose::IDENTITY, &Pose::new(10_000.0, 0.0, 0.3), &fp);
        assert_eq!(o, 0.0);
    }

    #[test]
    fn half_length_offset() {
        let fp = MessageFootprint::default();
        let o = overlap_fraction(&Pose::IDENTITY, &Pose::new(100.0, 0.0, 0.0), &fp);
        assert!((o - 0.5).abs() < 1e-12);
    }

    #[test]
    fn perpendicular_cross() {
        // 200x80 crossed with 80x200 at the same center: an 80x80 square.
        let fp = MessageFootprint::default();
        let o = overlap_fraction(&Pose::IDENTITY, &Pose::from_degrees(0.0, 0.0, 90.0), &fp);
        assert!((o - 6400.0 / 16000.0).abs() < 1e-12);
    }

    #[test]
    fn clip_disjoint_is_empty() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let far = sq.map(|p| [p[0] + 5.0, p[1]]);
        assert!(clip_convex(&sq, &far).len() < 3 || polygon_area(&clip_convex(&sq, &far)) == 0.0);
        assert!((polygon_area(&sq) - 1.0).abs() < 1e-15);
    }
}
