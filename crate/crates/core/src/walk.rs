//! The continuous-time random walk on a T-graph.
//!
//! At an interior vertex `x` hosted by a segment with neighbours `x+`, `x-`
//! the only transitions are `x -> x±` at rate `1/(|x± - x| |x+ - x-|)`; this
//! makes the walk an exact martingale whose variance trace grows at unit
//! speed. Boundary vertices are sinks. On vertices carrying a collapsed face
//! the transition data comes from the reference triangle stored in the graph.

use crate::geom::C;
use crate::rng::stream_rng;
use crate::tgraph::{TGraph, VertexId, VertexKind};
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WalkError {
    #[error("vertex {0} is degenerate; use the collapsed-face transition data")]
    DegenerateVertex(VertexId),
    #[error("vertex {0} is degenerate but carries no reference-triangle data")]
    MissingGeometry(VertexId),
    #[error("need at least two paths alive at the requested time")]
    NotEnoughPaths,
}

/// Outgoing transitions `(target, rate)` of a non-degenerate interior vertex.
/// Boundary vertices return an empty list.
pub fn transition_rates(g: &TGraph, v: VertexId) -> Result<Vec<(VertexId, f64)>, WalkError> {
    match g.vertex_kind[v] {
        VertexKind::Boundary => Ok(Vec::new()),
        VertexKind::Degenerate => Err(WalkError::DegenerateVertex(v)),
        VertexKind::Interior { .. } => {
            let (prev, next) = g.host_neighbors(v).expect("interior vertex has host");
            let p = g.vertices[v];
            let chord = (g.vertices[next] - g.vertices[prev]).norm();
            Ok(vec![
                (prev, 1.0 / ((g.vertices[prev] - p).norm() * chord)),
                (next, 1.0 / ((g.vertices[next] - p).norm() * chord)),
            ])
        }
    }
}

/// Transitions of a degenerate vertex given the side lengths `l` of the
/// collapsed reference triangle and the lengths `edge_len` of the outgoing
/// edges: the jump along edge `i` has rate `l_i / (L_i (l_1 + l_2 + l_3))`.
pub fn degenerate_rates(
    targets: [VertexId; 3],
    edge_len: [f64; 3],
    l: [f64; 3],
) -> Vec<(VertexId, f64)> {
    let total: f64 = l.iter().sum();
    (0..3)
        .map(|i| (targets[i], l[i] / (edge_len[i] * total)))
        .collect()
}

/// Looks up the stored transitions of a degenerate vertex.
pub fn degenerate_transitions(g: &TGraph, v: VertexId) -> Result<Vec<(VertexId, f64)>, WalkError> {
    g.degenerate
        .iter()
        .find(|d| d.vertex == v)
        .map(|d| d.transitions.clone())
        .ok_or(WalkError::MissingGeometry(v))
}

fn rates_of(g: &TGraph, v: VertexId) -> Vec<(VertexId, f64)> {
    match g.vertex_kind[v] {
        VertexKind::Degenerate => degenerate_transitions(g, v).unwrap_or_default(),
        _ => transition_rates(g, v).unwrap_or_default(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    BoundaryHit,
    TimeCap,
    ExitedRegion,
    StepCap,
}

#[derive(Clone, Copy, Debug)]
pub enum StopRule {
    /// Run until absorbed at a boundary vertex.
    Absorption,
    /// Run until the clock passes `t`.
    TimeCap(f64),
    /// Run until leaving the ball of radius `r` around the start.
    ExitBall(f64),
}

#[derive(Clone, Debug)]
pub struct WalkPath {
    /// `(vertex, time of arrival)`; the first entry is `(start, 0)`.
    pub steps: Vec<(VertexId, f64)>,
    pub reason: StopReason,
}

impl WalkPath {
    pub fn position_at(&self, g: &TGraph, t: f64) -> Option<C> {
        if self.steps.is_empty() || t < 0.0 {
            return None;
        }
        let mut last = self.steps[0].0;
        for &(v, s) in &self.steps {
            if s > t {
                return Some(g.vertices[last]);
            }
            last = v;
        }
        match self.reason {
            // absorbed walks stay put; capped walks are unknown past the cap
            StopReason::BoundaryHit => Some(g.vertices[last]),
            _ => {
                if t <= self.steps.last().unwrap().1 {
                    Some(g.vertices[last])
                } else {
                    None
                }
            }
        }
    }
}

/// Hard cap guarding against malformed graphs.
const MAX_STEPS: usize = 50_000_000;

/// Exact event-driven simulation: exponential holding time with the total
/// outgoing rate, then a jump chosen proportionally to the rates.
pub fn sample_path(g: &TGraph, start: VertexId, rule: StopRule, seed: u64, stream: u64) -> WalkPath {
    let mut rng = stream_rng(seed, stream);
    let origin = g.vertices[start];
    let mut steps = vec![(start, 0.0)];
    let mut v = start;
    let mut t = 0.0;
    loop {
        if steps.len() >= MAX_STEPS {
            return WalkPath { steps, reason: StopReason::StepCap };
        }
        let rates = rates_of(g, v);
        if rates.is_empty() {
            return WalkPath { steps, reason: StopReason::BoundaryHit };
        }
        let total: f64 = rates.iter().map(|&(_, r)| r).sum();
        let dt = -rng.gen::<f64>().max(f64::MIN_POSITIVE).ln() / total;
        t += dt;
        if let StopRule::TimeCap(cap) = rule {
            if t > cap {
                // freeze at the pre-jump position; record the cap time
                steps.push((v, cap));
                return WalkPath { steps, reason: StopReason::TimeCap };
            }
        }
        let mut u = rng.gen::<f64>() * total;
        let mut target = rates[rates.len() - 1].0;
        for &(w, r) in &rates {
            if u < r {
                target = w;
                break;
            }
            u -= r;
        }
        v = target;
        steps.push((v, t));
        if let StopRule::ExitBall(r) = rule {
            if (g.vertices[v] - origin).norm() >= r {
                return WalkPath { steps, reason: StopReason::ExitedRegion };
            }
        }
    }
}

/// Positions of many independent walks at time `t` (walks absorbed earlier
/// report their absorption point).
pub fn positions_at_time(
    g: &TGraph,
    start: VertexId,
    t: f64,
    n_paths: usize,
    seed: u64,
) -> Vec<C> {
    (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let path = sample_path(g, start, StopRule::TimeCap(t), seed, i as u64);
            path.position_at(g, t).expect("time-capped path covers t")
        })
        .collect()
}

/// Sample covariance matrix `[[xx, xy], [xy, yy]]` of a point cloud.
pub fn empirical_covariance(points: &[C]) -> Result<[[f64; 2]; 2], WalkError> {
    if points.len() < 2 {
        return Err(WalkError::NotEnoughPaths);
    }
    let n = points.len() as f64;
    let mean = points.iter().sum::<C>() / n;
    let (mut xx, mut xy, mut yy) = (0.0, 0.0, 0.0);
    for &p in points {
        let d = p - mean;
        xx += d.re * d.re;
        xy += d.re * d.im;
        yy += d.im * d.im;
    }
    Ok([[xx / (n - 1.0), xy / (n - 1.0)], [xy / (n - 1.0), yy / (n - 1.0)]])
}

/// Variance of the projections on a unit direction.
pub fn directional_variance(points: &[C], dir: C) -> f64 {
    let n = points.len() as f64;
    let proj: Vec<f64> = points.iter().map(|&p| p.re * dir.re + p.im * dir.im).collect();
    let mean = proj.iter().sum::<f64>() / n;
    proj.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Local martingale defect `|sum rate (target - v)|` and variance-speed defect
/// `|sum rate |target - v|^2 - 1|` at a non-degenerate interior vertex.
pub fn local_identities(g: &TGraph, v: VertexId) -> Option<(f64, f64)> {
    let rates = transition_rates(g, v).ok()?;
    if rates.is_empty() {
        return None;
    }
    let p = g.vertices[v];
    let mut drift = C::new(0.0, 0.0);
    let mut speed = 0.0;
    for &(w, r) in &rates {
        drift += (g.vertices[w] - p) * r;
        speed += r * (g.vertices[w] - p).norm_sqr();
    }
    Some((drift.norm(), (speed - 1.0).abs()))
}

/// Interior non-degenerate vertices.
pub fn interior_vertices(g: &TGraph) -> Vec<VertexId> {
    (0..g.vertices.len())
        .filter(|&v| matches!(g.vertex_kind[v], VertexKind::Interior { .. }))
        .collect()
}

/// Empirical exit times from the ball of radius `r`, one per path.
pub fn exit_times(g: &TGraph, start: VertexId, r: f64, n_paths: usize, seed: u64) -> Vec<f64> {
    (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let path = sample_path(g, start, StopRule::ExitBall(r), seed, i as u64);
            path.steps.last().unwrap().1
        })
        .collect()
}

/// Empirical `P(sup_{s<=t} |X_s - X_0| >= 2 c sqrt(t))` for one `(c, t)`
/// together with the martingale concentration bound
/// `4 exp(-c^2/2 (1 + (2/3) L c / sqrt(t))^{-1})`.
pub fn bernstein_check(
    g: &TGraph,
    start: VertexId,
    c: f64,
    t: f64,
    max_seg_len: f64,
    n_paths: usize,
    seed: u64,
) -> (f64, f64) {
    let threshold = 2.0 * c * t.sqrt();
    let origin = g.vertices[start];
    let hits: usize = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let path = sample_path(g, start, StopRule::TimeCap(t), seed, i as u64);
            let excursion = path
                .steps
                .iter()
                .map(|&(v, _)| (g.vertices[v] - origin).norm())
                .fold(0.0, f64::max);
            (excursion >= threshold) as usize
        })
        .sum();
    let bound = 4.0 * (-0.5 * c * c / (1.0 + (2.0 / 3.0) * max_seg_len * c / t.sqrt())).exp();
    (hits as f64 / n_paths as f64, bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tgraph::triangle_tgraph;
    use approx::assert_relative_eq;

    fn cross_graph() -> (TGraph, VertexId) {
        // a vertical chord resting on a horizontal chord: one interior vertex
        // at distances 0.3 / 0.7 along the unit host
        let segs = vec![
            (C::new(0.0, 0.0), C::new(1.0, 0.0)),
            (C::new(0.3, 0.0), C::new(0.3, 0.6)),
        ];
        let bd = vec![C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(0.3, 0.6)];
        let g = TGraph::build(segs, bd, None).unwrap();
        let v = (0..g.vertices.len())
            .find(|&v| matches!(g.vertex_kind[v], VertexKind::Interior { .. }))
            .unwrap();
        (g, v)
    }

    #[test]
    fn rates_match_formula() {
        let (g, v) = cross_graph();
        // v = (0.3, 0) on the horizontal unit chord: neighbours at 0.3 and 0.7
        let rates = transition_rates(&g, v).unwrap();
        assert_eq!(rates.len(), 2);
        let mut rs: Vec<f64> = rates.iter().map(|&(_, r)| r).collect();
        rs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_relative_eq!(rs[0], 1.0 / 0.7, epsilon = 1e-12);
        assert_relative_eq!(rs[1], 1.0 / 0.3, epsilon = 1e-12);
    }

    #[test]
    fn midpoint_rates() {
        let segs = vec![
            (C::new(0.0, 0.0), C::new(1.0, 0.0)),
            (C::new(0.5, 0.0), C::new(0.5, 0.5)),
        ];
        let bd = vec![C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(0.5, 0.5)];
        let g = TGraph::build(segs, bd, None).unwrap();
        let v = interior_vertices(&g)[0];
        let rates = transition_rates(&g, v).unwrap();
        for &(_, r) in &rates {
            assert_relative_eq!(r, 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn boundary_vertices_are_sinks() {
        let (g, _) = cross_graph();
        for v in 0..g.vertices.len() {
            if g.is_boundary(v) {
                assert!(transition_rates(&g, v).unwrap().is_empty());
            }
        }
    }

    #[test]
    fn degenerate_rate_formula() {
        let rates = degenerate_rates([0, 1, 2], [1.0, 1.0, 1.0], [1.0, 1.0, 1.0]);
        for &(_, r) in &rates {
            assert_relative_eq!(r, 1.0 / 3.0, epsilon = 1e-15);
        }
        let rates = degenerate_rates([0, 1, 2], [1.0, 1.0, 1.0], [2.0, 1.0, 1.0]);
        assert_relative_eq!(rates[0].1, 0.5, epsilon = 1e-15);
        assert_relative_eq!(rates[1].1, 0.25, epsilon = 1e-15);
        assert_relative_eq!(rates[2].1, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn non_degenerate_vertex_rejects_degenerate_query() {
        let (g, v) = cross_graph();
        assert!(matches!(
            degenerate_transitions(&g, v),
            Err(WalkError::MissingGeometry(_))
        ));
    }

    #[test]
    fn martingale_and_speed_identities() {
        let (segs, bd) = triangle_tgraph();
        let g = TGraph::build(segs, bd, None).unwrap();
        for v in interior_vertices(&g) {
            let (drift, speed) = local_identities(&g, v).unwrap();
            assert!(drift < 1e-12, "drift {drift}");
            assert!(speed < 1e-12, "speed {speed}");
        }
    }

    #[test]
    fn absorption_and_reproducibility() {
        let (g, v) = cross_graph();
        let p1 = sample_path(&g, v, StopRule::Absorption, 42, 0);
        let p2 = sample_path(&g, v, StopRule::Absorption, 42, 0);
        assert_eq!(p1.reason, StopReason::BoundaryHit);
        assert_eq!(p1.steps, p2.steps);
        let p3 = sample_path(&g, v, StopRule::Absorption, 42, 1);
        // different stream almost surely differs
        assert!(p1.steps != p3.steps || p1.steps.len() <= 2);
    }

    #[test]
    fn covariance_needs_two_paths() {
        assert!(empirical_covariance(&[C::new(0.0, 0.0)]).is_err());
    }
}
