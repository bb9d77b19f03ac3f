//! The explicit whole-plane T-graph family.
//!
//! Given a positively oriented triangle `(A, B, C)` and a unit `lambda`, the
//! functions `F(w(m,n)) = alpha^m beta^n` and
//! `G(b(m,n)) = (C-B) alpha^{-m} beta^{-n}` with `alpha = (A-C)/(C-B)`,
//! `beta = (B-A)/(A-C)` generate an antisymmetric flow
//! `Omega(bw) = 2 Re(lambda F(w)) conj(lambda) G(b)` whose dual primitive maps
//! the triangular lattice onto a T-graph: black faces collapse to segments,
//! white faces map to scaled copies of the triangle.
//!
//! Everything is computed in log-polar form: `F` and `G` grow geometrically
//! in `(m, n)` but only neighbour products (always of bounded modulus) are
//! ever materialized.

use crate::geom::{self, C};
use crate::hexlattice::HexCoord;
use crate::tgraph::{DegenerateInfo, SegId, TGraph, TGraphError, VertexKind};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlanarError {
    #[error("triangle is flat: A, B, C are collinear")]
    FlatTriangle,
    #[error("lambda must have unit modulus, got |lambda| = {0}")]
    BadLambda(f64),
    #[error("T-graph assembly failed: {0}")]
    Assembly(#[from] TGraphError),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PlanarParams {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub lambda: Complex64,
}

impl PlanarParams {
    pub fn new(a: C, b: C, c: C, lambda: C) -> Result<Self, PlanarError> {
        let orient = geom::cross(b - a, c - a);
        if orient.abs() < 1e-12 * (b - a).norm() * (c - a).norm() {
            return Err(PlanarError::FlatTriangle);
        }
        if (lambda.norm() - 1.0).abs() > 1e-9 {
            return Err(PlanarError::BadLambda(lambda.norm()));
        }
        // positive order is part of the contract
        let (a, b, c) = if orient > 0.0 { (a, b, c) } else { (a, c, b) };
        Ok(PlanarParams { a, b, c, lambda: lambda / lambda.norm() })
    }

    pub fn alpha(&self) -> C {
        (self.a - self.c) / (self.c - self.b)
    }

    pub fn beta(&self) -> C {
        (self.b - self.a) / (self.a - self.c)
    }

    /// `log|F|` and `arg F` at white coordinates, the argument unwrapped
    /// linearly (no modular reduction).
    pub fn log_f(&self, m: i64, n: i64) -> (f64, f64) {
        let (la, aa) = (self.alpha().norm().ln(), self.alpha().arg());
        let (lb, ab) = (self.beta().norm().ln(), self.beta().arg());
        (m as f64 * la + n as f64 * lb, m as f64 * aa + n as f64 * ab)
    }

    /// Closed-form `F` at a white vertex (may overflow far from the origin).
    pub fn eval_f(&self, w: HexCoord) -> C {
        let (lm, arg) = self.log_f(w.m, w.n);
        C::from_polar(lm.exp(), arg)
    }

    /// Closed-form `G` at a black vertex.
    pub fn eval_g(&self, b: HexCoord) -> C {
        let (lm, arg) = self.log_f(b.m, b.n);
        let cb = self.c - self.b;
        C::from_polar(cb.norm() / lm.exp(), cb.arg() - arg)
    }

    /// `F(w) G(b)` for an adjacent pair: always one of `C-B`, `A-C`, `B-A`.
    pub fn pair_product(&self, w: HexCoord, b: HexCoord) -> Option<C> {
        match (w.m - b.m, w.n - b.n) {
            (0, 0) => Some(self.c - self.b),
            (1, 0) => Some(self.a - self.c),
            (1, 1) => Some(self.b - self.a),
            _ => None,
        }
    }

    /// `Omega(b w) = 2 Re(lambda F(w)) conj(lambda) G(b)`, evaluated in the
    /// overflow-free product form.
    pub fn omega(&self, b: HexCoord, w: HexCoord) -> C {
        let prod = self.pair_product(w, b).expect("adjacent pair");
        let (_, theta_f) = self.log_f(w.m, w.n);
        // Re(lambda F) G = cos(arg lambda + arg F) |F| G
        //               = cos(arg lambda + arg F) e^{-i arg F} F(w) G(b)
        let phase = self.lambda.arg() + theta_f;
        2.0 * phase.cos() * self.lambda.conj() * C::from_polar(1.0, -theta_f) * prod
    }
}

/// The image `T(v(m,n))`, summed along the canonical path through `v(k, 0)`.
pub fn t_map(p: &PlanarParams, m: i64, n: i64) -> C {
    let mut z = C::new(0.0, 0.0);
    let sgn_m = if m >= 0 { 1 } else { -1 };
    let mut k = 0i64;
    while k != m {
        let (from, to) = if sgn_m > 0 { (k, k + 1) } else { (k, k - 1) };
        // v(from,0) -> v(from±1,0): crossing Omega(b(min(from,to), -1), w(max)+...)
        let step = if to > from {
            p.omega(HexCoord::black(from, -1), HexCoord::white(from + 1, 0))
        } else {
            -p.omega(HexCoord::black(to, -1), HexCoord::white(to + 1, 0))
        };
        z += step;
        k = to;
    }
    let sgn_n = if n >= 0 { 1 } else { -1 };
    let mut j = 0i64;
    while j != n {
        let step = if sgn_n > 0 {
            p.omega(HexCoord::black(m, j), HexCoord::white(m, j))
        } else {
            -p.omega(HexCoord::black(m, j - 1), HexCoord::white(m, j - 1))
        };
        z += step;
        j += sgn_n;
    }
    z
}

/// A materialized whole-plane patch.
pub struct PlanarPatch {
    pub params: PlanarParams,
    pub graph: TGraph,
    /// Hex labels: black coordinate per segment.
    pub black_of_segment: Vec<HexCoord>,
    /// For each edge, the crossed hex edge `(w, b)` (all planar edges are
    /// long edges).
    pub hex_edge_of_edge: Vec<Option<(HexCoord, HexCoord)>>,
    /// Dual coordinate and image of every window vertex.
    pub dual_positions: HashMap<(i64, i64), C>,
    /// Whites whose image collapsed below the degeneracy floor.
    pub degenerate_whites: Vec<HexCoord>,
    /// Interior dual vertex ids by coordinate.
    pub vertex_of_dual: HashMap<(i64, i64), usize>,
}

/// Builds the T-graph on the window `|m| <= half_m, |n| <= half_n` of dual
/// coordinates. Whites whose image diameter falls below
/// `eps_degen * |Delta|` are collapsed and flagged; the walk metadata for
/// them is attached to the graph.
pub fn build_whole_plane_patch(
    p: &PlanarParams,
    half_m: i64,
    half_n: i64,
    eps_degen: f64,
) -> Result<PlanarPatch, PlanarError> {
    let tri_scale = (p.b - p.a).norm().max((p.c - p.b).norm()).max((p.a - p.c).norm());
    let floor = eps_degen * tri_scale;

    // dual images over the window (row-by-row accumulation)
    let mut dual: HashMap<(i64, i64), C> = HashMap::new();
    for m in -half_m..=half_m {
        let mut z = t_map(p, m, -half_n);
        dual.insert((m, -half_n), z);
        for n in -half_n..=half_n - 1 {
            z += p.omega(HexCoord::black(m, n), HexCoord::white(m, n));
            dual.insert((m, n + 1), z);
        }
    }

    // collapse degenerate whites: snap their three duals to the mean
    let mut degenerate_whites = Vec::new();
    let mut snapped = dual.clone();
    for m in -half_m..=half_m {
        for n in -half_n..=half_n {
            let w = HexCoord::white(m, n);
            let duals = crate::hexlattice::duals_of_white(w);
            let Some(pts): Option<Vec<C>> = duals
                .iter()
                .map(|d| dual.get(&(d.m, d.n)).copied())
                .collect()
            else {
                continue;
            };
            let diam = (pts[0] - pts[1])
                .norm()
                .max((pts[1] - pts[2]).norm())
                .max((pts[0] - pts[2]).norm());
            if diam < floor {
                degenerate_whites.push(w);
                let mean = (pts[0] + pts[1] + pts[2]) / 3.0;
                for d in duals {
                    snapped.insert((d.m, d.n), mean);
                }
            }
        }
    }
    let dual = snapped;

    // blacks with all three duals in the window become segments
    let mut segments: Vec<(C, C)> = Vec::new();
    let mut black_of_segment: Vec<HexCoord> = Vec::new();
    // per segment: the dual coords sorted along the chord
    let mut chord_duals: Vec<[(i64, i64); 3]> = Vec::new();
    for m in -half_m..=half_m {
        for n in -half_n..=half_n {
            let b = HexCoord::black(m, n);
            let duals_b = crate::hexlattice::duals_of_black(b);
            let Some(pts): Option<Vec<C>> = duals_b
                .iter()
                .map(|d| dual.get(&(d.m, d.n)).copied())
                .collect()
            else {
                continue;
            };
            let u = p.eval_g_direction(b);
            let mut order: Vec<usize> = vec![0, 1, 2];
            order.sort_by(|&i, &j| {
                let ti = geom::dot(pts[i], u);
                let tj = geom::dot(pts[j], u);
                ti.partial_cmp(&tj).unwrap()
            });
            let (lo, mid, hi) = (order[0], order[1], order[2]);
            if (pts[hi] - pts[lo]).norm() < floor {
                continue; // fully collapsed black (flat lambda artifact)
            }
            segments.push((pts[lo], pts[hi]));
            black_of_segment.push(b);
            chord_duals.push([
                (duals_b[lo].m, duals_b[lo].n),
                (duals_b[mid].m, duals_b[mid].n),
                (duals_b[hi].m, duals_b[hi].n),
            ]);
        }
    }

    // duals hosted by an included black are T-junctions; a chord endpoint
    // whose host is missing dangles and must sit on the outer face, so prune
    // chords whose dangling endpoint ends up enclosed by the ragged rim
    let degen_set: std::collections::HashSet<(i64, i64)> = degenerate_whites
        .iter()
        .flat_map(|w| crate::hexlattice::duals_of_white(*w).map(|d| (d.m, d.n)))
        .collect();
    let mut alive = vec![true; segments.len()];
    let host_of_dual = |m: i64, n: i64, alive: &[bool], seg_of_black: &HashMap<(i64, i64), usize>| -> Option<usize> {
        for bc in [(m, n), (m - 1, n - 1), (m, n - 1)] {
            let Some(&s) = seg_of_black.get(&bc) else { continue };
            if !alive[s] {
                continue;
            }
            let b = HexCoord::black(bc.0, bc.1);
            let duals_b = crate::hexlattice::duals_of_black(b);
            let pts: Vec<C> = duals_b.iter().map(|d| dual[&(d.m, d.n)]).collect();
            let u = p.eval_g_direction(b);
            let t: Vec<f64> = pts.iter().map(|&q| geom::dot(q, u)).collect();
            let k = duals_b.iter().position(|d| d.m == m && d.n == n).unwrap();
            let others: Vec<usize> = (0..3).filter(|&i| i != k).collect();
            let (t0, t1) = (t[others[0]], t[others[1]]);
            if (t[k] > t0.min(t1)) && (t[k] < t0.max(t1)) {
                return Some(s);
            }
        }
        None
    };
    let mut seg_index: HashMap<(i64, i64), usize> = HashMap::new();
    for (s, b) in black_of_segment.iter().enumerate() {
        seg_index.insert((b.m, b.n), s);
    }
    let eps = (1e-9 * tri_scale * (half_m + half_n) as f64).max(1e-12);
    // prune until every dangling chord endpoint sits on the outer face
    let mut graph = loop {
        let mut boundary_points: Vec<C> = Vec::new();
        let mut seen_bd: std::collections::HashSet<(i64, i64)> = std::collections::HashSet::new();
        let keep: Vec<usize> = (0..segments.len()).filter(|&s| alive[s]).collect();
        if keep.is_empty() {
            return Err(PlanarError::Assembly(TGraphError::Empty));
        }
        for &s in &keep {
            for &(m, n) in &[chord_duals[s][0], chord_duals[s][2]] {
                if host_of_dual(m, n, &alive, &seg_index).is_none()
                    && !degen_set.contains(&(m, n))
                    && seen_bd.insert((m, n))
                {
                    boundary_points.push(dual[&(m, n)]);
                }
            }
        }
        let segs: Vec<(C, C)> = keep.iter().map(|&s| segments[s]).collect();
        let g = TGraph::build(segs, boundary_points.clone(), Some(eps))?;
        let on_outer = crate::tgraph::outer_face_vertices(&g);
        let mut removed = false;
        for &x in &boundary_points {
            let vid = g.vertices.iter().position(|&p| (p - x).norm() <= g.eps);
            let ok = vid.is_some_and(|v| on_outer.contains(&v));
            if !ok {
                // drop the chords ending at this enclosed dangler
                for &s in &keep {
                    let (sa, sb) = segments[s];
                    if (sa - x).norm() <= g.eps || (sb - x).norm() <= g.eps {
                        alive[s] = false;
                        removed = true;
                    }
                }
            }
        }
        if !removed {
            break g;
        }
    };
    let keep: Vec<usize> = (0..segments.len()).filter(|&s| alive[s]).collect();
    let black_of_segment: Vec<HexCoord> = keep.iter().map(|&s| black_of_segment[s]).collect();

    // locate graph vertex ids of the duals
    let mut vertex_of_dual: HashMap<(i64, i64), usize> = HashMap::new();
    for (&(m, n), &pos) in &dual {
        for (vid, &vp) in graph.vertices.iter().enumerate() {
            if (vp - pos).norm() <= graph.eps {
                vertex_of_dual.insert((m, n), vid);
                break;
            }
        }
    }

    // degenerate walk metadata: collapsed point jumps along the three
    // adjacent chords with rates l_i / (L_i (l1+l2+l3))
    let mut seg_of_black: HashMap<(i64, i64), SegId> = HashMap::new();
    for (s, b) in black_of_segment.iter().enumerate() {
        seg_of_black.insert((b.m, b.n), s);
    }
    let mut deg_infos = Vec::new();
    for w in &degenerate_whites {
        let vd = crate::hexlattice::duals_of_white(*w)[0];
        let Some(&vid) = vertex_of_dual.get(&(vd.m, vd.n)) else {
            continue;
        };
        if !matches!(graph.vertex_kind[vid], VertexKind::Degenerate) {
            continue;
        }
        let blacks = crate::hexlattice::black_neighbors(*w);
        let side = [
            (p.c - p.b).norm(),
            (p.a - p.c).norm(),
            (p.b - p.a).norm(),
        ];
        let mut transitions = Vec::new();
        let total: f64 = side.iter().sum();
        for (i, b) in blacks.iter().enumerate() {
            let Some(&s) = seg_of_black.get(&(b.m, b.n)) else {
                continue;
            };
            // neighbour of the collapsed point along this chord
            let list = &graph.seg_vertices[s];
            let Some(k) = list.iter().position(|&u| u == vid) else {
                continue;
            };
            let target = if k == 0 { list[1] } else { list[k - 1] };
            let len = (graph.vertices[target] - graph.vertices[vid]).norm();
            transitions.push((target, side[i] / (len * total)));
        }
        if transitions.len() == 3 {
            deg_infos.push(DegenerateInfo { vertex: vid, transitions });
        }
    }
    graph.degenerate = deg_infos;

    // hex edge labels: every edge between two chord duals crosses the hex
    // edge between its black and the white determined by the dual pair
    let mut hex_edge_of_edge: Vec<Option<(HexCoord, HexCoord)>> = vec![None; graph.edges.len()];
    for (e, edge) in graph.edges.iter().enumerate() {
        let b = black_of_segment[edge.seg];
        let coords = [edge.a, edge.b].map(|v| {
            vertex_of_dual
                .iter()
                .find(|&(_, &vid)| vid == v)
                .map(|(&c, _)| c)
        });
        if let [Some(c1), Some(c2)] = coords {
            if let Some(w) = crossed_white(b, c1, c2) {
                hex_edge_of_edge[e] = Some((w, b));
            }
        }
    }

    Ok(PlanarPatch {
        params: *p,
        graph,
        black_of_segment,
        hex_edge_of_edge,
        dual_positions: dual,
        degenerate_whites,
        vertex_of_dual,
    })
}

/// The white of the hex edge crossed by the dual edge `(v1, v2)` of black
/// `b`, or `None` if the duals are not lattice-adjacent around `b`.
fn crossed_white(b: HexCoord, v1: (i64, i64), v2: (i64, i64)) -> Option<HexCoord> {
    let (m, n) = (b.m, b.n);
    let pair = |x: (i64, i64), y: (i64, i64)| (v1 == x && v2 == y) || (v1 == y && v2 == x);
    if pair((m, n), (m, n + 1)) {
        Some(HexCoord::white(m, n))
    } else if pair((m, n + 1), (m + 1, n + 1)) {
        Some(HexCoord::white(m + 1, n + 1))
    } else if pair((m, n), (m + 1, n + 1)) {
        Some(HexCoord::white(m + 1, n))
    } else {
        None
    }
}

impl PlanarParams {
    /// Unit direction of `conj(lambda) G(b)`: the chord direction of black `b`.
    pub fn eval_g_direction(&self, b: HexCoord) -> C {
        let (_, theta_f) = self.log_f(b.m, b.n);
        let cb = self.c - self.b;
        C::from_polar(1.0, cb.arg() - theta_f - self.lambda.arg())
    }
}

/// Geometry diagnostics of a planar patch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeometryReport {
    pub max_drift: f64,
    pub vertical_bound: f64,
    pub overlap_area: f64,
    pub total_white_area: f64,
    pub n_interior_of_one: usize,
    pub n_degenerate: usize,
    pub n_unclassified: usize,
}

pub fn geometry_report(patch: &PlanarPatch, interior_margin: i64) -> GeometryReport {
    let p = &patch.params;
    let mut max_drift: f64 = 0.0;
    let mut vertical_bound: f64 = 0.0;
    let mut bounds = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
    for &(m, n) in patch.dual_positions.keys() {
        bounds = (bounds.0.min(m), bounds.1.max(m), bounds.2.min(n), bounds.3.max(n));
    }
    for (&(m, n), &z) in &patch.dual_positions {
        let drift = (z - ((p.b - p.a) * m as f64 + (p.c - p.b) * n as f64)).norm();
        max_drift = max_drift.max(drift);
        if m == 0 {
            vertical_bound = vertical_bound.max(drift);
        }
    }
    // white triangles away from the rim: overlap and orientation audit
    let (mlo, mhi, nlo, nhi) = bounds;
    let mut tris: Vec<[C; 3]> = Vec::new();
    for m in mlo + interior_margin..=mhi - interior_margin {
        for n in nlo + interior_margin..=nhi - interior_margin {
            let duals = crate::hexlattice::duals_of_white(HexCoord::white(m, n));
            let pts: Option<Vec<C>> = duals
                .iter()
                .map(|d| patch.dual_positions.get(&(d.m, d.n)).copied())
                .collect();
            if let Some(pts) = pts {
                tris.push([pts[0], pts[1], pts[2]]);
            }
        }
    }
    let mut total_white_area = 0.0;
    for t in &tris {
        total_white_area += geom::polygon_area(&t[..]).abs();
    }
    let mut overlap_area = 0.0;
    for i in 0..tris.len() {
        for j in i + 1..tris.len() {
            overlap_area += convex_overlap_area(&tris[i], &tris[j]);
        }
    }
    // local geometry classification of interior duals
    let mut n_one = 0;
    let mut n_deg = 0;
    let mut n_bad = 0;
    for m in mlo + interior_margin..=mhi - interior_margin {
        for n in nlo + interior_margin..=nhi - interior_margin {
            let Some(&vid) = patch.vertex_of_dual.get(&(m, n)) else {
                n_bad += 1;
                continue;
            };
            match patch.graph.vertex_kind[vid] {
                VertexKind::Interior { .. } => n_one += 1,
                VertexKind::Degenerate => n_deg += 1,
                VertexKind::Boundary => n_bad += 1,
            }
        }
    }
    GeometryReport {
        max_drift,
        vertical_bound,
        overlap_area,
        total_white_area,
        n_interior_of_one: n_one,
        n_degenerate: n_deg,
        n_unclassified: n_bad,
    }
}

/// Area of the intersection of two triangles (Sutherland–Hodgman).
fn convex_overlap_area(a: &[C; 3], b: &[C; 3]) -> f64 {
    let orient = |poly: &[C]| {
        if geom::polygon_area(poly) >= 0.0 {
            poly.to_vec()
        } else {
            let mut p = poly.to_vec();
            p.reverse();
            p
        }
    };
    let mut subject = orient(&a[..]);
    let clip = orient(&b[..]);
    for i in 0..clip.len() {
        if subject.is_empty() {
            return 0.0;
        }
        let p1 = clip[i];
        let p2 = clip[(i + 1) % clip.len()];
        let inside = |q: C| geom::cross(p2 - p1, q - p1) >= -1e-15;
        let mut next = Vec::new();
        for k in 0..subject.len() {
            let cur = subject[k];
            let prev = subject[(k + subject.len() - 1) % subject.len()];
            let cur_in = inside(cur);
            let prev_in = inside(prev);
            if cur_in {
                if !prev_in {
                    if let Some(x) = line_intersect(prev, cur, p1, p2) {
                        next.push(x);
                    }
                }
                next.push(cur);
            } else if prev_in {
                if let Some(x) = line_intersect(prev, cur, p1, p2) {
                    next.push(x);
                }
            }
        }
        subject = next;
    }
    geom::polygon_area(&subject).abs()
}

fn line_intersect(a: C, b: C, p: C, q: C) -> Option<C> {
    let d1 = b - a;
    let d2 = q - p;
    let denom = geom::cross(d1, d2);
    if denom.abs() < 1e-300 {
        return None;
    }
    let t = geom::cross(p - a, d2) / denom;
    Some(a + d1 * t)
}

impl PlanarPatch {
    /// Dual anchors per segment for the cut machinery, from the exact dual
    /// images.
    pub fn seg_duals(&self) -> Vec<crate::shape::psi::SegDuals> {
        self.black_of_segment
            .iter()
            .map(|b| {
                let ds = crate::hexlattice::duals_of_black(*b);
                let pts: Vec<(C, (i64, i64))> = ds
                    .iter()
                    .map(|d| (self.dual_positions[&(d.m, d.n)], (d.m, d.n)))
                    .collect();
                let d01 = (pts[0].0 - pts[1].0).norm();
                let d12 = (pts[1].0 - pts[2].0).norm();
                let d02 = (pts[0].0 - pts[2].0).norm();
                let (lo, hi, mid) = if d01 >= d12 && d01 >= d02 {
                    (0, 1, 2)
                } else if d12 >= d01 && d12 >= d02 {
                    (1, 2, 0)
                } else {
                    (0, 2, 1)
                };
                crate::shape::psi::SegDuals {
                    anchors: [pts[lo], pts[hi], pts[mid]],
                    span: (pts[lo].1, pts[hi].1),
                }
            })
            .collect()
    }

    pub fn cut_input(&self) -> crate::shape::cut::CutInput<'_> {
        crate::shape::cut::CutInput::new(&self.graph, &self.black_of_segment, self.seg_duals())
    }
}

/// Equilateral reference triangle.
pub fn equilateral() -> (C, C, C) {
    (
        C::new(0.0, 0.0),
        C::new(1.0, 0.0),
        C::new(0.5, 3f64.sqrt() / 2.0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> PlanarParams {
        let (a, b, c) = equilateral();
        PlanarParams::new(a, b, c, C::from_polar(1.0, 0.37)).unwrap()
    }

    #[test]
    fn fg_closed_form_examples() {
        let p = params();
        let f00 = p.eval_f(HexCoord::white(0, 0));
        assert_relative_eq!(f00.re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(f00.im, 0.0, epsilon = 1e-14);
        let g00 = p.eval_g(HexCoord::black(0, 0));
        let cb = p.c - p.b;
        assert_relative_eq!(g00.re, cb.re, epsilon = 1e-13);
        assert_relative_eq!(g00.im, cb.im, epsilon = 1e-13);
        let f10 = p.eval_f(HexCoord::white(1, 0));
        let alpha = p.alpha();
        assert_relative_eq!(f10.re, alpha.re, epsilon = 1e-13);
        assert_relative_eq!(f10.im, alpha.im, epsilon = 1e-13);
    }

    #[test]
    fn fg_product_modulus_constant() {
        let p = params();
        for (m, n) in [(0, 0), (5, -3), (-7, 2), (10, 10)] {
            let f = p.eval_f(HexCoord::white(m, n));
            let g = p.eval_g(HexCoord::black(m, n));
            assert_relative_eq!((f * g).norm(), (p.c - p.b).norm(), epsilon = 1e-10);
        }
    }

    #[test]
    fn kernel_identity_omega_closed() {
        // F annihilates the adjacency around every black: the flow is closed
        let p = params();
        for (m, n) in [(0, 0), (3, -2), (-4, 5)] {
            let b = HexCoord::black(m, n);
            let sum: C = crate::hexlattice::white_neighbors(b)
                .into_iter()
                .map(|w| p.eval_f(w))
                .sum();
            let scale = p.eval_f(HexCoord::white(m, n)).norm();
            assert!(sum.norm() < 1e-12 * scale.max(1.0), "defect {}", sum.norm());
        }
    }

    #[test]
    fn flat_triangle_rejected() {
        let r = PlanarParams::new(
            C::new(0.0, 0.0),
            C::new(1.0, 0.0),
            C::new(2.0, 0.0),
            C::new(1.0, 0.0),
        );
        assert!(matches!(r, Err(PlanarError::FlatTriangle)));
    }

    #[test]
    fn t_map_drift_and_vertical_boundedness() {
        let p = params();
        let lin = |m: i64, n: i64| (p.b - p.a) * m as f64 + (p.c - p.b) * n as f64;
        let mut max_drift: f64 = 0.0;
        for m in -12..=12 {
            for n in -12..=12 {
                let d = (t_map(&p, m, n) - lin(m, n)).norm();
                max_drift = max_drift.max(d);
            }
        }
        // bounded by a couple of triangle diameters, uniformly in the window
        assert!(max_drift < 4.0, "drift {max_drift}");
        // vertical line: compare n = 12 and n = 200: bound must not grow
        let d1 = (t_map(&p, 0, 12) - lin(0, 12)).norm();
        let d2 = (t_map(&p, 0, 200) - lin(0, 200)).norm();
        assert!(d2 < d1 + 4.0, "d1={d1} d2={d2}");
    }

    #[test]
    fn t_map_path_independence() {
        // closing the flow around dual faces: recompute T(v) along a
        // different path and compare
        let p = params();
        let direct = t_map(&p, 5, 7);
        // path: first n, then m
        let mut z = C::new(0.0, 0.0);
        for j in 0..7 {
            z += p.omega(HexCoord::black(0, j), HexCoord::white(0, j));
        }
        for k in 0..5 {
            z += p.omega(HexCoord::black(k, 7 - 1), HexCoord::white(k + 1, 7));
        }
        assert_relative_eq!(direct.re, z.re, epsilon = 1e-9);
        assert_relative_eq!(direct.im, z.im, epsilon = 1e-9);
    }

    #[test]
    fn patch_is_valid_tgraph() {
        let p = params();
        let patch = build_whole_plane_patch(&p, 6, 6, 1e-8).unwrap();
        let report = crate::tgraph::validate_tgraph(
            &patch.graph.segments,
            &patch.graph.boundary_points,
            patch.graph.eps,
        );
        assert!(report.is_valid(), "{report:?}");
        assert_eq!(patch.graph.euler_characteristic(), 2);
        assert!(patch.degenerate_whites.is_empty());
    }

    #[test]
    fn geometry_report_clean() {
        let p = params();
        let patch = build_whole_plane_patch(&p, 8, 8, 1e-8).unwrap();
        let rep = geometry_report(&patch, 3);
        assert!(rep.overlap_area <= 1e-9 * rep.total_white_area, "{rep:?}");
        assert_eq!(rep.n_unclassified, 0, "{rep:?}");
        assert!(rep.n_interior_of_one > 0);
        assert!(rep.max_drift < 4.0);
    }

    #[test]
    fn walk_identities_on_patch() {
        let p = params();
        let patch = build_whole_plane_patch(&p, 6, 6, 1e-8).unwrap();
        for v in crate::walk::interior_vertices(&patch.graph) {
            let (drift, speed) = crate::walk::local_identities(&patch.graph, v).unwrap();
            assert!(drift < 1e-12);
            assert!(speed < 1e-12);
        }
    }

    #[test]
    fn mref_divergence_one_on_patch() {
        let p = params();
        let patch = build_whole_plane_patch(&p, 7, 7, 1e-8).unwrap();
        let flow = crate::height::reference_flow(&patch.graph);
        // interior segments: divergence exactly 1
        let interior = crate::height::interior_segments(&patch.graph);
        assert!(!interior.is_empty());
        for s in interior {
            let div = crate::height::divergence_black(&flow, s);
            assert!((div - 1.0).abs() < 1e-9, "segment {s}: div {div}");
        }
        // whites: every bounded triangular face away from the rim
        for f in patch.graph.bounded_faces() {
            let poly = &patch.graph.faces[f].polygon;
            if poly.len() == 3 {
                // triangles whose every side borders another bounded face
                let all_interior = patch.graph.faces[f].halfedges.iter().all(|&(e, _)| {
                    patch.graph.face_of_edge[e]
                        .iter()
                        .all(|&ff| ff != patch.graph.outer_face)
                });
                if all_interior {
                    let div = crate::height::divergence_white(&flow, f);
                    assert!((div - 1.0).abs() < 1e-9, "face {f}: div {div}");
                }
            }
        }
    }

    #[test]
    fn degenerate_lambda_is_flagged_and_walkable() {
        // choose lambda orthogonal to F(w(0,0)) = 1: Re(lambda) = 0 collapses
        // the white at the origin
        let (a, b, c) = equilateral();
        let p = PlanarParams::new(a, b, c, C::new(0.0, 1.0)).unwrap();
        let patch = build_whole_plane_patch(&p, 5, 5, 1e-8).unwrap();
        assert!(
            !patch.degenerate_whites.is_empty(),
            "imaginary lambda must collapse some whites"
        );
        assert!(!patch.graph.degenerate.is_empty());
        // degenerate transitions form a martingale too
        for info in &patch.graph.degenerate {
            let p0 = patch.graph.vertices[info.vertex];
            let mut drift = C::new(0.0, 0.0);
            for &(t, r) in &info.transitions {
                drift += (patch.graph.vertices[t] - p0) * r;
            }
            assert!(drift.norm() < 1e-9, "degenerate drift {}", drift.norm());
        }
    }
}
