//! Height functions, reference flows, and winding.
//!
//! Heights live on faces of the hexagonal lattice and are stored in thirds:
//! crossing a primal edge `(w, b)` with the white on the left changes `3h` by
//! `3·1_matched - 1`. Around any vertex the increments cancel exactly, so the
//! result is path-independent in integer arithmetic.

use crate::geom::{self, C};
use crate::hexlattice::HexCoord;
use crate::oracle::HexSubgraph;
use crate::tgraph::{FaceId, SegId, TGraph, VertexKind};
use std::collections::{HashMap, HashSet, VecDeque};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HeightError {
    #[error("matching does not cover white {0}")]
    NotPerfect(usize),
    #[error("polyline has a zero-length step at index {0}")]
    ZeroStep(usize),
    #[error("face {0:?} unreachable from the anchor")]
    Unreachable(HexCoord),
}

/// The height increment in thirds when stepping from face `v` to the adjacent
/// face `v'`, given the matched-indicator of the crossed edge.
/// Steps: `d = (dm, dn)` one of the six unit steps of the dual lattice.
fn step_increment(matched: bool, white_on_left: bool) -> i64 {
    let base = if matched { 2 } else { -1 };
    if white_on_left {
        base
    } else {
        -base
    }
}

/// The primal edge crossed by the dual step `v(m,n) -> v(m+dm, n+dn)` and
/// whether the white endpoint lies on the left of the traversal.
/// Returns `((white m,n), (black m,n), white_on_left)`.
pub fn crossed_edge(m: i64, n: i64, dm: i64, dn: i64) -> ((i64, i64), (i64, i64), bool) {
    match (dm, dn) {
        (0, 1) => ((m, n), (m, n), true),
        (0, -1) => ((m, n - 1), (m, n - 1), false),
        (1, 0) => ((m + 1, n), (m, n - 1), true),
        (-1, 0) => ((m, n), (m - 1, n - 1), false),
        (1, 1) => ((m + 1, n), (m, n), false),
        (-1, -1) => ((m, n), (m - 1, n - 1), true),
        _ => panic!("not a dual lattice step: ({dm},{dn})"),
    }
}

/// Heights (in thirds) at `query` faces for a matching on a hex subgraph.
/// `black_of_white[w]` is the matched black index per white index. Anchored
/// to zero at the face nearest the face-set centroid.
pub fn heights_thirds(g: &HexSubgraph, black_of_white: &[usize], query: &[HexCoord]) -> Vec<i64> {
    let field = height_field(g, black_of_white);
    query
        .iter()
        .map(|f| *field.get(&(f.m, f.n)).expect("queried face inside the region"))
        .collect()
}

/// Full height field (in thirds) over all faces reachable through region
/// edges, anchored to zero at the lexicographically least reachable face.
/// The anchor lies on the rim, where the height is determined by the region
/// alone, so sampled fields are comparable across matchings.
pub fn height_field(g: &HexSubgraph, black_of_white: &[usize]) -> HashMap<(i64, i64), i64> {
    let matched: HashSet<(usize, usize)> = black_of_white
        .iter()
        .enumerate()
        .map(|(w, &b)| (w, b))
        .collect();
    let edge_ids = |wm: i64, wn: i64, bm: i64, bn: i64| -> Option<(usize, usize)> {
        match (
            g.white_id(HexCoord::white(wm, wn)),
            g.black_id(HexCoord::black(bm, bn)),
        ) {
            (Some(w), Some(b)) => Some((w, b)),
            _ => None,
        }
    };
    // faces incident to the region
    let mut face_set: HashSet<(i64, i64)> = HashSet::new();
    for w in &g.whites {
        for d in crate::hexlattice::duals_of_white(*w) {
            face_set.insert((d.m, d.n));
        }
    }
    for b in &g.blacks {
        for d in crate::hexlattice::duals_of_black(*b) {
            face_set.insert((d.m, d.n));
        }
    }
    let mut out: HashMap<(i64, i64), i64> = HashMap::new();
    let Some(&anchor) = face_set.iter().min() else {
        return out;
    };
    out.insert(anchor, 0);
    let mut queue = VecDeque::from([anchor]);
    let steps = [(0, 1), (0, -1), (1, 0), (-1, 0), (1, 1), (-1, -1)];
    while let Some((m, n)) = queue.pop_front() {
        let h = out[&(m, n)];
        for (dm, dn) in steps {
            let t = (m + dm, n + dn);
            if !face_set.contains(&t) || out.contains_key(&t) {
                continue;
            }
            let ((wm, wn), (bm, bn), left) = crossed_edge(m, n, dm, dn);
            // only cross edges that exist in the region
            let Some((w, b)) = edge_ids(wm, wn, bm, bn) else {
                continue;
            };
            let inc = step_increment(matched.contains(&(w, b)), left);
            out.insert(t, h + inc);
            queue.push_back(t);
        }
    }
    out
}

/// Total turning angle of a polyline in radians.
pub fn winding(path: &[C]) -> Result<f64, HeightError> {
    for (i, w) in path.windows(2).enumerate() {
        if (w[1] - w[0]).norm() == 0.0 {
            return Err(HeightError::ZeroStep(i));
        }
    }
    Ok(geom::turning_angle(path))
}

/// The angle-defined reference flow on the dimer graph of a T-graph.
///
/// For a segment `S` and bounded face `f` sharing an interval, the value is
/// the sum of `f`'s interior angles at the interval's two endpoints divided
/// by `2 pi`. When both endpoints are interior vertices of `S` itself (two
/// tips of other segments landing on `S`, the short-piece pattern created by
/// the correction), the crossed dual edge runs against the orientation and
/// the pair contributes negatively: subtract 1.
#[derive(Clone, Debug, Default)]
pub struct MrefFlow {
    pub values: HashMap<(SegId, FaceId), f64>,
}

impl MrefFlow {
    pub fn get(&self, s: SegId, f: FaceId) -> f64 {
        self.values.get(&(s, f)).copied().unwrap_or(0.0)
    }
}

pub fn reference_flow(g: &TGraph) -> MrefFlow {
    let mut flow = MrefFlow::default();
    for f in g.bounded_faces() {
        let cycle = &g.faces[f].halfedges;
        let k = cycle.len();
        if k == 0 {
            continue;
        }
        // the vertex and interior angle at the junction between cycle
        // position i and i+1
        let vertex_at = |i: usize| {
            let (e, fwd) = cycle[(i + 1) % k];
            if fwd {
                g.edges[e].a
            } else {
                g.edges[e].b
            }
        };
        let dir = |i: usize| {
            let (e, fwd) = cycle[i];
            let d = g.vertices[g.edges[e].b] - g.vertices[g.edges[e].a];
            if fwd {
                d
            } else {
                -d
            }
        };
        let seg_of = |i: usize| g.edges[cycle[i].0].seg;
        // runs of consecutive halfedges on the same segment
        let mut run_starts = Vec::new();
        for i in 0..k {
            let prev = (i + k - 1) % k;
            if seg_of(prev) != seg_of(i) {
                run_starts.push(i);
            }
        }
        if run_starts.is_empty() {
            // single-segment face boundary cannot happen for bounded faces
            continue;
        }
        for (ri, &start) in run_starts.iter().enumerate() {
            let end_excl = run_starts[(ri + 1) % run_starts.len()];
            let seg = seg_of(start);
            // interval endpoints: vertex before `start` and at run end
            let v_in = vertex_at((start + k - 1) % k);
            let len = (end_excl + k - start - 1) % k + 1;
            let v_out = vertex_at(start + len - 1);
            let a_in = geom::interior_angle_left(dir((start + k - 1) % k), dir(start));
            let a_out =
                geom::interior_angle_left(dir(start + len - 1), dir((start + len) % k));
            let mut value = (a_in + a_out) / (2.0 * std::f64::consts::PI);
            let junction_into = |v: usize| match g.vertex_kind[v] {
                VertexKind::Interior { host } => host == seg,
                _ => false,
            };
            if junction_into(v_in) && junction_into(v_out) {
                value -= 1.0;
            }
            *flow.values.entry((seg, f)).or_insert(0.0) += value;
        }
    }
    flow
}

/// Divergence of the reference flow at a segment (sum over faces).
pub fn divergence_black(flow: &MrefFlow, s: SegId) -> f64 {
    flow.values
        .iter()
        .filter(|&(&(ss, _), _)| ss == s)
        .map(|(_, &v)| v)
        .sum()
}

/// Divergence at a bounded face (sum over segments).
pub fn divergence_white(flow: &MrefFlow, f: FaceId) -> f64 {
    flow.values
        .iter()
        .filter(|&(&(_, ff), _)| ff == f)
        .map(|(_, &v)| v)
        .sum()
}

/// Segments every vertex of which is interior or carries faces only among the
/// bounded ones: the divergence identity applies to these.
pub fn interior_segments(g: &TGraph) -> Vec<SegId> {
    (0..g.segments.len())
        .filter(|&s| {
            g.seg_vertices[s].windows(2).all(|w| {
                // both sides of each edge are bounded faces
                let e = g.vertex_edges[w[0]]
                    .iter()
                    .copied()
                    .find(|&e| {
                        (g.edges[e].a == w[0] && g.edges[e].b == w[1])
                            || (g.edges[e].a == w[1] && g.edges[e].b == w[0])
                    })
                    .unwrap();
                g.face_of_edge[e].iter().all(|&f| f != g.outer_face)
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{enumerate_matchings, hexagon_region};
    use approx::assert_relative_eq;

    #[test]
    fn closed_loop_increment_zero() {
        // around any interior vertex the three increments cancel; this is
        // exercised implicitly by path independence on a two-cell region
        let g = hexagon_region(2, 1, 1);
        let matchings = enumerate_matchings(&g, 100).unwrap();
        for m in &matchings {
            let field = height_field(&g, m);
            // recompute along a different BFS order by translating the map:
            // all increments are consistent iff the field satisfies every
            // adjacent-step relation, not just the BFS-tree ones
            for (&(fm, fn_), &h) in &field {
                for (dm, dn) in [(0, 1), (1, 0), (1, 1)] {
                    if let Some(&h2) = field.get(&(fm + dm, fn_ + dn)) {
                        let ((wm, wn), (bm, bn), left) = crossed_edge(fm, fn_, dm, dn);
                        let matched = match (
                            g.white_id(HexCoord::white(wm, wn)),
                            g.black_id(HexCoord::black(bm, bn)),
                        ) {
                            (Some(w), Some(b)) => m[w] == b,
                            _ => false,
                        };
                        assert_eq!(h2 - h, step_increment(matched, left));
                    }
                }
            }
        }
    }

    #[test]
    fn unit_hexagon_heights_differ_by_one() {
        let g = hexagon_region(1, 1, 1);
        let matchings = enumerate_matchings(&g, 10).unwrap();
        assert_eq!(matchings.len(), 2);
        let f = g.interior_faces();
        let h0 = heights_thirds(&g, &matchings[0], &f)[0];
        let h1 = heights_thirds(&g, &matchings[1], &f)[0];
        // the two tilings of the unit hexagon differ by one added cube:
        // centre heights differ by exactly 1 (3 thirds)
        assert_eq!((h0 - h1).abs(), 3, "h0={h0} h1={h1}");
        let g2 = hexagon_region(2, 1, 1);
        let m2 = enumerate_matchings(&g2, 100).unwrap();
        let faces = g2.interior_faces();
        assert_eq!(faces.len(), 2);
        let mut diffs: HashSet<i64> = HashSet::new();
        for m in &m2 {
            let h = heights_thirds(&g2, m, &faces);
            diffs.insert(h[1] - h[0]);
        }
        // adjacent faces differ by -1 or +2 thirds depending on the crossed
        // edge; both tile families must appear
        assert!(diffs.len() >= 2, "{diffs:?}");
    }

    #[test]
    fn winding_examples() {
        let line = [C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(2.5, 0.0)];
        assert_relative_eq!(winding(&line).unwrap(), 0.0);
        let square = [
            C::new(0.0, 0.0),
            C::new(1.0, 0.0),
            C::new(1.0, 1.0),
            C::new(0.0, 1.0),
            C::new(0.0, 0.0),
            C::new(1.0, 0.0),
        ];
        assert_relative_eq!(
            winding(&square).unwrap(),
            2.0 * std::f64::consts::PI,
            epsilon = 1e-12
        );
        assert!(matches!(
            winding(&[C::new(0.0, 0.0), C::new(0.0, 0.0)]),
            Err(HeightError::ZeroStep(0))
        ));
    }

    #[test]
    fn winding_additive_under_concatenation() {
        let a = [C::new(0.0, 0.0), C::new(1.0, 0.2), C::new(2.0, 0.0)];
        let b = [C::new(2.0, 0.0), C::new(3.0, 0.5), C::new(4.0, 0.1)];
        let joint: Vec<C> = a.iter().chain(b.iter().skip(1)).copied().collect();
        // additivity including the junction turn at the shared point
        let junction = [a[1], a[2], b[1]];
        let total = winding(&a).unwrap() + winding(&b).unwrap()
            + winding(&junction).unwrap()
            - geom::turning_angle(&[a[1], a[2], b[1]])
            + geom::turning_angle(&[a[1], a[2], b[1]]);
        assert_relative_eq!(winding(&joint).unwrap(), total, epsilon = 1e-12);
    }

    #[test]
    fn symmetric_crossing_flow_is_half() {
        // pinwheel frame: each segment overshoots at its start and its end
        // rests inside the next, all corners at right angles, so every face
        // corner contributes pi/2 and each (segment, face) pair gets 1/2
        let segs = vec![
            (C::new(-0.2, 0.0), C::new(1.0, 0.0)),
            (C::new(1.0, -0.2), C::new(1.0, 1.0)),
            (C::new(1.2, 1.0), C::new(0.0, 1.0)),
            (C::new(0.0, 1.2), C::new(0.0, 0.0)),
        ];
        let bd = vec![C::new(-0.2, 0.0), C::new(1.0, -0.2), C::new(1.2, 1.0), C::new(0.0, 1.2)];
        let g = TGraph::build(segs, bd, None).unwrap();
        let report = crate::tgraph::validate_tgraph(&g.segments, &g.boundary_points, 1e-9);
        assert!(report.is_valid(), "{report:?}");
        let flow = reference_flow(&g);
        let f = g.bounded_faces().next().unwrap();
        // the square face: every segment shares two right-angle corners
        for s in 0..4 {
            assert_relative_eq!(flow.get(s, f), 0.5, epsilon = 1e-12);
        }
        // divergence at the face: four sides, each 1/2... the inner square
        // face of a frame has divergence 2 by angle count; the identity
        // div = 1 belongs to triangular faces of proper dimer T-graphs and
        // is checked on the planar family instead.
        assert_relative_eq!(divergence_white(&flow, f), 2.0, epsilon = 1e-12);
    }
}
