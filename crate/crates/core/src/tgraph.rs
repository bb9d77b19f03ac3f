//! The T-graph data model.
//!
//! A T-graph is a finite collection of disjoint open segments plus isolated
//! boundary points whose closure is connected, every segment endpoint resting
//! either inside another segment or on a boundary point. This module derives
//! the vertex/edge/face structure of such a collection, validates the defining
//! properties, and builds the associated weighted dimer graph (segments are
//! black vertices, faces are white vertices, weights are shared lengths).

use crate::geom::{self, C};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

pub type SegId = usize;
pub type VertexId = usize;
pub type EdgeId = usize;
pub type FaceId = usize;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum VertexKind {
    /// Lies in the interior of exactly one open segment.
    Interior { host: SegId },
    /// A declared boundary point: an absorbing state for the walk.
    Boundary,
    /// Common endpoint of several segments with no host (collapsed face).
    Degenerate,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Edge {
    pub seg: SegId,
    /// Endpoint ids ordered by parameter along the segment.
    pub a: VertexId,
    pub b: VertexId,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Face {
    /// Directed boundary cycle; `(edge, true)` means traversal `a -> b`.
    pub halfedges: Vec<(EdgeId, bool)>,
    pub polygon: Vec<C>,
    pub area: f64,
}

/// Transition data for the walk at a degenerate vertex, precomputed from the
/// reference triangle of the collapsed face (there is no way to recover it
/// from the bare geometry).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DegenerateInfo {
    pub vertex: VertexId,
    /// `(target vertex, rate)` triples.
    pub transitions: Vec<(VertexId, f64)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TGraph {
    pub segments: Vec<(C, C)>,
    pub boundary_points: Vec<C>,
    pub vertices: Vec<C>,
    pub vertex_kind: Vec<VertexKind>,
    /// Vertices on each segment, ordered by parameter, endpoints included.
    pub seg_vertices: Vec<Vec<VertexId>>,
    pub edges: Vec<Edge>,
    /// For each vertex, incident edge ids.
    pub vertex_edges: Vec<Vec<EdgeId>>,
    pub faces: Vec<Face>,
    pub outer_face: FaceId,
    /// `face_of_edge[e] = [left of a->b, left of b->a]`.
    pub face_of_edge: Vec<[FaceId; 2]>,
    pub degenerate: Vec<DegenerateInfo>,
    /// Geometric tolerance used to build the arrangement.
    pub eps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    NotDisjoint(SegId, SegId),
    CollinearOverlap(SegId, SegId),
    DanglingEndpoint { seg: SegId, end: u8 },
    DisconnectedClosure,
    BoundaryInsideSegment(usize),
    BoundaryNotOnOuterFace(usize),
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Degenerate vertices are reported separately; they are legal for
    /// whole-plane graphs but need walk metadata.
    pub degenerate_vertices: usize,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Error)]
pub enum TGraphError {
    #[error("degenerate geometry: segments {0} and {1} overlap collinearly")]
    DegenerateGeometry(SegId, SegId),
    #[error("invalid T-graph: {0:?}")]
    Invalid(Violation),
    #[error("empty input")]
    Empty,
}

/// Diameter of the input, used to scale the default tolerance.
fn diameter(segments: &[(C, C)]) -> f64 {
    let mut lo = C::new(f64::INFINITY, f64::INFINITY);
    let mut hi = C::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &(a, b) in segments {
        lo.re = lo.re.min(a.re.min(b.re));
        lo.im = lo.im.min(a.im.min(b.im));
        hi.re = hi.re.max(a.re.max(b.re));
        hi.im = hi.im.max(a.im.max(b.im));
    }
    ((hi.re - lo.re).powi(2) + (hi.im - lo.im).powi(2)).sqrt()
}

pub fn default_eps(segments: &[(C, C)]) -> f64 {
    1e-9 * diameter(segments).max(1e-30)
}

/// Checks the three defining properties within tolerance `eps`.
/// An empty report means the input is a proper T-graph.
fn grid_cell(segments: &[(C, C)]) -> f64 {
    let diam = diameter(segments).max(1e-12);
    (diam / (segments.len() as f64).sqrt().max(1.0)).clamp(1e-6 * diam, diam)
}

pub fn validate_tgraph(segments: &[(C, C)], boundary_points: &[C], eps: f64) -> ValidationReport {
    let mut report = ValidationReport::default();
    if segments.is_empty() {
        report.violations.push(Violation::DisconnectedClosure);
        return report;
    }
    let grid = geom::SegmentGrid::build(segments, grid_cell(segments));

    // pairwise disjointness of the open segments
    for (i, &(a, b)) in segments.iter().enumerate() {
        for j in grid.query(a, b, eps) {
            if j <= i {
                continue;
            }
            let (c, d) = segments[j];
            let d1 = b - a;
            let d2 = d - c;
            let parallel = geom::cross(d1, d2).abs() < 1e-12 * d1.norm() * d2.norm();
            if geom::open_segments_intersect(a, b, c, d, eps) {
                report.violations.push(if parallel {
                    Violation::CollinearOverlap(i, j)
                } else {
                    Violation::NotDisjoint(i, j)
                });
            }
        }
    }

    // boundary points are disjoint from the open segments
    for (i, &x) in boundary_points.iter().enumerate() {
        let hosts = grid.query(x, x, eps);
        if hosts.iter().any(|&j| {
            let (a, b) = segments[j];
            geom::strictly_inside_segment(x, a, b, eps)
        }) {
            report.violations.push(Violation::BoundaryInsideSegment(i));
        }
    }

    // endpoint support: inside another segment, on a boundary point, or
    // shared by enough segments to form a degenerate vertex
    let mut degenerate_positions: Vec<C> = Vec::new();
    for (i, &(a, b)) in segments.iter().enumerate() {
        for (end, p) in [(0u8, a), (1u8, b)] {
            let mut supported = false;
            for j in grid.query(p, p, eps) {
                if j == i {
                    continue;
                }
                let (c, d) = segments[j];
                if geom::strictly_inside_segment(p, c, d, eps) {
                    supported = true;
                    break;
                }
            }
            if !supported && boundary_points.iter().any(|&x| (x - p).norm() <= eps) {
                supported = true;
            }
            if !supported {
                // count segment endpoints meeting here
                let mut meet = 0;
                for j in grid.query(p, p, eps) {
                    let (c, d) = segments[j];
                    if (c - p).norm() <= eps || (d - p).norm() <= eps {
                        meet += 1;
                    }
                }
                if meet >= 6 {
                    if !degenerate_positions.iter().any(|&q| (q - p).norm() <= eps) {
                        degenerate_positions.push(p);
                    }
                    supported = true;
                }
            }
            if !supported {
                report.violations.push(Violation::DanglingEndpoint { seg: i, end });
            }
        }
    }
    report.degenerate_vertices = degenerate_positions.len();

    // connectivity of the closure: union-find over endpoints / contacts
    let n = segments.len();
    let mut parent: Vec<usize> = (0..n + boundary_points.len()).collect();
    fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let union = |parent: &mut Vec<usize>, i: usize, j: usize| {
        let (ri, rj) = (find(parent, i), find(parent, j));
        if ri != rj {
            parent[ri] = rj;
        }
    };
    for (i, &(a, b)) in segments.iter().enumerate() {
        for p in [a, b] {
            for j in grid.query(p, p, eps) {
                if j == i {
                    continue;
                }
                let (c, d) = segments[j];
                if geom::dist_point_segment(p, c, d) <= eps {
                    union(&mut parent, i, j);
                }
            }
            for (k, &x) in boundary_points.iter().enumerate() {
                if (x - p).norm() <= eps {
                    union(&mut parent, i, n + k);
                }
            }
        }
    }
    let root = find(&mut parent, 0);
    let connected = (0..n + boundary_points.len()).all(|i| find(&mut parent, i) == root);
    if !connected {
        report.violations.push(Violation::DisconnectedClosure);
    }

    // boundary points on the outer face: meaningful only once the local
    // properties hold, and decided on the actual arrangement
    if report.violations.is_empty() {
        if let Ok(g) = TGraph::build(segments.to_vec(), boundary_points.to_vec(), Some(eps)) {
            let on_outer = outer_face_vertices(&g);
            for (i, &x) in boundary_points.iter().enumerate() {
                let vid = g.vertices.iter().position(|&p| (p - x).norm() <= eps);
                match vid {
                    Some(v) if on_outer.contains(&v) => {}
                    _ => report.violations.push(Violation::BoundaryNotOnOuterFace(i)),
                }
            }
        }
    }

    report
}

/// Vertex ids appearing on the outer face cycle.
pub fn outer_face_vertices(g: &TGraph) -> std::collections::HashSet<VertexId> {
    g.faces[g.outer_face]
        .halfedges
        .iter()
        .map(|&(e, fwd)| if fwd { g.edges[e].a } else { g.edges[e].b })
        .collect()
}

impl TGraph {
    /// Builds the full arrangement. `degenerate_hints` supplies walk metadata
    /// for collapsed faces as `(position, reference transitions)` where each
    /// transition is `(direction unit vector, triangle side length)`; rates
    /// are finished once the actual edge lengths are known.
    pub fn build(
        segments: Vec<(C, C)>,
        boundary_points: Vec<C>,
        eps: Option<f64>,
    ) -> Result<TGraph, TGraphError> {
        if segments.is_empty() {
            return Err(TGraphError::Empty);
        }
        let eps = eps.unwrap_or_else(|| default_eps(&segments));
        let grid = geom::SegmentGrid::build(&segments, grid_cell(&segments));

        // collect vertex candidates: endpoints and boundary points, deduped
        // through a bucketed position hash
        let mut vertices: Vec<C> = Vec::new();
        let mut bucket: HashMap<(i64, i64), Vec<VertexId>> = HashMap::new();
        let cell = (16.0 * eps).max(1e-12);
        let key = |p: C| ((p.re / cell).round() as i64, (p.im / cell).round() as i64);
        let insert_bucketed = |vertices: &mut Vec<C>, bucket: &mut HashMap<(i64, i64), Vec<VertexId>>, p: C| -> VertexId {
            let (kx, ky) = key(p);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(ids) = bucket.get(&(kx + dx, ky + dy)) {
                        for &i in ids {
                            if (vertices[i] - p).norm() <= eps {
                                return i;
                            }
                        }
                    }
                }
            }
            vertices.push(p);
            let id = vertices.len() - 1;
            bucket.entry((kx, ky)).or_default().push(id);
            id
        };

        let mut seg_end_ids: Vec<[VertexId; 2]> = Vec::with_capacity(segments.len());
        for &(a, b) in &segments {
            let ia = insert_bucketed(&mut vertices, &mut bucket, a);
            let ib = insert_bucketed(&mut vertices, &mut bucket, b);
            seg_end_ids.push([ia, ib]);
        }
        let mut boundary_ids = Vec::with_capacity(boundary_points.len());
        for &x in &boundary_points {
            boundary_ids.push(insert_bucketed(&mut vertices, &mut bucket, x));
        }

        // hosts: segment whose interior contains each vertex
        let mut host: Vec<Option<SegId>> = vec![None; vertices.len()];
        for (v, &p) in vertices.iter().enumerate() {
            for s in grid.query(p, p, eps) {
                let (a, b) = segments[s];
                if geom::strictly_inside_segment(p, a, b, eps) {
                    host[v] = Some(s);
                    break;
                }
            }
        }

        // vertices along each segment, ordered
        let mut seg_vertices: Vec<Vec<VertexId>> = vec![Vec::new(); segments.len()];
        for (v, &p) in vertices.iter().enumerate() {
            if let Some(s) = host[v] {
                let _ = p;
                seg_vertices[s].push(v);
            }
        }
        for (s, list) in seg_vertices.iter_mut().enumerate() {
            let (a, b) = segments[s];
            list.push(seg_end_ids[s][0]);
            list.push(seg_end_ids[s][1]);
            list.sort_by(|&u, &v| {
                let tu = geom::project_param(vertices[u], a, b);
                let tv = geom::project_param(vertices[v], a, b);
                tu.partial_cmp(&tv).unwrap()
            });
            list.dedup();
        }

        // edges
        let mut edges: Vec<Edge> = Vec::new();
        let mut vertex_edges: Vec<Vec<EdgeId>> = vec![Vec::new(); vertices.len()];
        for (s, list) in seg_vertices.iter().enumerate() {
            for w in list.windows(2) {
                let e = edges.len();
                edges.push(Edge { seg: s, a: w[0], b: w[1] });
                vertex_edges[w[0]].push(e);
                vertex_edges[w[1]].push(e);
            }
        }

        // vertex kinds
        let mut vertex_kind: Vec<VertexKind> = Vec::with_capacity(vertices.len());
        for v in 0..vertices.len() {
            let kind = if let Some(s) = host[v] {
                VertexKind::Interior { host: s }
            } else if boundary_ids.contains(&v) {
                VertexKind::Boundary
            } else if vertex_edges[v].len() >= 6 {
                VertexKind::Degenerate
            } else {
                // tolerated here; validate_tgraph reports it
                VertexKind::Boundary
            };
            vertex_kind.push(kind);
        }

        let (faces, outer_face, face_of_edge) =
            build_faces_internal(&vertices, &edges, &vertex_edges)?;

        Ok(TGraph {
            segments,
            boundary_points,
            vertices,
            vertex_kind,
            seg_vertices,
            edges,
            vertex_edges,
            faces,
            outer_face,
            face_of_edge,
            degenerate: Vec::new(),
            eps,
        })
    }

    pub fn edge_length(&self, e: EdgeId) -> f64 {
        (self.vertices[self.edges[e].b] - self.vertices[self.edges[e].a]).norm()
    }

    pub fn is_boundary(&self, v: VertexId) -> bool {
        matches!(self.vertex_kind[v], VertexKind::Boundary)
    }

    /// The two neighbours of an interior vertex along its hosting segment.
    pub fn host_neighbors(&self, v: VertexId) -> Option<(VertexId, VertexId)> {
        match self.vertex_kind[v] {
            VertexKind::Interior { host } => {
                let list = &self.seg_vertices[host];
                let i = list.iter().position(|&u| u == v)?;
                Some((list[i - 1], list[i + 1]))
            }
            _ => None,
        }
    }

    /// Bounded-face ids in arbitrary order.
    pub fn bounded_faces(&self) -> impl Iterator<Item = FaceId> + '_ {
        (0..self.faces.len()).filter(move |&f| f != self.outer_face)
    }

    /// Euler characteristic `V - E + F` of the arrangement (2 for connected
    /// planar graphs, counting the outer face).
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }
}

/// Half-edge face traversal. Returns faces, the outer face id and the
/// left-face table per directed edge.
fn build_faces_internal(
    vertices: &[C],
    edges: &[Edge],
    _vertex_edges: &[Vec<EdgeId>],
) -> Result<(Vec<Face>, FaceId, Vec<[FaceId; 2]>), TGraphError> {
    // outgoing halfedges per vertex sorted by angle
    #[derive(Clone, Copy)]
    struct Out {
        edge: EdgeId,
        forward: bool,
        angle: f64,
    }
    let dir = |e: &Edge, forward: bool| {
        let d = vertices[e.b] - vertices[e.a];
        if forward {
            d
        } else {
            -d
        }
    };
    let mut outs: Vec<Vec<Out>> = vec![Vec::new(); vertices.len()];
    for (i, e) in edges.iter().enumerate() {
        let d = dir(e, true);
        outs[e.a].push(Out { edge: i, forward: true, angle: d.im.atan2(d.re) });
        outs[e.b].push(Out { edge: i, forward: false, angle: (-d).im.atan2((-d).re) });
    }
    for list in outs.iter_mut() {
        list.sort_by(|x, y| x.angle.partial_cmp(&y.angle).unwrap());
    }

    // next halfedge: arrive at v along h; leave along the outgoing halfedge
    // that is the next one clockwise from the reversed direction
    let he_index = |e: EdgeId, fwd: bool| 2 * e + fwd as usize;
    let mut next: Vec<usize> = vec![usize::MAX; 2 * edges.len()];
    for (e_id, e) in edges.iter().enumerate() {
        for fwd in [true, false] {
            let target = if fwd { e.b } else { e.a };
            let rev_angle = {
                let d = -dir(e, fwd);
                d.im.atan2(d.re)
            };
            let list = &outs[target];
            // position of the reverse halfedge in the sorted list
            let mut idx = None;
            for (k, o) in list.iter().enumerate() {
                if o.edge == e_id && o.forward != fwd {
                    idx = Some(k);
                    break;
                }
            }
            let k = idx.expect("reverse halfedge present");
            let _ = rev_angle;
            // next clockwise = previous in counterclockwise sorted order
            let o = list[(k + list.len() - 1) % list.len()];
            next[he_index(e_id, fwd)] = he_index(o.edge, o.forward);
        }
    }

    // collect faces
    let mut face_of_he: Vec<Option<FaceId>> = vec![None; 2 * edges.len()];
    let mut faces: Vec<Face> = Vec::new();
    for start in 0..2 * edges.len() {
        if face_of_he[start].is_some() {
            continue;
        }
        let fid = faces.len();
        let mut cycle = Vec::new();
        let mut poly = Vec::new();
        let mut h = start;
        loop {
            face_of_he[h] = Some(fid);
            let (e, fwd) = (h / 2, h % 2 == 1);
            cycle.push((e, fwd));
            poly.push(if fwd { vertices[edges[e].a] } else { vertices[edges[e].b] });
            h = next[h];
            if h == start {
                break;
            }
            if cycle.len() > 2 * edges.len() {
                return Err(TGraphError::DegenerateGeometry(edges[e].seg, edges[e].seg));
            }
        }
        let area = geom::polygon_area(&poly);
        faces.push(Face { halfedges: cycle, polygon: poly, area });
    }

    // outer face: most negative area (clockwise traversal)
    let outer = faces
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.area.partial_cmp(&b.1.area).unwrap())
        .map(|(i, _)| i)
        .unwrap();

    let mut face_of_edge = vec![[0usize; 2]; edges.len()];
    for e in 0..edges.len() {
        face_of_edge[e] = [
            face_of_he[he_index(e, true)].unwrap(),
            face_of_he[he_index(e, false)].unwrap(),
        ];
    }
    Ok((faces, outer, face_of_edge))
}

/// White vertex of the dimer graph: a bounded face or a boundary arc
/// `(x_i, x_{i+1})` of the outer boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WhiteId {
    Face(FaceId),
    BoundaryArc(usize),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DimerGraph {
    /// Blacks are segment ids of the T-graph.
    pub n_blacks: usize,
    pub whites: Vec<WhiteId>,
    /// Sparse weights `(black, white index into `whites`, weight)`.
    pub weights: Vec<(SegId, usize, f64)>,
}

impl DimerGraph {
    pub fn weight(&self, b: SegId, w: usize) -> f64 {
        self.weights
            .iter()
            .find(|&&(bb, ww, _)| bb == b && ww == w)
            .map_or(0.0, |&(_, _, x)| x)
    }
}

#[derive(Debug, Error)]
pub enum DimerError {
    #[error("boundary points missing from the outer face cycle")]
    BoundaryTrace,
}

/// Assigns each outer-cycle halfedge `(edge, forward)` its boundary arc in
/// positive order: arcs `(x_i, x_{i+1})` get ranks `0..n-1`, the arc of rank
/// `n-1` being the conventional `(x_n, x_1)` arc that carries no white.
/// Positive order is read off the clockwise outer cycle reversed, anchored at
/// the boundary point with input index 0.
pub fn outer_arc_ranks(g: &TGraph) -> Result<(HashMap<(EdgeId, bool), usize>, usize), DimerError> {
    let n_bd = g.boundary_points.len();
    let mut map = HashMap::new();
    if n_bd < 2 {
        return Ok((map, 0));
    }
    let cycle = &g.faces[g.outer_face].halfedges;
    let bd_vertex: Vec<VertexId> = g
        .boundary_points
        .iter()
        .map(|&x| {
            g.vertices
                .iter()
                .position(|&p| (p - x).norm() <= g.eps)
                .expect("boundary point is a vertex")
        })
        .collect();
    let start_vertex = |&(e, fwd): &(EdgeId, bool)| if fwd { g.edges[e].a } else { g.edges[e].b };
    let mut marks: Vec<(usize, usize)> = Vec::new();
    for (ci, he) in cycle.iter().enumerate() {
        let v = start_vertex(he);
        if let Some(bi) = bd_vertex.iter().position(|&u| u == v) {
            marks.push((ci, bi));
        }
    }
    if marks.len() != n_bd {
        return Err(DimerError::BoundaryTrace);
    }
    let mut pos_order: Vec<usize> = marks.iter().rev().map(|&(_, bi)| bi).collect();
    let anchor = pos_order.iter().position(|&bi| bi == 0).unwrap();
    pos_order.rotate_left(anchor);
    let pos_rank: HashMap<usize, usize> =
        pos_order.iter().enumerate().map(|(r, &bi)| (bi, r)).collect();
    for mi in 0..marks.len() {
        let rank = pos_rank[&marks[(mi + 1) % marks.len()].1];
        let (ci, _) = marks[mi];
        let end_ci = marks[(mi + 1) % marks.len()].0;
        let mut k = ci;
        loop {
            map.insert(cycle[k], rank);
            k = (k + 1) % cycle.len();
            if k == end_ci {
                break;
            }
        }
    }
    Ok((map, n_bd))
}

/// Builds the dimer graph: weight of `(segment, face)` is the total length of
/// the segment's edges bordering that face, each side counted once. The outer
/// face is split at the boundary points into arcs; arcs `(x_i, x_{i+1})` for
/// `i < n` become boundary whites and the last arc `(x_n, x_1)` has none.
pub fn to_dimer_graph(g: &TGraph) -> Result<DimerGraph, DimerError> {
    let mut whites: Vec<WhiteId> = Vec::new();
    let mut white_of_face: HashMap<FaceId, usize> = HashMap::new();
    for f in g.bounded_faces() {
        white_of_face.insert(f, whites.len());
        whites.push(WhiteId::Face(f));
    }

    let mut weights: HashMap<(SegId, usize), f64> = HashMap::new();
    for (e, _edge) in g.edges.iter().enumerate() {
        for side in 0..2 {
            let f = g.face_of_edge[e][side];
            if f == g.outer_face {
                continue;
            }
            let w = white_of_face[&f];
            *weights.entry((g.edges[e].seg, w)).or_insert(0.0) += g.edge_length(e);
        }
    }

    // boundary arcs along the outer cycle
    let (arc_of_he, n_bd) = outer_arc_ranks(g)?;
    if n_bd >= 2 {
        let mut white_of_arc: HashMap<usize, usize> = HashMap::new();
        for rank in 0..n_bd - 1 {
            white_of_arc.insert(rank, whites.len());
            whites.push(WhiteId::BoundaryArc(rank));
        }
        for (&(e, _fwd), &rank) in &arc_of_he {
            if rank == n_bd - 1 {
                continue; // the (x_n, x_1) arc carries no white
            }
            let w = white_of_arc[&rank];
            *weights.entry((g.edges[e].seg, w)).or_insert(0.0) += g.edge_length(e);
        }
    }

    let mut weights: Vec<(SegId, usize, f64)> =
        weights.into_iter().map(|((b, w), x)| (b, w, x)).collect();
    weights.sort_by_key(|&(b, w, _)| (b, w));
    Ok(DimerGraph { n_blacks: g.segments.len(), whites, weights })
}

/// Versioned JSON schema for T-graph exchange.
#[derive(Serialize, Deserialize)]
pub struct TGraphFile {
    pub schema: String,
    pub segments: Vec<[[f64; 2]; 2]>,
    pub boundary_points: Vec<[f64; 2]>,
}

pub fn to_file(g: &TGraph) -> TGraphFile {
    TGraphFile {
        schema: "tg-1".into(),
        segments: g
            .segments
            .iter()
            .map(|&(a, b)| [[a.re, a.im], [b.re, b.im]])
            .collect(),
        boundary_points: g.boundary_points.iter().map(|&p| [p.re, p.im]).collect(),
    }
}

pub fn from_file(f: &TGraphFile) -> Result<TGraph, TGraphError> {
    let segments = f
        .segments
        .iter()
        .map(|s| (C::new(s[0][0], s[0][1]), C::new(s[1][0], s[1][1])))
        .collect();
    let boundary = f.boundary_points.iter().map(|p| C::new(p[0], p[1])).collect();
    TGraph::build(segments, boundary, None)
}

/// A hand-buildable 3-segment T-graph used across the test suite: an inner
/// triangle whose sides overshoot the corners, tips resting on each other,
/// with the three free ends declared boundary points.
pub fn triangle_tgraph() -> (Vec<(C, C)>, Vec<C>) {
    // corners of the inner triangle
    let p1 = C::new(0.0, 0.0);
    let p2 = C::new(1.0, 0.0);
    let p3 = C::new(0.35, 0.9);
    let overshoot = 0.35;
    let ext = |from: C, to: C| to + (to - from) * overshoot;
    // segment i runs from a free end through two corners
    let s1 = (ext(p2, p1), p2); // through p1 into p2
    let s2 = (ext(p3, p2), p3); // through p2 into p3
    let s3 = (ext(p1, p3), p1); // through p3 into p1
    // each tip rests strictly inside the next side thanks to the overshoot
    let segs = vec![s1, s2, s3];
    let boundary = vec![segs[0].0, segs[1].0, segs[2].0];
    (segs, boundary)
}
