//! Cutting a sampling domain out of the corrected T-graph.
//!
//! A standard walk path is steered along the image of the target boundary
//! inside a corridor, loop-erased online until it closes into a simple loop.
//! The graph strictly inside the loop, wired at the loop vertices, carries
//! the wired spanning-tree measure whose tree-to-dimer image lives on the hex
//! subgraph enclosed by the loop: loop edges count as tree-covered except the
//! root edge `(x0, x1)`, whose segment and inside face provide the root pair
//! `(b0, w0)` dropped from the dimer graph.

use super::psi::{classify_and_label, EdgeClass, SegDuals};
use crate::geom::{self, C};
use crate::hexlattice::{kasteleyn_entry, HexCoord};
use crate::oracle::HexSubgraph;
use crate::rng::stream_rng;
use crate::tgraph::{EdgeId, FaceId, SegId, TGraph, TGraphError, VertexId, VertexKind};
use crate::ust::{self, DualRoot, MatchedWhite, UstError};
use rand::Rng;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CutError {
    #[error("no corridor path closed into a loop within the retry budget")]
    CorridorFailure,
    #[error("assembly failed: {0}")]
    Assembly(#[from] TGraphError),
    #[error("tree mapping failed: {0}")]
    Mapping(#[from] UstError),
    #[error("cut produced an empty or unlabeled domain")]
    EmptyDomain,
}

#[derive(Clone, Copy, Debug)]
pub struct CutParams {
    /// Corridor half-width in units of the median long edge.
    pub corridor_edges: f64,
    pub seed: u64,
    /// Stochastic attempts before the deterministic greedy fallback.
    pub retries: usize,
}

impl Default for CutParams {
    fn default() -> Self {
        CutParams { corridor_edges: 2.5, seed: 0, retries: 3 }
    }
}

/// A labeled T-graph that can be cut: the corrected graph or a planar patch.
pub struct CutInput<'a> {
    pub graph: &'a TGraph,
    pub black_of_segment: &'a [HexCoord],
    pub edge_class: Vec<EdgeClass>,
    /// Dual anchors per segment (for relabeling the clipped graph).
    pub seg_duals: Vec<SegDuals>,
}

impl<'a> CutInput<'a> {
    pub fn new(
        graph: &'a TGraph,
        black_of_segment: &'a [HexCoord],
        seg_duals: Vec<SegDuals>,
    ) -> Self {
        let labeling = classify_and_label(graph, black_of_segment, &seg_duals);
        CutInput { graph, black_of_segment, edge_class: labeling.edge_class, seg_duals }
    }
}

impl super::psi::GammaEx {
    pub fn cut_input(&self) -> CutInput<'_> {
        CutInput {
            graph: &self.graph,
            black_of_segment: &self.black_of_segment,
            edge_class: self.edge_class.clone(),
            seg_duals: self.seg_duals.clone(),
        }
    }
}

/// The cut domain: the wired inside graph with its hex identification.
pub struct CutDomain {
    pub graph: TGraph,
    pub black_of_segment: Vec<HexCoord>,
    pub edge_class: Vec<EdgeClass>,
    pub white_of_face: HashMap<FaceId, HexCoord>,
    /// Loop edges treated as tree-covered (all but the root edge).
    pub force_covered: Vec<bool>,
    pub loop_polygon: Vec<C>,
    pub b0: SegId,
    pub w0_face: FaceId,
    pub w0: HexCoord,
    /// The unweighted hex subgraph `U(delta)`.
    pub u_hex: HexSubgraph,
    pub used_fallback: bool,
    /// `ust::EdgeLabels` view of the edge classes.
    pub ust_labels: ust::EdgeLabels,
}

struct PathState {
    vertices: Vec<VertexId>,
    progress: Vec<f64>,
    index_of: HashMap<VertexId, usize>,
}

/// Closed-polyline parametrization: returns (t in [0,1), distance).
fn project(curve: &[C], cum: &[f64], p: C) -> (f64, f64) {
    let total = *cum.last().unwrap();
    let mut best = (0.0, f64::INFINITY);
    for i in 0..curve.len() {
        let a = curve[i];
        let b = curve[(i + 1) % curve.len()];
        let ab = b - a;
        let len2 = geom::dot(ab, ab);
        let t = if len2 == 0.0 {
            0.0
        } else {
            (geom::dot(p - a, ab) / len2).clamp(0.0, 1.0)
        };
        let q = a + ab * t;
        let d = (p - q).norm();
        if d < best.1 {
            let s = (cum[i] + ab.norm() * t) / total;
            best = (s, d);
        }
    }
    best
}

fn forward_progress(t_from: f64, t_to: f64) -> f64 {
    let mut d = t_to - t_from;
    while d > 0.5 {
        d -= 1.0;
    }
    while d < -0.5 {
        d += 1.0;
    }
    d
}

/// Builds a standard loop hugging `curve` and cuts the domain.
pub fn cut_domain(
    input: &CutInput,
    curve: &[C],
    params: &CutParams,
) -> Result<CutDomain, CutError> {
    let g = input.graph;
    // corridor scale from the long edges
    let mut long_lens: Vec<f64> = input
        .edge_class
        .iter()
        .enumerate()
        .filter(|(_, k)| matches!(k, EdgeClass::Long { .. }))
        .map(|(e, _)| g.edge_length(e))
        .collect();
    long_lens.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if long_lens.is_empty() {
        return Err(CutError::EmptyDomain);
    }
    let median_long = long_lens[long_lens.len() / 2];
    let mut cum = vec![0.0];
    for i in 0..curve.len() {
        let a = curve[i];
        let b = curve[(i + 1) % curve.len()];
        cum.push(cum.last().unwrap() + (b - a).norm());
    }

    // the corridor must stay well inside the loop the curve traces
    let centroid = curve.iter().sum::<C>() / curve.len() as f64;
    let inradius = curve
        .iter()
        .map(|&q| (q - centroid).norm())
        .fold(f64::INFINITY, f64::min);
    let mut attempt = 0usize;
    loop {
        let widen = 1.0 + 0.5 * (attempt / (params.retries + 1)) as f64;
        let corridor = (params.corridor_edges * median_long * widen).min(0.25 * inradius);
        let stochastic = attempt % (params.retries + 1) != params.retries;
        match trace_loop(
            input,
            curve,
            &cum,
            corridor,
            stochastic,
            params.seed.wrapping_add(attempt as u64),
        ) {
            Ok(lp) => {
                let out = assemble(input, lp, !stochastic);
                match out {
                    Ok(cd) => return Ok(cd),
                    Err(_) if attempt + 1 < 3 * (params.retries + 1) => {
                        attempt += 1;
                        continue;
                    }
                    Err(e) => return Err(e),
                }
            }
            Err(_) if attempt + 1 < 3 * (params.retries + 1) => {
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

struct TracedLoop {
    cycle: Vec<VertexId>,
}

fn trace_loop(
    input: &CutInput,
    curve: &[C],
    cum: &[f64],
    corridor: f64,
    stochastic: bool,
    seed: u64,
) -> Result<TracedLoop, CutError> {
    let g = input.graph;
    let centroid = curve.iter().sum::<C>() / curve.len() as f64;
    let mut rng = stream_rng(seed, 0);
    // start near curve parameter 0
    let start = (0..g.vertices.len())
        .filter(|&v| matches!(g.vertex_kind[v], VertexKind::Interior { .. }))
        .min_by(|&a, &b| {
            let (ta, da) = project(curve, cum, g.vertices[a]);
            let (tb, db) = project(curve, cum, g.vertices[b]);
            let sa = da + ta.min(1.0 - ta) * 0.5;
            let sb = db + tb.min(1.0 - tb) * 0.5;
            sa.partial_cmp(&sb).unwrap()
        })
        .ok_or(CutError::EmptyDomain)?;

    let mut st = PathState {
        vertices: vec![start],
        progress: vec![0.0],
        index_of: HashMap::from([(start, 0)]),
    };
    let mut cur = start;
    let (mut t_cur, _) = project(curve, cum, g.vertices[cur]);
    let mut acc = 0.0f64; // accumulated forward progress
    let mut must_short = true;
    let mut last_seg: Option<SegId> = None;
    let max_steps = 400 * g.vertices.len();
    // visit counts break deterministic oscillation cycles
    let mut visits: HashMap<VertexId, usize> = HashMap::new();

    let edge_between = |a: VertexId, b: VertexId| -> Option<EdgeId> {
        g.vertex_edges[a].iter().copied().find(|&e| {
            (g.edges[e].a == a && g.edges[e].b == b) || (g.edges[e].a == b && g.edges[e].b == a)
        })
    };

    for _step in 0..max_steps {
        let Some((prev, next)) = g.host_neighbors(cur) else {
            return Err(CutError::CorridorFailure); // walked onto the rim
        };
        // candidate moves with standardness: after a long jump or a segment
        // change, an available short jump must be taken
        let candidates: Vec<VertexId> = {
            let both = [prev, next];
            if must_short {
                let shorts: Vec<VertexId> = both
                    .into_iter()
                    .filter(|&w| {
                        edge_between(cur, w)
                            .is_some_and(|e| input.edge_class[e] == EdgeClass::Short)
                    })
                    .collect();
                if !shorts.is_empty() {
                    shorts
                } else {
                    both.to_vec()
                }
            } else {
                both.to_vec()
            }
        };
        // score: corridor excess (plus a revisit penalty) then forward
        // progress
        let scored: Vec<(f64, f64, VertexId)> = candidates
            .iter()
            .map(|&w| {
                let (t, d) = project(curve, cum, g.vertices[w]);
                let revisit = *visits.get(&w).unwrap_or(&0) as f64;
                let excess = (d - corridor).max(0.0) + 0.03 * corridor * revisit;
                let prog = forward_progress(t_cur, t);
                (excess, prog, w)
            })
            .collect();
        let pick = if stochastic && scored.len() > 1 && scored.iter().all(|s| s.0 == 0.0) {
            // inside the corridor: pick forward-biased at random
            let w0 = (scored[0].1 + 0.6).max(0.05);
            let w1 = (scored[1].1 + 0.6).max(0.05);
            if rng.gen::<f64>() * (w0 + w1) < w0 {
                scored[0].2
            } else {
                scored[1].2
            }
        } else {
            scored
                .iter()
                .min_by(|x, y| (x.0, -x.1).partial_cmp(&(y.0, -y.1)).unwrap())
                .unwrap()
                .2
        };
        // update standardness state
        let e = edge_between(cur, pick).expect("host move is an edge");
        let kind = input.edge_class[e].clone();
        let seg = g.edges[e].seg;
        let changed = last_seg.is_some_and(|s| s != seg);
        must_short = matches!(kind, EdgeClass::Long { .. }) || changed;
        last_seg = Some(seg);
        let (t_new, _) = project(curve, cum, g.vertices[pick]);
        acc += forward_progress(t_cur, t_new);
        t_cur = t_new;
        *visits.entry(pick).or_insert(0) += 1;
        // online loop erasure
        if let Some(&j) = st.index_of.get(&pick) {
            // close only when the cycle made a full turn around the target
            // and passes straight through the base point along its hosting
            // segment, so that the root segment keeps a single free gap
            if acc - st.progress[j] > 0.8 {
                let cycle = st.vertices[j..].to_vec();
                let poly: Vec<C> = cycle.iter().map(|&v| g.vertices[v]).collect();
                let straight = if cycle.len() >= 2 {
                    let arrive = edge_between(cur, pick);
                    let depart = edge_between(pick, cycle[1]);
                    matches!((arrive, depart), (Some(a), Some(d))
                        if g.edges[a].seg == g.edges[d].seg)
                } else {
                    false
                };
                if cycle.len() >= 6 && straight && geom::winding_number(centroid, &poly) != 0 {
                    return Ok(TracedLoop { cycle });
                }
            }
            // erase the excursion
            for &v in &st.vertices[j + 1..] {
                st.index_of.remove(&v);
            }
            st.vertices.truncate(j + 1);
            st.progress.truncate(j + 1);
            acc = st.progress[j];
            cur = pick;
        } else {
            st.vertices.push(pick);
            st.progress.push(acc);
            st.index_of.insert(pick, st.vertices.len() - 1);
            cur = pick;
        }
    }
    Err(CutError::CorridorFailure)
}

fn assemble(input: &CutInput, lp: TracedLoop, used_fallback: bool) -> Result<CutDomain, CutError> {
    let g = input.graph;
    let cycle = &lp.cycle;
    let loop_polygon: Vec<C> = cycle.iter().map(|&v| g.vertices[v]).collect();
    let loop_set: HashMap<VertexId, usize> =
        cycle.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let loop_edge = |a: VertexId, b: VertexId| -> bool {
        match (loop_set.get(&a), loop_set.get(&b)) {
            (Some(&i), Some(&j)) => {
                let n = cycle.len();
                (i + 1) % n == j || (j + 1) % n == i
            }
            _ => false,
        }
    };
    let inside = |v: VertexId| -> bool {
        !loop_set.contains_key(&v) && geom::winding_number(g.vertices[v], &loop_polygon) != 0
    };

    // clip segments to runs of edges inside or on the loop
    let mut segments: Vec<(C, C)> = Vec::new();
    let mut src_of_new: Vec<SegId> = Vec::new();
    let mut run_vertices: Vec<Vec<VertexId>> = Vec::new();
    for s in 0..g.segments.len() {
        let verts = &g.seg_vertices[s];
        let mut run: Vec<VertexId> = Vec::new();
        let mut flush = |run: &mut Vec<VertexId>,
                         segments: &mut Vec<(C, C)>,
                         src_of_new: &mut Vec<SegId>,
                         run_vertices: &mut Vec<Vec<VertexId>>| {
            if run.len() >= 2 {
                segments.push((g.vertices[run[0]], g.vertices[*run.last().unwrap()]));
                src_of_new.push(s);
                run_vertices.push(run.clone());
            }
            run.clear();
        };
        for k in 0..verts.len() {
            let v = verts[k];
            let v_ok = inside(v) || loop_set.contains_key(&v);
            if !v_ok {
                flush(&mut run, &mut segments, &mut src_of_new, &mut run_vertices);
                continue;
            }
            if let Some(&prev) = run.last() {
                // the edge (prev, v) must be inside or a loop edge
                let mid = (g.vertices[prev] + g.vertices[v]) / 2.0;
                let edge_inside = inside(prev)
                    || inside(v)
                    || loop_edge(prev, v)
                    || geom::winding_number(mid, &loop_polygon) != 0;
                if !edge_inside {
                    flush(&mut run, &mut segments, &mut src_of_new, &mut run_vertices);
                }
            }
            run.push(v);
        }
        flush(&mut run, &mut segments, &mut src_of_new, &mut run_vertices);
    }
    if segments.is_empty() {
        return Err(CutError::EmptyDomain);
    }

    let mut clipped = TGraph::build(segments, Vec::new(), Some(g.eps))?;
    // wire the loop vertices
    let pos_key = |p: C| (p.re.to_bits(), p.im.to_bits());
    let loop_pos: std::collections::HashSet<(u64, u64)> =
        cycle.iter().map(|&v| pos_key(g.vertices[v])).collect();
    for (v, &p) in clipped.vertices.clone().iter().enumerate() {
        if loop_pos.contains(&pos_key(p)) {
            clipped.vertex_kind[v] = VertexKind::Boundary;
        }
    }

    // relabel: anchors carried over from the source segments
    let black_of_segment: Vec<HexCoord> =
        src_of_new.iter().map(|&s| input.black_of_segment[s]).collect();
    let seg_duals: Vec<SegDuals> = src_of_new
        .iter()
        .map(|&s| {
            let sd = &input.seg_duals[s];
            SegDuals { anchors: sd.anchors, span: sd.span }
        })
        .collect();
    let labeling = classify_and_label(&clipped, &black_of_segment, &seg_duals);

    // force-covered: loop edges except the root edge (x0, x1)
    let x0 = cycle[0];
    let x1 = cycle[1];
    let (p0, p1) = (g.vertices[x0], g.vertices[x1]);
    let mut force_covered = vec![false; clipped.edges.len()];
    let mut root_edge: Option<EdgeId> = None;
    for (e, edge) in clipped.edges.iter().enumerate() {
        let (a, b) = (clipped.vertices[edge.a], clipped.vertices[edge.b]);
        let is_root = ((a - p0).norm() <= clipped.eps && (b - p1).norm() <= clipped.eps)
            || ((a - p1).norm() <= clipped.eps && (b - p0).norm() <= clipped.eps);
        if is_root {
            root_edge = Some(e);
            continue;
        }
        // a loop edge joins consecutive loop vertices
        let ka = pos_key(a);
        let kb = pos_key(b);
        if loop_pos.contains(&ka) && loop_pos.contains(&kb) {
            // consecutive on the cycle?
            let find = |k: (u64, u64)| cycle.iter().position(|&v| pos_key(g.vertices[v]) == k);
            if let (Some(i), Some(j)) = (find(ka), find(kb)) {
                let n = cycle.len();
                if (i + 1) % n == j || (j + 1) % n == i {
                    force_covered[e] = true;
                }
            }
        }
    }
    let root_edge = root_edge.ok_or(CutError::EmptyDomain)?;
    // the tree-to-dimer structure needs contiguous free edges per segment
    // (the corollary's single-gap property); loops that cover a middle run of
    // a segment with free pieces on both sides are rejected and retraced
    for s in 0..clipped.segments.len() {
        let verts = &clipped.seg_vertices[s];
        let frees: Vec<bool> = verts
            .windows(2)
            .map(|w| {
                clipped.vertex_edges[w[0]].iter().any(|&e| {
                    let ed = &clipped.edges[e];
                    ed.seg == s
                        && ((ed.a == w[0] && ed.b == w[1]) || (ed.a == w[1] && ed.b == w[0]))
                        && !force_covered[e]
                })
            })
            .collect();
        let mut blocks = 0;
        let mut prev = false;
        for (k, &f) in frees.iter().enumerate() {
            if f && !prev {
                blocks += 1;
            }
            // a wired vertex strictly inside a free run splits the coverage
            if f && prev {
                let mid = verts[k];
                if matches!(clipped.vertex_kind[mid], VertexKind::Boundary) {
                    blocks += 1;
                }
            }
            prev = f;
        }
        if blocks > 1 {
            return Err(CutError::CorridorFailure);
        }
    }
    let b0 = clipped.edges[root_edge].seg;
    // w0: the inside face adjacent to the root edge
    let w0_face = clipped.face_of_edge[root_edge]
        .iter()
        .copied()
        .find(|&f| f != clipped.outer_face)
        .ok_or(CutError::EmptyDomain)?;
    let Some(&w0) = labeling.white_of_face.get(&w0_face) else {
        return Err(CutError::EmptyDomain);
    };

    // hex subgraph: the matched whites and blacks are sample-independent
    // (every per-segment gap is a dual-tree edge), so read them off one
    // reference tree and drop the root pair
    let ref_tree = ust::wilson_sample(&clipped, 0, u64::MAX - 1)?;
    let ref_matching =
        ust::tree_to_matching(&clipped, &ref_tree, DualRoot::Outer, Some(&force_covered))?;
    let mut whites: Vec<HexCoord> = Vec::new();
    let mut blacks: Vec<HexCoord> = Vec::new();
    for &(s, mw) in &ref_matching.pairs {
        let MatchedWhite::Face(f) = mw else {
            return Err(CutError::EmptyDomain);
        };
        if f == w0_face {
            continue;
        }
        let Some(&w) = labeling.white_of_face.get(&f) else {
            return Err(CutError::EmptyDomain);
        };
        whites.push(w);
        blacks.push(black_of_segment[s]);
    }
    // hex edges whose entire common interval lies on the wired loop can
    // never be matched: drop them so the uniform measure on the region
    // agrees with the tree-to-dimer image (the paper's "long common piece"
    // adjacency)
    let mut interval_free: HashMap<((i64, i64), (i64, i64)), bool> = HashMap::new();
    for (e, k) in labeling.edge_class.iter().enumerate() {
        if let EdgeClass::Long { w, b } = k {
            let key = ((w.m, w.n), (b.m, b.n));
            let entry = interval_free.entry(key).or_insert(false);
            *entry = *entry || !force_covered[e];
        }
    }
    // the spanning white's interval is the whole chord: matchable through
    // any free edge of the segment
    for (s, sd) in seg_duals.iter().enumerate() {
        let b = black_of_segment[s];
        let Some(w_span) = super::psi::crossed_white_pub(b, sd.span.0, sd.span.1) else {
            continue;
        };
        let any_free = clipped.seg_vertices[s].windows(2).any(|vw| {
            clipped.vertex_edges[vw[0]].iter().any(|&e| {
                let ed = &clipped.edges[e];
                ed.seg == s
                    && ((ed.a == vw[0] && ed.b == vw[1]) || (ed.a == vw[1] && ed.b == vw[0]))
                    && !force_covered[e]
            })
        });
        let entry = interval_free
            .entry(((w_span.m, w_span.n), (b.m, b.n)))
            .or_insert(false);
        *entry = *entry || any_free;
    }
    let allowed = |w: HexCoord, b: HexCoord| -> bool {
        interval_free
            .get(&((w.m, w.n), (b.m, b.n)))
            .copied()
            .unwrap_or(false)
    };
    let mut u_hex = HexSubgraph::with_edges(whites, blacks, &allowed);
    if u_hex.whites.is_empty() {
        return Err(CutError::EmptyDomain);
    }
    // the pushforward of the wired tree measure weights each pair by the
    // free length of its interval (loop pieces are not part of the domain)
    {
        let mut free_len: HashMap<(usize, usize), f64> = HashMap::new();
        for (e, edge) in clipped.edges.iter().enumerate() {
            if force_covered[e] {
                continue;
            }
            let b = black_of_segment[edge.seg];
            let Some(bi) = u_hex.black_id(b) else { continue };
            for side in 0..2 {
                let f = clipped.face_of_edge[e][side];
                if f == clipped.outer_face || f == w0_face {
                    continue;
                }
                let Some(&w) = labeling.white_of_face.get(&f) else {
                    continue;
                };
                let Some(wi) = u_hex.white_id(w) else { continue };
                *free_len.entry((wi, bi)).or_insert(0.0) += clipped.edge_length(e);
            }
        }
        let median = {
            let mut v: Vec<f64> = free_len.values().copied().collect();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v.get(v.len() / 2).copied().unwrap_or(1.0)
        };
        for (k, &(w, b)) in u_hex.edges.clone().iter().enumerate() {
            let x = free_len.get(&(w, b)).copied().unwrap_or(0.0);
            let _ = k;
            // normalize to keep the determinant well-scaled
            u_hex.set_weight(w, b, (x / median).max(1e-12));
        }
    }

    let ust_labels = ust::EdgeLabels {
        kind: labeling
            .edge_class
            .iter()
            .map(|k| match k {
                EdgeClass::Long { .. } => ust::EdgeKind::Long,
                EdgeClass::Short => ust::EdgeKind::Short,
            })
            .collect(),
    };

    Ok(CutDomain {
        graph: clipped,
        black_of_segment,
        edge_class: labeling.edge_class,
        white_of_face: labeling.white_of_face,
        force_covered,
        loop_polygon,
        b0,
        w0_face,
        w0,
        u_hex,
        used_fallback,
        ust_labels,
    })
}

/// One sampled configuration on the cut domain.
pub struct SampledMatching {
    /// `black_of_white` indices into `u_hex`, when the sample is a hex
    /// matching (no extra edge used).
    pub hex: Option<Vec<usize>>,
    /// Some segment had both long pieces covered by the tree.
    pub double_long: bool,
    /// Standardness violations of the Wilson walks.
    pub standard_violations: usize,
}

impl CutDomain {
    /// Samples the wired UST and maps it to a dimer configuration.
    pub fn sample(&self, seed: u64, stream: u64) -> Result<SampledMatching, UstError> {
        let (tree, audit) =
            ust::wilson_sample_audited(&self.graph, seed, stream, Some(&self.ust_labels))?;
        // double occupation of long pieces
        let mut covered = vec![false; self.graph.edges.len()];
        for (&v, &w) in &tree.next {
            if let Some(e) = self.edge_between(v, w) {
                covered[e] = true;
            }
        }
        let mut double_long = false;
        for s in 0..self.graph.segments.len() {
            let longs_covered = self.graph.seg_vertices[s]
                .windows(2)
                .filter_map(|w| self.edge_between(w[0], w[1]))
                .filter(|&e| {
                    matches!(self.edge_class[e], EdgeClass::Long { .. }) && covered[e]
                })
                .count();
            if longs_covered >= 2 {
                double_long = true;
                break;
            }
        }
        let matching =
            ust::tree_to_matching(&self.graph, &tree, DualRoot::Outer, Some(&self.force_covered))?;
        // translate to the hex subgraph
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        let mut is_hex = true;
        for &(s, mw) in &matching.pairs {
            let MatchedWhite::Face(f) = mw else {
                is_hex = false;
                break;
            };
            if f == self.w0_face {
                continue; // the root pair (b0, w0) is outside U(delta)
            }
            let Some(&w) = self.white_of_face.get(&f) else {
                is_hex = false;
                break;
            };
            let b = self.black_of_segment[s];
            if kasteleyn_entry(w, b) == 0 {
                is_hex = false; // an extra (diagonal) edge was used
                break;
            }
            match (self.u_hex.white_id(w), self.u_hex.black_id(b)) {
                (Some(wi), Some(bi)) => pairs.push((wi, bi)),
                _ => {
                    is_hex = false;
                    break;
                }
            }
        }
        let hex = if is_hex && pairs.len() == self.u_hex.whites.len() {
            let mut bw = vec![usize::MAX; self.u_hex.whites.len()];
            let mut ok = true;
            for (wi, bi) in pairs {
                if bw[wi] != usize::MAX {
                    ok = false;
                    break;
                }
                bw[wi] = bi;
            }
            if ok && bw.iter().all(|&b| b != usize::MAX) {
                Some(bw)
            } else {
                None
            }
        } else {
            None
        };
        Ok(SampledMatching {
            hex,
            double_long,
            standard_violations: audit.standard_violations,
        })
    }

    fn edge_between(&self, a: VertexId, b: VertexId) -> Option<EdgeId> {
        self.graph.vertex_edges[a].iter().copied().find(|&e| {
            (self.graph.edges[e].a == a && self.graph.edges[e].b == b)
                || (self.graph.edges[e].a == b && self.graph.edges[e].b == a)
        })
    }

    /// Hausdorff distance between the closed hex region (union of closed
    /// lattice faces of `u_hex`) and the target set `U` given by a
    /// membership function and boundary sampling, both directions.
    pub fn hausdorff_to_target(
        &self,
        delta: f64,
        contains: impl Fn(C) -> bool,
        target_boundary: &[C],
    ) -> f64 {
        let faces = self.u_hex.interior_faces();
        let mut worst = 0.0f64;
        // region -> target
        for f in &faces {
            let z = crate::hexlattice::plane_position(*f, delta);
            if !contains(z) {
                let d = target_boundary
                    .iter()
                    .map(|&b| (z - b).norm())
                    .fold(f64::INFINITY, f64::min);
                worst = worst.max(d);
            }
        }
        // target -> region: sample the target boundary and interior rim
        for &b in target_boundary {
            let d = faces
                .iter()
                .map(|f| (crate::hexlattice::plane_position(*f, delta) - b).norm())
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
        worst
    }
}

/// Simple connectivity of the hex region at cell level: the interior faces
/// form one connected cluster and their complement in a bounding box is
/// connected (no holes).
pub fn is_simply_connected(region: &HexSubgraph) -> bool {
    let faces: std::collections::HashSet<(i64, i64)> = region
        .interior_faces()
        .iter()
        .map(|f| (f.m, f.n))
        .collect();
    if faces.is_empty() {
        return false;
    }
    let neigh = |&(m, n): &(i64, i64)| {
        [
            (m + 1, n),
            (m - 1, n),
            (m, n + 1),
            (m, n - 1),
            (m + 1, n + 1),
            (m - 1, n - 1),
        ]
    };
    // connectivity of the cluster
    let start = *faces.iter().next().unwrap();
    let mut seen = std::collections::HashSet::from([start]);
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        for t in neigh(&c) {
            if faces.contains(&t) && seen.insert(t) {
                queue.push_back(t);
            }
        }
    }
    if seen.len() != faces.len() {
        return false;
    }
    // complement connectivity in a margin box
    let (mut lo_m, mut hi_m, mut lo_n, mut hi_n) = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
    for &(m, n) in &faces {
        lo_m = lo_m.min(m);
        hi_m = hi_m.max(m);
        lo_n = lo_n.min(n);
        hi_n = hi_n.max(n);
    }
    let (lo_m, hi_m, lo_n, hi_n) = (lo_m - 1, hi_m + 1, lo_n - 1, hi_n + 1);
    let start = (lo_m, lo_n);
    let mut outside = std::collections::HashSet::from([start]);
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        for t in neigh(&c) {
            if t.0 < lo_m || t.0 > hi_m || t.1 < lo_n || t.1 > hi_n {
                continue;
            }
            if !faces.contains(&t) && outside.insert(t) {
                queue.push_back(t);
            }
        }
    }
    let box_cells = ((hi_m - lo_m + 1) * (hi_n - lo_n + 1)) as usize;
    outside.len() + faces.len() == box_cells
}
