//! Exact ground truth for small hexagonal-lattice instances: matching counts
//! by Kasteleyn determinant, inclusion probabilities through the inverse
//! matrix, brute-force enumeration, and exact height moments.
//!
//! On the honeycomb every bounded face of a clean region is a hexagon, for
//! which the Kasteleyn sign condition is `(-1)^{6/2+1} = +1`, so the unsigned
//! biadjacency matrix works: `#matchings = |det K|`.

use crate::hexlattice::{black_neighbors, duals_of_white, HexCoord, Role};
use std::collections::{HashMap, HashSet, VecDeque};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("region is unbalanced: {0} whites vs {1} blacks")]
    Unbalanced(usize, usize),
    #[error("matrix is singular: the region admits no perfect matching")]
    Singular,
    #[error("enumeration limit exceeded ({0} matchings)")]
    TooLarge(usize),
}

/// An induced subgraph of the hexagonal lattice.
#[derive(Clone, Debug)]
pub struct HexSubgraph {
    pub whites: Vec<HexCoord>,
    pub blacks: Vec<HexCoord>,
    /// Edges as index pairs `(white, black)`.
    pub edges: Vec<(usize, usize)>,
    /// Optional edge weights parallel to `edges` (1 when uniform).
    pub edge_weight: Vec<f64>,
    white_index: HashMap<(i64, i64), usize>,
    black_index: HashMap<(i64, i64), usize>,
}

impl HexSubgraph {
    pub fn new(mut whites: Vec<HexCoord>, mut blacks: Vec<HexCoord>) -> Self {
        whites.sort_by_key(|c| (c.n, c.m));
        blacks.sort_by_key(|c| (c.n, c.m));
        whites.dedup();
        blacks.dedup();
        let white_index: HashMap<(i64, i64), usize> =
            whites.iter().enumerate().map(|(i, c)| ((c.m, c.n), i)).collect();
        let black_index: HashMap<(i64, i64), usize> =
            blacks.iter().enumerate().map(|(i, c)| ((c.m, c.n), i)).collect();
        let mut edges = Vec::new();
        for (wi, w) in whites.iter().enumerate() {
            for b in black_neighbors(*w) {
                if let Some(&bi) = black_index.get(&(b.m, b.n)) {
                    edges.push((wi, bi));
                }
            }
        }
        let edge_weight = vec![1.0; edges.len()];
        HexSubgraph { whites, blacks, edges, edge_weight, white_index, black_index }
    }

    /// Sets the weight of an existing edge.
    pub fn set_weight(&mut self, w: usize, b: usize, weight: f64) {
        if let Some(k) = self.edges.iter().position(|&(ww, bb)| ww == w && bb == b) {
            self.edge_weight[k] = weight;
        }
    }

    /// Like [`HexSubgraph::new`] but keeping only the listed edges (pairs of
    /// coordinates). The all-ones Kasteleyn signing stays valid for arbitrary
    /// subgraphs of the honeycomb: every face length is 2 mod 4 once enclosed
    /// vertices are accounted for.
    pub fn with_edges(
        whites: Vec<HexCoord>,
        blacks: Vec<HexCoord>,
        allowed: &dyn Fn(HexCoord, HexCoord) -> bool,
    ) -> Self {
        let mut g = Self::new(whites, blacks);
        g.edges.retain(|&(w, b)| allowed(g.whites[w], g.blacks[b]));
        g.edge_weight = vec![1.0; g.edges.len()];
        g
    }

    /// Vertex set from arbitrary coordinates (roles split internally).
    pub fn from_vertices(vertices: impl IntoIterator<Item = HexCoord>) -> Self {
        let mut whites = Vec::new();
        let mut blacks = Vec::new();
        for c in vertices {
            match c.role {
                Role::White => whites.push(c),
                Role::Black => blacks.push(c),
                Role::Dual => {}
            }
        }
        Self::new(whites, blacks)
    }

    pub fn white_id(&self, c: HexCoord) -> Option<usize> {
        debug_assert_eq!(c.role, Role::White);
        self.white_index.get(&(c.m, c.n)).copied()
    }

    pub fn black_id(&self, c: HexCoord) -> Option<usize> {
        debug_assert_eq!(c.role, Role::Black);
        self.black_index.get(&(c.m, c.n)).copied()
    }

    pub fn is_balanced(&self) -> bool {
        self.whites.len() == self.blacks.len()
    }

    /// The faces (dual vertices) all of whose six surrounding vertices are in
    /// the region; heights live here.
    pub fn interior_faces(&self) -> Vec<HexCoord> {
        let mut faces = HashSet::new();
        for w in &self.whites {
            for d in duals_of_white(*w) {
                faces.insert((d.m, d.n));
            }
        }
        let mut out: Vec<HexCoord> = faces
            .into_iter()
            .filter(|&(m, n)| {
                // the hexagon at v(m,n): whites w(m,n), w(m+1,n+1)?? derive
                // from incidence: whites with v in duals_of_white, blacks with
                // v in duals_of_black
                let whites_ok = [(m, n), (m, n - 1), (m + 1, n)]
                    .iter()
                    .all(|&(a, b)| self.white_index.contains_key(&(a, b)));
                let blacks_ok = [(m, n), (m - 1, n - 1), (m, n - 1)]
                    .iter()
                    .all(|&(a, b)| self.black_index.contains_key(&(a, b)));
                whites_ok && blacks_ok
            })
            .map(|(m, n)| HexCoord::dual(m, n))
            .collect();
        out.sort_by_key(|c| (c.n, c.m));
        out
    }
}

/// The hexagonal region with side lengths `a, b, c` (a plane-partition box),
/// built from the vertices strictly inside the hexagon polygon on the dual
/// triangular lattice.
pub fn hexagon_region(a: i64, b: i64, c: i64) -> HexSubgraph {
    use crate::hexlattice::{plane_position, E1, E2, V0};
    let mut poly = Vec::new();
    let mut p = V0;
    let steps = [
        (E1 + E2, a),
        (E2, b),
        (-E1, c),
        (-(E1 + E2), a),
        (-E2, b),
        (E1, c),
    ];
    for (d, k) in steps {
        for _ in 0..k {
            poly.push(p);
            p += d;
        }
    }
    let mut vertices = Vec::new();
    let r = (a + b + c) as i64 + 2;
    for m in -r..=r {
        for n in -r..=r {
            for role in [Role::White, Role::Black] {
                let cand = HexCoord { m, n, role };
                let pos = plane_position(cand, 1.0);
                if crate::geom::point_in_polygon(pos, &poly) {
                    vertices.push(cand);
                }
            }
        }
    }
    HexSubgraph::from_vertices(vertices)
}

/// LU decomposition with partial pivoting, log-scaled to survive large
/// regions. Returns `(log |det|, permutation, factors)` or `None` if singular.
struct Lu {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
    log_det: f64,
    row_scale: Vec<f64>,
}

fn lu_factor(matrix: &[f64], n: usize) -> Option<Lu> {
    let mut lu = matrix.to_vec();
    let mut piv: Vec<usize> = (0..n).collect();
    let mut log_det = 0.0;
    let row_scale = vec![0.0; n];
    for k in 0..n {
        let (mut pmax, mut vmax) = (k, 0.0f64);
        for i in k..n {
            let v = lu[i * n + k].abs();
            if v > vmax {
                vmax = v;
                pmax = i;
            }
        }
        if vmax < 1e-300 {
            return None;
        }
        if pmax != k {
            for j in 0..n {
                lu.swap(k * n + j, pmax * n + j);
            }
            piv.swap(k, pmax);
        }
        log_det += lu[k * n + k].abs().ln();
        let pivot = lu[k * n + k];
        for i in k + 1..n {
            let f = lu[i * n + k] / pivot;
            lu[i * n + k] = f;
            if f != 0.0 {
                for j in k + 1..n {
                    lu[i * n + j] -= f * lu[k * n + j];
                }
            }
        }
    }
    Some(Lu { n, lu, piv, log_det, row_scale })
}

impl Lu {
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let _ = &self.row_scale;
        let mut x: Vec<f64> = self.piv.iter().map(|&p| rhs[p]).collect();
        for i in 1..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }
}

fn biadjacency(g: &HexSubgraph) -> Vec<f64> {
    let n = g.whites.len();
    let mut k = vec![0.0; n * n];
    for (&(w, b), &x) in g.edges.iter().zip(g.edge_weight.iter()) {
        k[w * n + b] = x;
    }
    k
}

/// Number of perfect matchings by `|det K|`, rounded to the nearest integer.
pub fn count_matchings(g: &HexSubgraph) -> Result<u64, OracleError> {
    if !g.is_balanced() {
        return Err(OracleError::Unbalanced(g.whites.len(), g.blacks.len()));
    }
    if g.whites.is_empty() {
        return Ok(1);
    }
    let n = g.whites.len();
    match lu_factor(&biadjacency(g), n) {
        None => Ok(0),
        Some(lu) => Ok(lu.log_det.exp().round() as u64),
    }
}

/// `log #matchings`, usable when the count overflows; `None` if none exist.
pub fn log_count_matchings(g: &HexSubgraph) -> Option<f64> {
    if !g.is_balanced() || g.whites.is_empty() {
        return if g.is_balanced() { Some(0.0) } else { None };
    }
    lu_factor(&biadjacency(g), g.whites.len()).map(|lu| lu.log_det)
}

/// Whether a perfect matching exists (Hopcroft–Karp style augmentation;
/// exact, no numerics).
pub fn is_matchable(g: &HexSubgraph) -> bool {
    if !g.is_balanced() {
        return false;
    }
    let nw = g.whites.len();
    let nb = g.blacks.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nw];
    for &(w, b) in &g.edges {
        adj[w].push(b);
    }
    let mut match_w: Vec<Option<usize>> = vec![None; nw];
    let mut match_b: Vec<Option<usize>> = vec![None; nb];
    fn augment(
        w: usize,
        adj: &[Vec<usize>],
        match_w: &mut [Option<usize>],
        match_b: &mut [Option<usize>],
        seen: &mut [bool],
    ) -> bool {
        for &b in &adj[w] {
            if seen[b] {
                continue;
            }
            seen[b] = true;
            if match_b[b].is_none()
                || augment(match_b[b].unwrap(), adj, match_w, match_b, seen)
            {
                match_w[w] = Some(b);
                match_b[b] = Some(w);
                return true;
            }
        }
        false
    }
    for w in 0..nw {
        let mut seen = vec![false; nb];
        if !augment(w, &adj, &mut match_w, &mut match_b, &mut seen) {
            return false;
        }
    }
    true
}

/// All perfect matchings by backtracking, each as a vector `black_of_white`.
/// Bails out beyond `limit`.
pub fn enumerate_matchings(g: &HexSubgraph, limit: usize) -> Result<Vec<Vec<usize>>, OracleError> {
    if !g.is_balanced() {
        return Err(OracleError::Unbalanced(g.whites.len(), g.blacks.len()));
    }
    let nw = g.whites.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nw];
    for &(w, b) in &g.edges {
        adj[w].push(b);
    }
    let mut out = Vec::new();
    let mut used_b = vec![false; g.blacks.len()];
    let mut pick = vec![usize::MAX; nw];
    fn rec(
        w: usize,
        nw: usize,
        adj: &[Vec<usize>],
        used_b: &mut [bool],
        pick: &mut [usize],
        out: &mut Vec<Vec<usize>>,
        limit: usize,
    ) -> Result<(), OracleError> {
        if w == nw {
            out.push(pick.to_vec());
            if out.len() > limit {
                return Err(OracleError::TooLarge(out.len()));
            }
            return Ok(());
        }
        for &b in &adj[w] {
            if !used_b[b] {
                used_b[b] = true;
                pick[w] = b;
                rec(w + 1, nw, adj, used_b, pick, out, limit)?;
                used_b[b] = false;
            }
        }
        Ok(())
    }
    rec(0, nw, &adj, &mut used_b, &mut pick, &mut out, limit)?;
    Ok(out)
}

/// Exact inclusion probability of the edge `(w, b)` under the uniform
/// measure: `K(w,b) K^{-1}(b,w)`.
pub fn edge_probability(g: &HexSubgraph, w: usize, b: usize) -> Result<f64, OracleError> {
    if !g.is_balanced() {
        return Err(OracleError::Unbalanced(g.whites.len(), g.blacks.len()));
    }
    if !g.edges.contains(&(w, b)) {
        return Ok(0.0);
    }
    let n = g.whites.len();
    let lu = lu_factor(&biadjacency(g), n).ok_or(OracleError::Singular)?;
    // column w of K^{-1}: solve K x = e_w
    let mut rhs = vec![0.0; n];
    rhs[w] = 1.0;
    let x = lu.solve(&rhs);
    let kwb = g
        .edges
        .iter()
        .position(|&(ww, bb)| ww == w && bb == b)
        .map(|k| g.edge_weight[k])
        .unwrap_or(0.0);
    Ok(kwb * x[b])
}

/// All inclusion probabilities at once (one LU, `n` solves).
pub fn edge_probabilities(g: &HexSubgraph) -> Result<HashMap<(usize, usize), f64>, OracleError> {
    if !g.is_balanced() {
        return Err(OracleError::Unbalanced(g.whites.len(), g.blacks.len()));
    }
    let n = g.whites.len();
    let lu = lu_factor(&biadjacency(g), n).ok_or(OracleError::Singular)?;
    let mut by_white: HashMap<usize, Vec<usize>> = HashMap::new();
    for &(w, b) in &g.edges {
        by_white.entry(w).or_default().push(b);
    }
    let weight_of: HashMap<(usize, usize), f64> = g
        .edges
        .iter()
        .zip(g.edge_weight.iter())
        .map(|(&e, &x)| (e, x))
        .collect();
    let mut out = HashMap::new();
    for (&w, bs) in &by_white {
        let mut rhs = vec![0.0; n];
        rhs[w] = 1.0;
        let x = lu.solve(&rhs);
        for &b in bs {
            out.insert((w, b), weight_of[&(w, b)] * x[b]);
        }
    }
    Ok(out)
}

/// Exact centred moments of the height at given faces under the uniform
/// measure, by full enumeration. Returns `(mean, covariance)` of the heights
/// (in units of 1, i.e. thirds divided by 3).
pub fn exact_height_moments(
    g: &HexSubgraph,
    faces: &[HexCoord],
    limit: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>), OracleError> {
    let matchings = enumerate_matchings(g, limit)?;
    if matchings.is_empty() {
        return Err(OracleError::Singular);
    }
    let k = faces.len();
    let mut sum = vec![0.0; k];
    let mut sum2 = vec![vec![0.0; k]; k];
    for m in &matchings {
        let h = crate::height::heights_thirds(g, m, faces);
        let h: Vec<f64> = h.iter().map(|&t| t as f64 / 3.0).collect();
        for i in 0..k {
            sum[i] += h[i];
            for j in 0..k {
                sum2[i][j] += h[i] * h[j];
            }
        }
    }
    let n = matchings.len() as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let mut cov = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            cov[i][j] = sum2[i][j] / n - mean[i] * mean[j];
        }
    }
    Ok((mean, cov))
}

/// Random simply connected region grown from hexagon faces: the vertex set is
/// all vertices incident to a face of the cluster. Rejects clusters with
/// holes. Intended for oracle cross-checks.
pub fn random_face_region(n_faces: usize, seed: u64) -> HexSubgraph {
    use rand::Rng;
    let mut rng = crate::rng::stream_rng(seed, 0);
    loop {
        let mut cluster: HashSet<(i64, i64)> = HashSet::new();
        cluster.insert((0, 0));
        let mut frontier: Vec<(i64, i64)> = vec![(0, 0)];
        while cluster.len() < n_faces && !frontier.is_empty() {
            let idx = rng.gen_range(0..frontier.len());
            let (m, n) = frontier[idx];
            let neigh = [
                (m + 1, n),
                (m - 1, n),
                (m, n + 1),
                (m, n - 1),
                (m + 1, n + 1),
                (m - 1, n - 1),
            ];
            let candidates: Vec<(i64, i64)> =
                neigh.iter().copied().filter(|c| !cluster.contains(c)).collect();
            if candidates.is_empty() {
                frontier.swap_remove(idx);
                continue;
            }
            let pick = candidates[rng.gen_range(0..candidates.len())];
            cluster.insert(pick);
            frontier.push(pick);
        }
        // fill-in pass: faces surrounded on >= 5 sides join the cluster
        loop {
            let mut added = false;
            let all: Vec<(i64, i64)> = cluster.iter().copied().collect();
            let mut candidates: HashSet<(i64, i64)> = HashSet::new();
            for (m, n) in all {
                for c in [
                    (m + 1, n),
                    (m - 1, n),
                    (m, n + 1),
                    (m, n - 1),
                    (m + 1, n + 1),
                    (m - 1, n - 1),
                ] {
                    if !cluster.contains(&c) {
                        candidates.insert(c);
                    }
                }
            }
            for (m, n) in candidates {
                let count = [
                    (m + 1, n),
                    (m - 1, n),
                    (m, n + 1),
                    (m, n - 1),
                    (m + 1, n + 1),
                    (m - 1, n - 1),
                ]
                .iter()
                .filter(|c| cluster.contains(c))
                .count();
                if count >= 5 {
                    cluster.insert((m, n));
                    added = true;
                }
            }
            if !added {
                break;
            }
        }
        // hole check: complement within a bounding box must be connected
        let (mut lo_m, mut hi_m, mut lo_n, mut hi_n) = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
        for &(m, n) in &cluster {
            lo_m = lo_m.min(m);
            hi_m = hi_m.max(m);
            lo_n = lo_n.min(n);
            hi_n = hi_n.max(n);
        }
        let (lo_m, hi_m, lo_n, hi_n) = (lo_m - 1, hi_m + 1, lo_n - 1, hi_n + 1);
        let mut outside: HashSet<(i64, i64)> = HashSet::new();
        let mut queue = VecDeque::from([(lo_m, lo_n)]);
        outside.insert((lo_m, lo_n));
        while let Some((m, n)) = queue.pop_front() {
            for c in [
                (m + 1, n),
                (m - 1, n),
                (m, n + 1),
                (m, n - 1),
                (m + 1, n + 1),
                (m - 1, n - 1),
            ] {
                if c.0 < lo_m || c.0 > hi_m || c.1 < lo_n || c.1 > hi_n {
                    continue;
                }
                if !cluster.contains(&c) && !outside.contains(&c) {
                    outside.insert(c);
                    queue.push_back(c);
                }
            }
        }
        let total = ((hi_m - lo_m + 1) * (hi_n - lo_n + 1)) as usize;
        if outside.len() + cluster.len() != total {
            continue; // hole: resample
        }
        // vertex set: everything incident to a cluster face
        let mut vertices: HashSet<(i64, i64, bool)> = HashSet::new();
        for &(m, n) in &cluster {
            let v = HexCoord::dual(m, n);
            // the six vertices around face v
            for w in [(m, n), (m, n - 1), (m + 1, n)] {
                let _ = v;
                vertices.insert((w.0, w.1, true));
            }
            for b in [(m, n), (m - 1, n - 1), (m, n - 1)] {
                vertices.insert((b.0, b.1, false));
            }
        }
        let g = HexSubgraph::from_vertices(vertices.into_iter().map(|(m, n, white)| HexCoord {
            m,
            n,
            role: if white { Role::White } else { Role::Black },
        }));
        if g.is_balanced() {
            return g;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_hexagon_has_two_matchings() {
        let g = hexagon_region(1, 1, 1);
        assert_eq!(g.whites.len(), 3);
        assert_eq!(g.blacks.len(), 3);
        assert_eq!(count_matchings(&g).unwrap(), 2);
        assert_eq!(enumerate_matchings(&g, 10).unwrap().len(), 2);
    }

    /// MacMahon box formula for the hexagon.
    fn macmahon(a: u64, b: u64, c: u64) -> u64 {
        let mut num = 1f64;
        for i in 1..=a {
            for j in 1..=b {
                for k in 1..=c {
                    num *= (i + j + k - 1) as f64 / (i + j + k - 2) as f64;
                }
            }
        }
        num.round() as u64
    }

    #[test]
    fn hexagons_match_macmahon_and_enumeration() {
        for (a, b, c) in [(1, 1, 1), (2, 2, 2), (2, 1, 1), (3, 2, 1), (2, 2, 1)] {
            let g = hexagon_region(a, b, c);
            let det = count_matchings(&g).unwrap();
            let mm = macmahon(a as u64, b as u64, c as u64);
            assert_eq!(det, mm, "hexagon {a},{b},{c}");
            if mm <= 2000 {
                let en = enumerate_matchings(&g, 5000).unwrap().len() as u64;
                assert_eq!(det, en, "enumeration {a},{b},{c}");
            }
        }
        assert_eq!(macmahon(2, 2, 2), 20);
    }

    #[test]
    fn unbalanced_region_rejected() {
        let g = HexSubgraph::new(
            vec![HexCoord::white(0, 0), HexCoord::white(1, 0)],
            vec![HexCoord::black(0, 0)],
        );
        assert!(matches!(count_matchings(&g), Err(OracleError::Unbalanced(2, 1))));
    }

    #[test]
    fn edge_probabilities_match_enumeration() {
        let g = hexagon_region(1, 1, 1);
        let matchings = enumerate_matchings(&g, 10).unwrap();
        let n = matchings.len() as f64;
        let probs = edge_probabilities(&g).unwrap();
        for &(w, b) in &g.edges {
            let freq = matchings.iter().filter(|m| m[w] == b).count() as f64 / n;
            let p = probs[&(w, b)];
            assert!((p - freq).abs() < 1e-10, "edge ({w},{b}): {p} vs {freq}");
            assert!((-1e-10..=1.0 + 1e-10).contains(&p));
        }
        // larger instance
        let g = hexagon_region(2, 2, 1);
        let matchings = enumerate_matchings(&g, 100_000).unwrap();
        let n = matchings.len() as f64;
        let probs = edge_probabilities(&g).unwrap();
        for &(w, b) in &g.edges {
            let freq = matchings.iter().filter(|m| m[w] == b).count() as f64 / n;
            assert!((probs[&(w, b)] - freq).abs() < 1e-9);
        }
    }

    #[test]
    fn white_probabilities_sum_to_one() {
        let g = hexagon_region(2, 2, 2);
        let probs = edge_probabilities(&g).unwrap();
        for w in 0..g.whites.len() {
            let total: f64 = g
                .edges
                .iter()
                .filter(|&&(ww, _)| ww == w)
                .map(|&(ww, bb)| probs[&(ww, bb)])
                .sum();
            assert!((total - 1.0).abs() < 1e-10, "white {w}: {total}");
        }
    }

    #[test]
    fn random_regions_det_equals_enumeration() {
        for seed in 0..8 {
            let g = random_face_region(5, seed);
            let det = count_matchings(&g).unwrap();
            let en = enumerate_matchings(&g, 20_000).map(|v| v.len() as u64).unwrap_or(0);
            assert_eq!(det, en, "seed {seed}");
        }
    }

    #[test]
    fn matchability_agrees_with_det() {
        for seed in 0..6 {
            let g = random_face_region(4, seed);
            assert_eq!(is_matchable(&g), count_matchings(&g).unwrap() > 0);
        }
    }

    #[test]
    fn single_hexagon_height_moments() {
        let g = hexagon_region(1, 1, 1);
        let faces = g.interior_faces();
        assert_eq!(faces.len(), 1);
        let (_, cov) = exact_height_moments(&g, &faces, 10).unwrap();
        // two matchings, centre heights differing by 1: variance = 1/4
        assert!((cov[0][0] - 0.25).abs() < 1e-12, "var {}", cov[0][0]);
    }

    #[test]
    fn covariance_psd_and_symmetric_mean() {
        let g = hexagon_region(2, 2, 2);
        let faces = g.interior_faces();
        let (_mean, cov) = exact_height_moments(&g, &faces, 2000).unwrap();
        // psd: diagonal nonnegative, 2x2 minors nonnegative
        for i in 0..faces.len() {
            assert!(cov[i][i] >= -1e-12);
            for j in 0..faces.len() {
                let det2 = cov[i][i] * cov[j][j] - cov[i][j] * cov[i][j];
                assert!(det2 >= -1e-9);
                assert!((cov[i][j] - cov[j][i]).abs() < 1e-12);
            }
        }
    }
}
