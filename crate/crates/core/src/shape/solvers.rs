//! Plane solvers: the inhomogeneous Cauchy–Riemann equation, the Beltrami
//! equation, and a boundary-matching Riemann map.
//!
//! The Cauchy transform `C[g](z) = (1/pi) int g(w)/(z-w) dA(w)` satisfies
//! `dbar C[g] = g`; the Beurling transform `S = d C` has the symbol needed
//! for the Neumann iteration `h = mu + mu S h`, `f = z + C[h]`, which builds
//! the principal solution of `dbar f = mu d f` for compactly supported `mu`.
//! Both transforms are discretized as exact-kernel convolutions on a padded
//! grid (cell-averaged kernels near the singularity) and evaluated by FFT.

use crate::geom::C;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("iteration failed to converge: residual {0:.3e} after {1} sweeps")]
    NoConvergence(f64, usize),
    #[error("boundary is not star-shaped about the chosen centre")]
    NotStarShaped,
    #[error("boundary fit residual too large: {0:.3e}")]
    FitResidual(f64),
}

/// A complex field sampled on the square grid `center + [-half, half]^2`,
/// `n x n` samples at cell centres.
#[derive(Clone, Debug)]
pub struct GridField {
    pub center: C,
    pub half: f64,
    pub n: usize,
    pub data: Vec<Complex64>,
}

impl GridField {
    pub fn zeros(center: C, half: f64, n: usize) -> Self {
        GridField { center, half, n, data: vec![C::new(0.0, 0.0); n * n] }
    }

    pub fn from_fn<F: FnMut(C) -> Complex64>(center: C, half: f64, n: usize, mut f: F) -> Self {
        let mut g = Self::zeros(center, half, n);
        for j in 0..n {
            for i in 0..n {
                g.data[j * n + i] = f(g.point(i, j));
            }
        }
        g
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half / self.n as f64
    }

    pub fn point(&self, i: usize, j: usize) -> C {
        let h = self.h();
        self.center
            + C::new(
                -self.half + (i as f64 + 0.5) * h,
                -self.half + (j as f64 + 0.5) * h,
            )
    }

    /// Bilinear interpolation.
    pub fn eval(&self, z: C) -> Complex64 {
        let h = self.h();
        let x = (z.re - self.center.re + self.half) / h - 0.5;
        let y = (z.im - self.center.im + self.half) / h - 0.5;
        let i0 = (x.floor() as i64).clamp(0, self.n as i64 - 2) as usize;
        let j0 = (y.floor() as i64).clamp(0, self.n as i64 - 2) as usize;
        let fx = (x - i0 as f64).clamp(0.0, 1.0);
        let fy = (y - j0 as f64).clamp(0.0, 1.0);
        let g = |i: usize, j: usize| self.data[j * self.n + i];
        g(i0, j0) * (1.0 - fx) * (1.0 - fy)
            + g(i0 + 1, j0) * fx * (1.0 - fy)
            + g(i0, j0 + 1) * (1.0 - fx) * fy
            + g(i0 + 1, j0 + 1) * fx * fy
    }

    /// Centered finite-difference `dbar` and `d` (interior points only).
    pub fn wirtinger(&self, i: usize, j: usize) -> Option<(Complex64, Complex64)> {
        if i == 0 || j == 0 || i + 1 >= self.n || j + 1 >= self.n {
            return None;
        }
        let h = self.h();
        let gx = (self.data[j * self.n + i + 1] - self.data[j * self.n + i - 1]) / (2.0 * h);
        let gy =
            (self.data[(j + 1) * self.n + i] - self.data[(j - 1) * self.n + i]) / (2.0 * h);
        let i_c = C::new(0.0, 1.0);
        Some(((gx + i_c * gy) / 2.0, (gx - i_c * gy) / 2.0))
    }
}

/// 2D FFT working buffers shared by the convolution calls.
struct Fft2 {
    n: usize,
    fwd: Arc<dyn rustfft::Fft<f64>>,
    inv: Arc<dyn rustfft::Fft<f64>>,
}

impl Fft2 {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 { n, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, true);
    }

    fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, false);
        let scale = 1.0 / (self.n * self.n) as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    fn transform(&self, data: &mut [Complex64], fwd: bool) {
        let n = self.n;
        let plan = if fwd { &self.fwd } else { &self.inv };
        for row in data.chunks_mut(n) {
            plan.process(row);
        }
        let mut col = vec![C::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n {
                col[j] = data[j * n + i];
            }
            plan.process(&mut col);
            for j in 0..n {
                data[j * n + i] = col[j];
            }
        }
    }
}

/// Cell-averaged kernel sample: `K` integrated over the `h`-cell at offset
/// `u` by 4x4 midpoint subsampling (the self cell vanishes by symmetry).
fn cell_avg<K: Fn(C) -> Complex64>(kernel: &K, u: C, h: f64, near: f64) -> Complex64 {
    if u.norm() < 0.25 * h {
        return C::new(0.0, 0.0); // principal value over the centred cell
    }
    if u.norm() > near {
        return kernel(u);
    }
    let mut acc = C::new(0.0, 0.0);
    let k = 4;
    for a in 0..k {
        for b in 0..k {
            let t = C::new(
                (a as f64 + 0.5) / k as f64 - 0.5,
                (b as f64 + 0.5) / k as f64 - 0.5,
            ) * h;
            acc += kernel(u - t);
        }
    }
    acc / (k * k) as f64
}

/// Aperiodic convolution of `g` (as a density: multiplied by the cell area)
/// with the kernel, via zero padding to `2n`.
fn convolve<K: Fn(C) -> Complex64>(g: &GridField, kernel: K, near_cells: f64) -> GridField {
    let n = g.n;
    let m = 2 * n;
    let h = g.h();
    let fft = Fft2::new(m);
    let mut a = vec![C::new(0.0, 0.0); m * m];
    for j in 0..n {
        for i in 0..n {
            a[j * m + i] = g.data[j * n + i];
        }
    }
    let mut k = vec![C::new(0.0, 0.0); m * m];
    let near = near_cells * h;
    for j in 0..m {
        for i in 0..m {
            // offsets wrap: index i corresponds to offset i (i < n) or i - m
            let oi = if i < n { i as f64 } else { i as f64 - m as f64 };
            let oj = if j < n { j as f64 } else { j as f64 - m as f64 };
            let u = C::new(oi * h, oj * h);
            k[j * m + i] = cell_avg(&kernel, u, h, near);
        }
    }
    fft.forward(&mut a);
    fft.forward(&mut k);
    for (x, y) in a.iter_mut().zip(k.iter()) {
        *x *= *y;
    }
    fft.inverse(&mut a);
    let mut out = GridField::zeros(g.center, g.half, n);
    let area = h * h;
    for j in 0..n {
        for i in 0..n {
            out.data[j * n + i] = a[j * m + i] * area;
        }
    }
    out
}

/// The Cauchy transform: `dbar cauchy(g) = g` in the interior.
pub fn cauchy_transform(g: &GridField) -> GridField {
    convolve(g, |u| 1.0 / (std::f64::consts::PI * u), 6.0)
}

/// The Beurling transform `S g = d C[g]` (principal value).
pub fn beurling_transform(g: &GridField) -> GridField {
    convolve(g, |u| -1.0 / (std::f64::consts::PI * u * u), 6.0)
}

/// Solves `dbar f = rhs` with `f -> 0` at infinity (for compactly supported
/// rhs); any solution differs by an entire function.
pub fn solve_dbar(rhs: &GridField) -> GridField {
    cauchy_transform(rhs)
}

/// Residual `max |dbar f - rhs|` over interior points where `|rhs|` is
/// sampled, by centred differences.
pub fn dbar_residual(f: &GridField, rhs: &GridField) -> f64 {
    let mut worst = 0.0f64;
    let margin = f.n / 8;
    for j in margin..f.n - margin {
        for i in margin..f.n - margin {
            if let Some((db, _)) = f.wirtinger(i, j) {
                worst = worst.max((db - rhs.data[j * f.n + i]).norm());
            }
        }
    }
    worst
}

pub struct BeltramiSolution {
    /// `f(z) - z` on the grid.
    pub correction: GridField,
    pub iterations: usize,
    pub update_norm: f64,
}

impl BeltramiSolution {
    pub fn eval(&self, z: C) -> C {
        z + self.correction.eval(z)
    }
}

/// Principal solution of `dbar f = mu d f`, `f(z) = z + O(1/z)`, by Neumann
/// iteration `h <- mu (1 + S h)` and `f = z + C[h]`.
pub fn solve_beltrami(mu: &GridField, tol: f64, max_iter: usize) -> Result<BeltramiSolution, SolverError> {
    let sup: f64 = mu.data.iter().map(|m| m.norm()).fold(0.0, f64::max);
    if sup >= 0.999 {
        return Err(SolverError::NoConvergence(sup, 0));
    }
    let mut h = mu.clone();
    let mut update = f64::INFINITY;
    let mut iters = 0;
    for it in 0..max_iter {
        let sh = beurling_transform(&h);
        let mut next = mu.clone();
        for (v, (m, s)) in next
            .data
            .iter_mut()
            .zip(mu.data.iter().zip(sh.data.iter()))
        {
            *v = *m + *m * *s;
        }
        update = next
            .data
            .iter()
            .zip(h.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        h = next;
        iters = it + 1;
        if update < tol {
            break;
        }
    }
    if update >= tol {
        return Err(SolverError::NoConvergence(update, iters));
    }
    Ok(BeltramiSolution { correction: cauchy_transform(&h), iterations: iters, update_norm: update })
}

/// Beltrami residual `max |dbar f - mu d f|` away from the support edge.
pub fn beltrami_residual(sol: &BeltramiSolution, mu: &GridField) -> f64 {
    let g = &sol.correction;
    let mut worst = 0.0f64;
    let margin = g.n / 8;
    for j in margin..g.n - margin {
        for i in margin..g.n - margin {
            if let Some((db, d)) = g.wirtinger(i, j) {
                // f = z + g: dbar f = dbar g, d f = 1 + d g
                let m = mu.data[j * g.n + i];
                worst = worst.max((db - m * (C::new(1.0, 0.0) + d)).norm());
            }
        }
    }
    worst
}

/// Conformal map of a smooth star-shaped Jordan domain onto the unit disk by
/// Theodorsen iteration plus a holomorphic boundary fit.
///
/// The returned map is exactly holomorphic (a polynomial composed with a disk
/// automorphism); the fit residual measures how nearly it takes the boundary
/// to the unit circle.
pub struct RiemannMap {
    pub center: C,
    pub scale: f64,
    pub coeffs: Vec<Complex64>,
    pub mobius_a: Complex64,
    pub rotation: Complex64,
    pub fit_residual: f64,
}

impl RiemannMap {
    fn poly(&self, zeta: C) -> C {
        let t = (zeta - self.center) / self.scale;
        let mut acc = C::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    fn poly_deriv(&self, zeta: C) -> C {
        let t = (zeta - self.center) / self.scale;
        let mut acc = C::new(0.0, 0.0);
        for (k, &c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * t + c * k as f64;
        }
        acc / self.scale
    }

    pub fn eval(&self, zeta: C) -> C {
        let p = self.poly(zeta);
        self.rotation * (p - self.mobius_a) / (C::new(1.0, 0.0) - self.mobius_a.conj() * p)
    }

    pub fn deriv(&self, zeta: C) -> C {
        let p = self.poly(zeta);
        let dp = self.poly_deriv(zeta);
        let denom = C::new(1.0, 0.0) - self.mobius_a.conj() * p;
        self.rotation * dp * (C::new(1.0, 0.0) - self.mobius_a.norm_sqr()) / (denom * denom)
    }
}

/// Circle conjugation operator on uniform samples via FFT.
fn conjugate_periodic(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let ifft = FftPlanner::new().plan_fft_inverse(n);
    let mut data: Vec<Complex64> = u.iter().map(|&x| C::new(x, 0.0)).collect();
    fft.process(&mut data);
    for (m, v) in data.iter_mut().enumerate() {
        let freq = if m == 0 {
            0.0
        } else if m <= n / 2 {
            1.0
        } else {
            -1.0
        };
        // conjugate multiplier -i sign(m)
        *v *= C::new(0.0, -freq);
    }
    ifft.process(&mut data);
    data.iter().map(|v| v.re / n as f64).collect()
}

/// Builds the Riemann map of the domain bounded by `boundary` (positively
/// oriented, smooth, star-shaped about `center`) sending `center` to 0 with
/// positive derivative. `degree` is the polynomial degree of the fit.
pub fn riemann_map(boundary: &[C], center: C, degree: usize) -> Result<RiemannMap, SolverError> {
    let n_theta = 512usize;
    // polar radius: resample log rho onto a uniform angle grid
    let mut samples: Vec<(f64, f64)> = boundary
        .iter()
        .map(|&z| {
            let d = z - center;
            (d.arg(), d.norm().ln())
        })
        .collect();
    samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // reject if angles are not strictly increasing (not star-shaped)
    for w in samples.windows(2) {
        if w[1].0 - w[0].0 <= 0.0 {
            return Err(SolverError::NotStarShaped);
        }
    }
    let log_rho = |theta: f64| -> f64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut t = theta;
        while t < samples[0].0 {
            t += two_pi;
        }
        while t >= samples[0].0 + two_pi {
            t -= two_pi;
        }
        // binary search for the straddling pair
        let mut lo = 0;
        let mut hi = samples.len();
        while lo + 1 < hi {
            let mid = (lo + hi) / 2;
            if samples[mid].0 <= t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (t0, v0) = samples[lo];
        let (t1, v1) = if lo + 1 < samples.len() {
            samples[lo + 1]
        } else {
            (samples[0].0 + two_pi, samples[0].1)
        };
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    };

    // Theodorsen: theta(phi) = phi + K[log rho(theta(.))](phi)
    let mut theta: Vec<f64> = (0..n_theta)
        .map(|k| 2.0 * std::f64::consts::PI * k as f64 / n_theta as f64)
        .collect();
    let phis = theta.clone();
    for _ in 0..200 {
        let u: Vec<f64> = theta.iter().map(|&t| log_rho(t)).collect();
        let ku = conjugate_periodic(&u);
        let mut delta = 0.0f64;
        for k in 0..n_theta {
            let next = phis[k] + ku[k];
            delta = delta.max((next - theta[k]).abs());
            theta[k] = next;
        }
        if delta < 1e-13 {
            break;
        }
    }
    // boundary correspondence: point at angle theta(phi) maps to e^{i phi}
    let scale = boundary
        .iter()
        .map(|&z| (z - center).norm())
        .fold(0.0f64, f64::max);
    let m = n_theta;
    let mut pts = Vec::with_capacity(m);
    let mut vals = Vec::with_capacity(m);
    for k in 0..m {
        let t = theta[k];
        let zeta = center + C::from_polar(log_rho(t).exp(), t);
        pts.push(zeta);
        vals.push(C::from_polar(1.0, phis[k]));
    }
    // least-squares polynomial fit by modified Gram-Schmidt QR
    let cols = degree + 1;
    let mut a: Vec<Vec<C>> = (0..cols)
        .map(|k| {
            pts.iter()
                .map(|&z| {
                    let t = (z - center) / scale;
                    t.powu(k as u32)
                })
                .collect()
        })
        .collect();
    let mut r = vec![vec![C::new(0.0, 0.0); cols]; cols];
    for k in 0..cols {
        let norm: f64 = a[k].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        r[k][k] = C::new(norm, 0.0);
        for v in a[k].iter_mut() {
            *v /= norm;
        }
        let qk = a[k].clone();
        for j in k + 1..cols {
            let dot: C = qk.iter().zip(a[j].iter()).map(|(q, v)| q.conj() * v).sum();
            r[k][j] = dot;
            for (v, q) in a[j].iter_mut().zip(qk.iter()) {
                *v -= q * dot;
            }
        }
    }
    // rhs projections and back substitution
    let mut y = vec![C::new(0.0, 0.0); cols];
    for k in 0..cols {
        y[k] = a[k]
            .iter()
            .zip(vals.iter())
            .map(|(q, v)| q.conj() * v)
            .sum();
    }
    let mut coeffs = vec![C::new(0.0, 0.0); cols];
    for k in (0..cols).rev() {
        let mut s = y[k];
        for j in k + 1..cols {
            s -= r[k][j] * coeffs[j];
        }
        coeffs[k] = s / r[k][k];
    }
    // fit residual on the boundary
    let eval_poly = |zeta: C| {
        let t = (zeta - center) / scale;
        let mut acc = C::new(0.0, 0.0);
        for &c in coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    };
    let mut residual = 0.0f64;
    for (p, v) in pts.iter().zip(vals.iter()) {
        residual = residual.max((eval_poly(*p) - v).norm());
    }
    let mut map = RiemannMap {
        center,
        scale,
        coeffs,
        mobius_a: C::new(0.0, 0.0),
        rotation: C::new(1.0, 0.0),
        fit_residual: residual,
    };
    // centre exactly and rotate to a positive derivative
    map.mobius_a = map.poly(center);
    let d = map.deriv(center);
    map.rotation = C::from_polar(1.0, -d.arg());
    Ok(map)
}
