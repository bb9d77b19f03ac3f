//! Coordinates and slope relations for the hexagonal lattice.
//!
//! The lattice is embedded with regular hexagons of side `sqrt(3)/3`, so the
//! fundamental translations `e1 = exp(-i pi/6)` and `e2 = i` have unit length.
//! A white vertex sits at the left end of each horizontal edge and the black
//! vertex at its right end; both carry the same integer coordinates `(m, n)`.
//! The dual vertex `v(0,0)` is the face centre immediately below the edge
//! `(w(0,0), b(0,0))`.
//!
//! All fundamental-domain offsets live in this module and nowhere else:
//! `w0 = 0`, `b0 = sqrt(3)/3`, `v0 = sqrt(3)/6 - i/2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hexagon side length of the unit-mesh lattice.
pub const HEX_SIDE: f64 = 0.577_350_269_189_625_8; // sqrt(3)/3

/// `e1 = exp(-i pi/6)`, first fundamental translation (unit length).
pub const E1: Complex64 = Complex64::new(0.866_025_403_784_438_6, -0.5);
/// `e2 = i`, second fundamental translation.
pub const E2: Complex64 = Complex64::new(0.0, 1.0);

/// Base point of white vertices.
pub const W0: Complex64 = Complex64::new(0.0, 0.0);
/// Base point of black vertices (right end of the horizontal edge at `w0`).
pub const B0: Complex64 = Complex64::new(HEX_SIDE, 0.0);
/// Base point of dual vertices (face centre below the edge `(w0, b0)`).
pub const V0: Complex64 = Complex64::new(HEX_SIDE / 2.0, -0.5);

/// Role of a lattice site.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    White,
    Black,
    Dual,
}

/// Integer coordinates plus a role; the embedding is `base(role) + m e1 + n e2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HexCoord {
    pub m: i64,
    pub n: i64,
    pub role: Role,
}

impl HexCoord {
    pub fn white(m: i64, n: i64) -> Self {
        HexCoord { m, n, role: Role::White }
    }
    pub fn black(m: i64, n: i64) -> Self {
        HexCoord { m, n, role: Role::Black }
    }
    pub fn dual(m: i64, n: i64) -> Self {
        HexCoord { m, n, role: Role::Dual }
    }
}

/// Edge types by direction: horizontal edges are `a`, edges along
/// `exp(2i pi/3)` are `b`, edges along `exp(-2i pi/3)` are `c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeType {
    A,
    B,
    C,
}

/// Plane position of a lattice site at mesh `delta`.
pub fn plane_position(c: HexCoord, mesh: f64) -> Complex64 {
    let base = match c.role {
        Role::White => W0,
        Role::Black => B0,
        Role::Dual => V0,
    };
    (base + E1 * c.m as f64 + E2 * c.n as f64) * mesh
}

/// The three black neighbours of `w(m,n)`, ordered by edge type `(a, b, c)`.
pub fn black_neighbors(w: HexCoord) -> [HexCoord; 3] {
    debug_assert_eq!(w.role, Role::White);
    [
        HexCoord::black(w.m, w.n),
        HexCoord::black(w.m - 1, w.n),
        HexCoord::black(w.m - 1, w.n - 1),
    ]
}

/// The three white neighbours of `b(m,n)`, ordered by edge type `(a, b, c)`.
pub fn white_neighbors(b: HexCoord) -> [HexCoord; 3] {
    debug_assert_eq!(b.role, Role::Black);
    [
        HexCoord::white(b.m, b.n),
        HexCoord::white(b.m + 1, b.n),
        HexCoord::white(b.m + 1, b.n + 1),
    ]
}

/// The three dual vertices around `w(m,n)` (faces incident to the white).
pub fn duals_of_white(w: HexCoord) -> [HexCoord; 3] {
    debug_assert_eq!(w.role, Role::White);
    [
        HexCoord::dual(w.m, w.n),
        HexCoord::dual(w.m, w.n + 1),
        HexCoord::dual(w.m - 1, w.n),
    ]
}

/// The three dual vertices around `b(m,n)`.
pub fn duals_of_black(b: HexCoord) -> [HexCoord; 3] {
    debug_assert_eq!(b.role, Role::Black);
    [
        HexCoord::dual(b.m, b.n),
        HexCoord::dual(b.m + 1, b.n + 1),
        HexCoord::dual(b.m, b.n + 1),
    ]
}

/// Type of the edge between adjacent `w` and `b`, or `None` if not adjacent.
pub fn edge_type(w: HexCoord, b: HexCoord) -> Option<EdgeType> {
    if w.role != Role::White || b.role != Role::Black {
        return None;
    }
    match (b.m - w.m, b.n - w.n) {
        (0, 0) => Some(EdgeType::A),
        (-1, 0) => Some(EdgeType::B),
        (-1, -1) => Some(EdgeType::C),
        _ => None,
    }
}

/// Kasteleyn entry of the hexagonal lattice: the adjacency indicator.
pub fn kasteleyn_entry(w: HexCoord, b: HexCoord) -> u8 {
    edge_type(w, b).map_or(0, |_| 1)
}

#[derive(Debug, Error)]
pub enum SlopeError {
    #[error("edge probability out of range: ({0:.6}, {1:.6}, {2:.6})")]
    OutOfRange(f64, f64, f64),
}

/// Edge probabilities `(p_a, p_b, p_c)` of an ergodic slope; they sum to 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeTriple {
    pub pa: f64,
    pub pb: f64,
    pub pc: f64,
}

impl SlopeTriple {
    pub fn new(pa: f64, pb: f64, pc: f64) -> Result<Self, SlopeError> {
        let ok = |p: f64| (-1e-12..=1.0 + 1e-12).contains(&p);
        if !(ok(pa) && ok(pb) && ok(pc)) || (pa + pb + pc - 1.0).abs() > 1e-9 {
            return Err(SlopeError::OutOfRange(pa, pb, pc));
        }
        Ok(SlopeTriple { pa, pb, pc })
    }

    /// Strictly non-extremal with the given margin.
    pub fn is_liquid(&self, margin: f64) -> bool {
        self.pa.min(self.pb).min(self.pc) >= margin
    }
}

/// Probabilities from the height gradient:
/// `p_a = 1/3 + h_y`, `p_b = 1/3 - (sqrt3/2) h_x - h_y/2`,
/// `p_c = 1/3 + (sqrt3/2) h_x - h_y/2`.
pub fn slope_from_gradient(dx: f64, dy: f64) -> Result<SlopeTriple, SlopeError> {
    let s = 3f64.sqrt() / 2.0;
    SlopeTriple::new(
        1.0 / 3.0 + dy,
        1.0 / 3.0 - s * dx - dy / 2.0,
        1.0 / 3.0 + s * dx - dy / 2.0,
    )
}

/// Height gradient from probabilities: `h_x = (sqrt3/3)(p_c - p_b)`, `h_y = p_a - 1/3`.
pub fn gradient_from_slope(s: SlopeTriple) -> (f64, f64) {
    ((3f64.sqrt() / 3.0) * (s.pc - s.pb), s.pa - 1.0 / 3.0)
}
