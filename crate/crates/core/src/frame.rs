//! The model of E(1,1) on ℝ³.
//!
//! Coordinates are `(x, y, z)` and the orthonormal left-invariant frame is
//!
//! ```text
//! X = ∂z
//! Y = (−e^z ∂x + e^{−z} ∂y) / √2
//! T = ( e^z ∂x + e^{−z} ∂y) / √2
//! ```
//!
//! with `{X, Y}` spanning the horizontal distribution and `T` the Reeb field.
//! Everything else in the crate works with frame components; coordinate
//! components only appear when talking to scalar fields or exporting points.

use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Tolerance on the T-component for [`FrameVector::is_horizontal`].
pub const HORIZONTAL_TOL: f64 = 1e-9;

/// Webster scalar curvature of E(1,1).
pub const WEBSTER_CURVATURE: f64 = -0.5;

/// A point of E(1,1) in global coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Move along a coordinate vector: `p + s·v`.
    pub fn offset(&self, v: CoordVector, s: f64) -> Point {
        Point::new(self.x + s * v.dx, self.y + s * v.dy, self.z + s * v.dz)
    }

    /// Euclidean distance in coordinates (used for sampling and comparisons only).
    pub fn coord_distance(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

/// Tangent vector in the coordinate basis `{∂x, ∂y, ∂z}`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CoordVector {
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
}

impl CoordVector {
    pub const ZERO: CoordVector = CoordVector { dx: 0.0, dy: 0.0, dz: 0.0 };

    pub const fn new(dx: f64, dy: f64, dz: f64) -> Self {
        Self { dx, dy, dz }
    }

    pub fn is_finite(&self) -> bool {
        self.dx.is_finite() && self.dy.is_finite() && self.dz.is_finite()
    }

    /// Plain Euclidean dot product of coordinate components.
    pub fn euclid_dot(&self, other: &CoordVector) -> f64 {
        self.dx * other.dx + self.dy * other.dy + self.dz * other.dz
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.dx, self.dy, self.dz]
    }
}

impl Add for CoordVector {
    type Output = CoordVector;
    fn add(self, o: CoordVector) -> CoordVector {
        CoordVector::new(self.dx + o.dx, self.dy + o.dy, self.dz + o.dz)
    }
}

impl Sub for CoordVector {
    type Output = CoordVector;
    fn sub(self, o: CoordVector) -> CoordVector {
        CoordVector::new(self.dx - o.dx, self.dy - o.dy, self.dz - o.dz)
    }
}

impl Mul<f64> for CoordVector {
    type Output = CoordVector;
    fn mul(self, s: f64) -> CoordVector {
        CoordVector::new(self.dx * s, self.dy * s, self.dz * s)
    }
}

impl Neg for CoordVector {
    type Output = CoordVector;
    fn neg(self) -> CoordVector {
        CoordVector::new(-self.dx, -self.dy, -self.dz)
    }
}

/// Tangent vector `aX + bY + cT` in the orthonormal frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FrameVector {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl FrameVector {
    pub const ZERO: FrameVector = FrameVector { a: 0.0, b: 0.0, c: 0.0 };
    pub const X: FrameVector = FrameVector { a: 1.0, b: 0.0, c: 0.0 };
    pub const Y: FrameVector = FrameVector { a: 0.0, b: 1.0, c: 0.0 };
    pub const T: FrameVector = FrameVector { a: 0.0, b: 0.0, c: 1.0 };

    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub const fn horizontal(a: f64, b: f64) -> Self {
        Self { a, b, c: 0.0 }
    }

    pub fn dot(&self, o: &FrameVector) -> f64 {
        self.a * o.a + self.b * o.b + self.c * o.c
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn normalized(&self) -> Option<FrameVector> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| *self * (1.0 / n))
    }

    pub fn is_horizontal(&self) -> bool {
        self.c.abs() <= HORIZONTAL_TOL
    }

    /// Projection onto the horizontal distribution.
    pub fn horizontal_part(&self) -> FrameVector {
        FrameVector::new(self.a, self.b, 0.0)
    }

    /// Complex structure: `J(X) = Y`, `J(Y) = −X`, `J(T) = 0`.
    pub fn j(&self) -> FrameVector {
        FrameVector::new(-self.b, self.a, 0.0)
    }

    /// Cross product in the orthonormal frame (right-handed in `X, Y, T`).
    pub fn cross(&self, o: &FrameVector) -> FrameVector {
        FrameVector::new(
            self.b * o.c - self.c * o.b,
            self.c * o.a - self.a * o.c,
            self.a * o.b - self.b * o.a,
        )
    }

    pub fn component(&self, f: FrameField) -> f64 {
        match f {
            FrameField::X => self.a,
            FrameField::Y => self.b,
            FrameField::T => self.c,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite()
    }

    pub fn max_abs_diff(&self, o: &FrameVector) -> f64 {
        (self.a - o.a)
            .abs()
            .max((self.b - o.b).abs())
            .max((self.c - o.c).abs())
    }
}

impl Add for FrameVector {
    type Output = FrameVector;
    fn add(self, o: FrameVector) -> FrameVector {
        FrameVector::new(self.a + o.a, self.b + o.b, self.c + o.c)
    }
}

impl AddAssign for FrameVector {
    fn add_assign(&mut self, o: FrameVector) {
        *self = *self + o;
    }
}

impl Sub for FrameVector {
    type Output = FrameVector;
    fn sub(self, o: FrameVector) -> FrameVector {
        FrameVector::new(self.a - o.a, self.b - o.b, self.c - o.c)
    }
}

impl Mul<f64> for FrameVector {
    type Output = FrameVector;
    fn mul(self, s: f64) -> FrameVector {
        FrameVector::new(self.a * s, self.b * s, self.c * s)
    }
}

impl Neg for FrameVector {
    type Output = FrameVector;
    fn neg(self) -> FrameVector {
        FrameVector::new(-self.a, -self.b, -self.c)
    }
}

/// One of the three frame fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameField {
    X,
    Y,
    T,
}

impl FrameField {
    pub const ALL: [FrameField; 3] = [FrameField::X, FrameField::Y, FrameField::T];

    pub fn unit(self) -> FrameVector {
        match self {
            FrameField::X => FrameVector::X,
            FrameField::Y => FrameVector::Y,
            FrameField::T => FrameVector::T,
        }
    }
}

/// The frame `{X, Y, T}` at a point, in coordinate components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub x: CoordVector,
    pub y: CoordVector,
    pub t: CoordVector,
}

impl Frame {
    pub fn get(&self, f: FrameField) -> CoordVector {
        match f {
            FrameField::X => self.x,
            FrameField::Y => self.y,
            FrameField::T => self.t,
        }
    }
}

pub fn frame_at(p: &Point) -> Frame {
    let ez = p.z.exp();
    let emz = (-p.z).exp();
    Frame {
        x: CoordVector::new(0.0, 0.0, 1.0),
        y: CoordVector::new(-ez * FRAC_1_SQRT_2, emz * FRAC_1_SQRT_2, 0.0),
        t: CoordVector::new(ez * FRAC_1_SQRT_2, emz * FRAC_1_SQRT_2, 0.0),
    }
}

/// Coordinate components → frame components at `p`.
pub fn to_frame(p: &Point, v: &CoordVector) -> FrameVector {
    let ez = p.z.exp();
    let emz = (-p.z).exp();
    FrameVector::new(
        v.dz,
        FRAC_1_SQRT_2 * (v.dy * ez - v.dx * emz),
        FRAC_1_SQRT_2 * (v.dy * ez + v.dx * emz),
    )
}

/// Frame components → coordinate components at `p`.
pub fn to_coord(p: &Point, v: &FrameVector) -> CoordVector {
    let ez = p.z.exp();
    let emz = (-p.z).exp();
    CoordVector::new(
        FRAC_1_SQRT_2 * ez * (v.c - v.b),
        FRAC_1_SQRT_2 * emz * (v.b + v.c),
        v.a,
    )
}

/// Riemannian inner product of two coordinate vectors at `p`.
pub fn metric(p: &Point, u: &CoordVector, v: &CoordVector) -> f64 {
    to_frame(p, u).dot(&to_frame(p, v))
}

/// `[X,Y] = −T`, `[X,T] = −Y`, `[Y,T] = 0`.
pub fn lie_bracket(u: FrameField, v: FrameField) -> FrameVector {
    use FrameField::*;
    match (u, v) {
        (X, Y) => -FrameVector::T,
        (Y, X) => FrameVector::T,
        (X, T) => -FrameVector::Y,
        (T, X) => FrameVector::Y,
        _ => FrameVector::ZERO,
    }
}

/// Table of the pseudo-hermitian connection: `∇_{e_i} e_j`.
fn connection_table(dir: FrameField, field: FrameField) -> FrameVector {
    use FrameField::*;
    match (dir, field) {
        (T, X) => FrameVector::Y * 0.5,
        (T, Y) => FrameVector::X * -0.5,
        _ => FrameVector::ZERO,
    }
}

/// `∇_u v` for a frame field `v`, extended linearly in `u`.
pub fn connection(u: &FrameVector, v: FrameField) -> FrameVector {
    connection_table(FrameField::X, v) * u.a
        + connection_table(FrameField::Y, v) * u.b
        + connection_table(FrameField::T, v) * u.c
}

/// `∇_u W` for a vector field `W = Σ wᵢ eᵢ`, given its frame components `w`
/// at the point and their directional derivatives `u(wᵢ)`.
pub fn covariant_derivative(u: &FrameVector, w: &FrameVector, dw: &FrameVector) -> FrameVector {
    *dw + connection(u, FrameField::X) * w.a
        + connection(u, FrameField::Y) * w.b
        + connection(u, FrameField::T) * w.c
}

/// Pseudo-hermitian torsion `τ(aX + bY + cT) = −(b/2)X − (a/2)Y`.
pub fn torsion(v: &FrameVector) -> FrameVector {
    FrameVector::new(-0.5 * v.b, -0.5 * v.a, 0.0)
}

/// Spectral norm of the torsion endomorphism.
pub fn torsion_norm() -> f64 {
    // eigenvalues of the XY block are ±1/2
    0.5
}

pub fn webster_curvature() -> f64 {
    WEBSTER_CURVATURE
}

/// Coefficients `(α, β)` with `w = α e1 + β e2`, for `w` in the span of two
/// independent vectors.
pub fn tangent_coefficients(e1: &FrameVector, e2: &FrameVector, w: &FrameVector) -> (f64, f64) {
    let g11 = e1.norm_sq();
    let g12 = e1.dot(e2);
    let g22 = e2.norm_sq();
    let det = g11 * g22 - g12 * g12;
    let r1 = w.dot(e1);
    let r2 = w.dot(e2);
    ((g22 * r1 - g12 * r2) / det, (g11 * r2 - g12 * r1) / det)
}
