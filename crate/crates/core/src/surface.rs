//! Pointwise geometry of a level-set surface `Σ = {u = 0}`.
//!
//! Orientation: the unit normal is `N = −∇u/|∇u|` (Riemannian gradient,
//! frame components). Negate `u` for the other orientation. From it,
//! `ν_h = N_h/|N_h|`, `Z = J(ν_h)` and `S = ⟨N,T⟩ν_h − |N_h| T`.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldError, FieldJet, ScalarField};
use crate::frame::{self, CoordVector, FrameField, FrameVector, Point, WEBSTER_CURVATURE};

/// Threshold on `|N_h|` below which a point is singular.
pub const EPS_SING: f64 = 1e-9;
/// Threshold on `|u|/|∇u|` for a point to count as on the surface.
pub const EPS_LEVEL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurfaceError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("gradient vanishes at ({}, {}, {})", point.x, point.y, point.z)]
    DegeneratePoint { point: Point },
    #[error("point ({}, {}, {}) is off the surface (|u|/|grad u| = {distance:e})", point.x, point.y, point.z)]
    OffSurface { point: Point, distance: f64 },
    #[error("singular point at ({}, {}, {})", point.x, point.y, point.z)]
    SingularPoint { point: Point },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub eps_sing: f64,
    pub eps_level: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { eps_sing: EPS_SING, eps_level: EPS_LEVEL }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePointData {
    pub p: Point,
    /// Inner unit normal.
    pub normal: FrameVector,
    /// `|N_h|`
    pub nh_norm: f64,
    /// `⟨N, T⟩`
    pub nt: f64,
    pub nu_h: Option<FrameVector>,
    pub z: Option<FrameVector>,
    pub s: Option<FrameVector>,
    pub singular: bool,
}

/// First and second order data of `u` in frame form at one point.
///
/// `A = X(u)`, `B = Y(u)`, `C = T(u)`; the `d*` fields are their coordinate
/// gradients.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LevelSetJet {
    pub p: Point,
    pub value: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub da: CoordVector,
    pub db: CoordVector,
    pub dc: CoordVector,
}

impl LevelSetJet {
    pub fn new(p: &Point, jet: &FieldJet) -> Self {
        let ez = p.z.exp();
        let emz = (-p.z).exp();
        let g = jet.grad;
        let h = jet.hess;
        let a = g.dz;
        let b = FRAC_1_SQRT_2 * (-ez * g.dx + emz * g.dy);
        let c = FRAC_1_SQRT_2 * (ez * g.dx + emz * g.dy);
        let da = CoordVector::new(h[2][0], h[2][1], h[2][2]);
        let row = |k: usize| FRAC_1_SQRT_2 * (-ez * h[0][k] + emz * h[1][k]);
        let db = CoordVector::new(row(0), row(1), row(2) + FRAC_1_SQRT_2 * (-ez * g.dx - emz * g.dy));
        let row = |k: usize| FRAC_1_SQRT_2 * (ez * h[0][k] + emz * h[1][k]);
        let dc = CoordVector::new(row(0), row(1), row(2) + FRAC_1_SQRT_2 * (ez * g.dx - emz * g.dy));
        Self { p: *p, value: jet.value, a, b, c, da, db, dc }
    }

    pub fn grad_norm(&self) -> f64 {
        (self.a * self.a + self.b * self.b + self.c * self.c).sqrt()
    }

    /// `√(X(u)² + Y(u)²)`, i.e. `|∇u|·|N_h|`.
    pub fn horizontal_norm(&self) -> f64 {
        self.a.hypot(self.b)
    }

    /// Coordinate gradient of `D = √(A² + B²)`.
    fn d_horizontal(&self) -> CoordVector {
        let d = self.horizontal_norm();
        (self.da * self.a + self.db * self.b) * (1.0 / d)
    }

    /// Frame components of `ν_h` and their coordinate gradients.
    fn nu_h_with_gradient(&self) -> (FrameVector, [CoordVector; 2]) {
        let d = self.horizontal_norm();
        let dd = self.d_horizontal();
        let n1 = -self.a / d;
        let n2 = -self.b / d;
        // ∂(−A/D) = −(∂A·D − A·∂D)/D²
        let g1 = (self.da * d - dd * self.a) * (-1.0 / (d * d));
        let g2 = (self.db * d - dd * self.b) * (-1.0 / (d * d));
        (FrameVector::horizontal(n1, n2), [g1, g2])
    }

    /// `∇_V ν_h` for a tangent vector `V` given in frame components.
    fn covariant_nu_h(&self, v: &FrameVector) -> FrameVector {
        let (nu, [g1, g2]) = self.nu_h_with_gradient();
        let vc = frame::to_coord(&self.p, v);
        let dnu = FrameVector::horizontal(vc.euclid_dot(&g1), vc.euclid_dot(&g2));
        frame::covariant_derivative(v, &nu, &dnu)
    }

    /// Apply a frame field to `A` or `B`: `e(f) = e · ∇f` in coordinates.
    fn apply(&self, e: FrameField, grad: &CoordVector) -> f64 {
        frame::frame_at(&self.p).get(e).euclid_dot(grad)
    }
}

fn jet_at(f: &ScalarField, p: &Point) -> Result<LevelSetJet, SurfaceError> {
    let jet = f.jet(p)?;
    Ok(LevelSetJet::new(p, &jet))
}

fn data_from_jet(j: &LevelSetJet, tol: &Tolerances) -> Result<SurfacePointData, SurfaceError> {
    let gn = j.grad_norm();
    if gn == 0.0 || !gn.is_finite() {
        return Err(SurfaceError::DegeneratePoint { point: j.p });
    }
    let distance = j.value.abs() / gn;
    if distance >= tol.eps_level {
        return Err(SurfaceError::OffSurface { point: j.p, distance });
    }
    Ok(unchecked_data(j, tol))
}

fn unchecked_data(j: &LevelSetJet, tol: &Tolerances) -> SurfacePointData {
    let gn = j.grad_norm();
    let normal = FrameVector::new(-j.a / gn, -j.b / gn, -j.c / gn);
    let nh_norm = j.horizontal_norm() / gn;
    let nt = normal.c;
    let singular = nh_norm < tol.eps_sing;
    let (nu_h, z, s) = if singular {
        (None, None, None)
    } else {
        let nu = normal.horizontal_part() * (1.0 / normal.horizontal_part().norm());
        let z = nu.j();
        let s = nu * nt - FrameVector::T * nh_norm;
        (Some(nu), Some(z), Some(s))
    };
    SurfacePointData { p: j.p, normal, nh_norm, nt, nu_h, z, s, singular }
}

pub fn point_data(f: &ScalarField, p: &Point) -> Result<SurfacePointData, SurfaceError> {
    point_data_with(f, p, &Tolerances::default())
}

pub fn point_data_with(f: &ScalarField, p: &Point, tol: &Tolerances) -> Result<SurfacePointData, SurfaceError> {
    data_from_jet(&jet_at(f, p)?, tol)
}

/// Same as [`point_data`] but without the on-surface check; describes the
/// level set of `u` through `p`.
pub fn level_data(f: &ScalarField, p: &Point, tol: &Tolerances) -> Result<SurfacePointData, SurfaceError> {
    let j = jet_at(f, p)?;
    if j.grad_norm() == 0.0 {
        return Err(SurfaceError::DegeneratePoint { point: *p });
    }
    Ok(unchecked_data(&j, tol))
}

fn regular_jet(f: &ScalarField, p: &Point, tol: &Tolerances) -> Result<(LevelSetJet, SurfacePointData), SurfaceError> {
    let j = jet_at(f, p)?;
    let d = data_from_jet(&j, tol)?;
    if d.singular {
        return Err(SurfaceError::SingularPoint { point: *p });
    }
    Ok((j, d))
}

/// `H = −⟨∇_Z ν_h, Z⟩`.
pub fn mean_curvature(f: &ScalarField, p: &Point) -> Result<f64, SurfaceError> {
    mean_curvature_with(f, p, &Tolerances::default())
}

pub fn mean_curvature_with(f: &ScalarField, p: &Point, tol: &Tolerances) -> Result<f64, SurfaceError> {
    let (j, d) = regular_jet(f, p, tol)?;
    let z = d.z.expect("regular point");
    Ok(-j.covariant_nu_h(&z).dot(&z))
}

/// `⟨∇_S ν_h, Z⟩` from second derivatives of `u`.
pub fn s_derivative_term(f: &ScalarField, p: &Point, tol: &Tolerances) -> Result<f64, SurfaceError> {
    let (j, d) = regular_jet(f, p, tol)?;
    let (s, z) = (d.s.expect("regular"), d.z.expect("regular"));
    Ok(j.covariant_nu_h(&s).dot(&z))
}

/// `q = ⟨N,T⟩/|N_h|` and its derivative `Z(q)`.
pub fn normal_ratio_and_z_derivative(f: &ScalarField, p: &Point, tol: &Tolerances) -> Result<(f64, f64), SurfaceError> {
    let (j, d) = regular_jet(f, p, tol)?;
    let z = d.z.expect("regular");
    // q = −C/D, independent of |∇u|
    let dn = j.horizontal_norm();
    let dd = j.d_horizontal();
    let q = -j.c / dn;
    let dq = (j.dc * dn - dd * j.c) * (-1.0 / (dn * dn));
    let zc = frame::to_coord(p, &z);
    Ok((q, zc.euclid_dot(&dq)))
}

/// Both forms of the minimal surface equation at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimalResidual {
    /// Coordinate form, unnormalized.
    pub coordinate: f64,
    /// Frame form `Y(u)²X(X(u)) − Y(u)X(u)Y(X(u)) − Y(u)X(u)X(Y(u)) + X(u)²Y(Y(u))`.
    pub frame: f64,
    /// `coordinate / (u_z² + ½(−e^z u_x + e^{−z} u_y)²)^{3/2}`; absent where
    /// the horizontal gradient vanishes.
    pub normalized: Option<f64>,
    /// Whether `coordinate = 2·frame` to relative 1e−9.
    pub forms_agree: bool,
}

pub fn minimal_residual(f: &ScalarField, p: &Point) -> Result<MinimalResidual, SurfaceError> {
    let jet = f.jet(p)?;
    Ok(residual_from_jet(p, &jet))
}

pub(crate) fn residual_from_jet(p: &Point, jet: &FieldJet) -> MinimalResidual {
    let (ux, uy, uz) = (jet.grad.dx, jet.grad.dy, jet.grad.dz);
    let h = jet.hess;
    let (uxx, uxy, uxz, uyy, uyz, uzz) = (h[0][0], h[0][1], h[0][2], h[1][1], h[1][2], h[2][2]);
    let ez = p.z.exp();
    let emz = (-p.z).exp();
    let w = -ez * ux + emz * uy;
    // +e^{2z}u_xx: the sign that follows from expanding the frame form.
    let coordinate = uzz * w * w + uz * uz * (ez * ez * uxx - 2.0 * uxy + emz * emz * uyy)
        - uz * w * (-2.0 * ez * uxz - ez * ux + 2.0 * emz * uyz - emz * uy);

    let j = LevelSetJet::new(p, jet);
    let xa = j.apply(FrameField::X, &j.da);
    let ya = j.apply(FrameField::Y, &j.da);
    let xb = j.apply(FrameField::X, &j.db);
    let yb = j.apply(FrameField::Y, &j.db);
    let frame_form = j.b * j.b * xa - j.b * j.a * ya - j.b * j.a * xb + j.a * j.a * yb;

    let scale = (uz * uz + 0.5 * w * w).sqrt();
    let normalized = (scale > 0.0).then(|| coordinate / scale.powi(3));
    let mag = (uzz * w * w).abs()
        + (uz * uz * (ez * ez * uxx - 2.0 * uxy + emz * emz * uyy)).abs()
        + (uz * w * (-2.0 * ez * uxz - ez * ux + 2.0 * emz * uyz - emz * uy)).abs();
    let forms_agree = (coordinate - 2.0 * frame_form).abs() <= 1e-9 * mag.max(f64::MIN_POSITIVE);
    MinimalResidual { coordinate, frame: frame_form, normalized, forms_agree }
}

/// The torsion quantities `⟨τ(Z),Z⟩` and `⟨τ(Z),ν_h⟩` of a surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorsionTerms {
    pub tau_zz: f64,
    pub tau_z_nu: f64,
}

/// `⟨τ(Z),Z⟩ = −⟨Z,X⟩⟨Z,Y⟩` and `⟨τ(Z),ν_h⟩ = ½(⟨Z,Y⟩² − ⟨Z,X⟩²)` for a
/// horizontal unit `Z`.
///
/// The second identity is the contraction `⟨τ(Z), J(Z)⟩`; against
/// `ν_h = −J(Z)` with the torsion matrix it picks up a sign, see the tests.
pub fn torsion_terms_for(z: &FrameVector) -> TorsionTerms {
    TorsionTerms { tau_zz: -z.a * z.b, tau_z_nu: 0.5 * (z.b * z.b - z.a * z.a) }
}

pub fn surface_torsion_terms(f: &ScalarField, p: &Point) -> Result<TorsionTerms, SurfaceError> {
    let d = point_data(f, p)?;
    let z = d.z.ok_or(SurfaceError::SingularPoint { point: *p })?;
    let t = torsion_terms_for(&z);
    let tz = frame::torsion(&z);
    debug_assert!((t.tau_zz - tz.dot(&z)).abs() < 1e-12);
    debug_assert!((t.tau_z_nu - tz.dot(&z.j())).abs() < 1e-12);
    Ok(t)
}

/// `W − ⟨τ(Z),ν_h⟩ = ⟨ν_h,Y⟩² − 1 = ⟨Z,X⟩² − 1`.
pub fn necessary_stability_quantity(f: &ScalarField, p: &Point) -> Result<f64, SurfaceError> {
    let d = point_data(f, p)?;
    let (z, nu) = match (d.z, d.nu_h) {
        (Some(z), Some(nu)) => (z, nu),
        _ => return Err(SurfaceError::SingularPoint { point: *p }),
    };
    let value = z.a * z.a - 1.0;
    debug_assert!((WEBSTER_CURVATURE - torsion_terms_for(&z).tau_z_nu - value).abs() < 1e-12);
    debug_assert!((nu.b * nu.b - 1.0 - value).abs() < 1e-12);
    Ok(value)
}

/// Project `p` onto `{u = 0}` with Newton steps along the gradient.
pub fn project_to_surface(f: &ScalarField, p: &Point, max_iter: usize) -> Option<Point> {
    let mut q = *p;
    for _ in 0..max_iter {
        let u = f.eval(&q).ok()?;
        let g = f.eval_grad(&q).ok()?;
        let g2 = g.euclid_dot(&g);
        if g2 == 0.0 || !g2.is_finite() {
            return None;
        }
        if u.abs() <= 1e-14 * g2.sqrt().max(1.0) {
            return Some(q);
        }
        q = q.offset(g, -u / g2);
        if !q.is_finite() {
            return None;
        }
    }
    let u = f.eval(&q).ok()?;
    let g = f.eval_grad(&q).ok()?;
    (u.abs() <= 1e-12 * g.euclid_dot(&g).sqrt().max(1.0)).then_some(q)
}

/// Search for a singular point of `{u = 0}` near `p`: damped Gauss–Newton on
/// `(u, u_z, −e^z u_x + e^{−z} u_y) = 0`. Returns the point when the horizontal
/// part of the gradient vanishes there to `tol` relative to `|∇u|`.
pub fn refine_singular(f: &ScalarField, p: &Point, max_iter: usize, tol: f64) -> Option<Point> {
    let mut q = *p;
    for _ in 0..max_iter {
        let jet = f.jet(&q).ok()?;
        let (g, h) = (jet.grad, jet.hess);
        let (ez, emz) = (q.z.exp(), (-q.z).exp());
        let r = [jet.value, g.dz, -ez * g.dx + emz * g.dy];
        let gn = g.euclid_dot(&g).sqrt();
        if !gn.is_finite() || gn == 0.0 {
            return None;
        }
        if r[0].abs() <= 1e-14 * gn.max(1.0) && r[1].hypot(r[2]) <= tol * gn {
            return Some(q);
        }
        let rows = [
            [g.dx, g.dy, g.dz],
            h[2],
            [-ez * h[0][0] + emz * h[1][0], -ez * h[0][1] + emz * h[1][1], -ez * h[0][2] + emz * h[1][2] - ez * g.dx - emz * g.dy],
        ];
        // (JᵀJ + λI) d = −Jᵀr
        let mut a = [[0.0; 3]; 3];
        let mut b = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] = (0..3).map(|k| rows[k][i] * rows[k][j]).sum();
            }
            b[i] = -(0..3).map(|k| rows[k][i] * r[k]).sum::<f64>();
        }
        let lambda = 1e-12 * (a[0][0] + a[1][1] + a[2][2]).max(1e-300);
        for (i, row) in a.iter_mut().enumerate() {
            row[i] += lambda;
        }
        let d = solve3(a, b)?;
        q = Point::new(q.x + d[0], q.y + d[1], q.z + d[2]);
        if !q.is_finite() {
            return None;
        }
    }
    None
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for c in 0..3 {
        let piv = (c..3).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[piv][c] == 0.0 {
            return None;
        }
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..3 {
            let m = a[r][c] / a[c][c];
            for k in c..3 {
                a[r][k] -= m * a[c][k];
            }
            b[r] -= m * b[c];
        }
    }
    let mut x = [0.0; 3];
    for c in (0..3).rev() {
        x[c] = (b[c] - (c + 1..3).map(|k| a[c][k] * x[k]).sum::<f64>()) / a[c][c];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::CatalogSurface;
    use rand::{Rng, SeedableRng};

    fn field(s: &str) -> ScalarField {
        ScalarField::parse(s).unwrap()
    }

    #[test]
    fn plane_x_frame() {
        let d = point_data(&field("x"), &Point::new(0.0, 1.0, 1.0)).unwrap();
        assert!(!d.singular);
        assert!(d.nu_h.unwrap().max_abs_diff(&FrameVector::Y) < 1e-15);
        assert!(d.z.unwrap().max_abs_diff(&-FrameVector::X) < 1e-15);
        assert!((d.nt + FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn saddle_curve_axis_is_singular() {
        let d = point_data(&field("exp(z)*y + exp(-z)*x"), &Point::new(0.0, 0.0, 5.0)).unwrap();
        assert!(d.singular);
        assert!(d.nu_h.is_none() && d.z.is_none());
        assert!((d.nt.abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plane_z_is_regular() {
        let d = point_data(&field("z"), &Point::new(0.3, -2.0, 0.0)).unwrap();
        assert!(!d.singular);
        assert_eq!(d.normal, -FrameVector::X);
        assert_eq!(d.nh_norm, 1.0);
        assert_eq!(d.nt, 0.0);
        assert_eq!(d.nu_h.unwrap(), -FrameVector::X);
        assert_eq!(d.z.unwrap(), -FrameVector::Y);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            point_data(&field("x^2 + y^2"), &Point::ORIGIN),
            Err(SurfaceError::DegeneratePoint { .. })
        ));
        assert!(matches!(point_data(&field("x"), &Point::new(0.1, 0.0, 0.0)), Err(SurfaceError::OffSurface { .. })));
        assert!(matches!(
            mean_curvature(&field("exp(z)*y + x"), &Point::ORIGIN),
            Err(SurfaceError::SingularPoint { .. })
        ));
    }

    #[test]
    fn mean_curvature_examples() {
        let h = mean_curvature(&field("x + 2.5"), &Point::new(-2.5, 0.3, -1.0)).unwrap();
        assert_eq!(h, 0.0);
        let h = mean_curvature(&field("exp(z)*y + x"), &Point::new(-1.0, 1.0, 0.0)).unwrap();
        assert!(h.abs() < 1e-14, "{h}");
        let f = field("x + y + z");
        let p = project_to_surface(&f, &Point::new(1.0, -2.0, 1.0), 20).unwrap();
        assert!(mean_curvature(&f, &p).unwrap().abs() > 1e-2);
    }

    #[test]
    fn residual_examples() {
        let r = minimal_residual(&field("exp(z)*y + x"), &Point::new(-2.0, 2.0, 0.0)).unwrap();
        assert!(r.coordinate.abs() < 1e-14 && r.forms_agree);
        let r = minimal_residual(&field("y + 3"), &Point::new(0.4, -3.0, 1.7)).unwrap();
        assert_eq!(r.coordinate, 0.0);
        let r = minimal_residual(&field("x + y + z"), &Point::new(1.0, -2.0, 1.0)).unwrap();
        assert!(r.coordinate.abs() > 1e-2 && r.forms_agree);
    }

    #[test]
    fn residual_forms_agree_when_uxx_nonzero() {
        // u_xx ≠ 0 and u_z ≠ 0: sensitive to the sign of the e^{2z}u_xx term.
        let f = field("x^2 + z + y*z");
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let p = Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let r = minimal_residual(&f, &p).unwrap();
            assert!(r.forms_agree, "{r:?}");
        }
    }

    #[test]
    fn normalized_residual_is_twice_mean_curvature() {
        let f = field("x + y + z^2 + 0.3*x*z");
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..300 {
            let guess = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let p = project_to_surface(&f, &guess, 30).unwrap();
            let Ok(h) = mean_curvature(&f, &p) else { continue };
            let r = minimal_residual(&f, &p).unwrap().normalized.unwrap();
            assert!((r - 2.0 * h).abs() < 1e-9 * (1.0 + h.abs()), "{r} vs {h}");
        }
    }

    #[test]
    fn residual_zero_iff_h_zero() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for cat in CatalogSurface::examples() {
            let f = cat.field();
            for _ in 0..200 {
                let guess = Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                let Some(p) = project_to_surface(&f, &guess, 40) else { continue };
                let Ok(h) = mean_curvature(&f, &p) else { continue };
                let r = minimal_residual(&f, &p).unwrap();
                let g = f.eval_grad(&p).unwrap();
                let scale = 1.0 + g.euclid_dot(&g).powi(2);
                assert_eq!(r.coordinate.abs() < 1e-8 * scale, h.abs() < 1e-8, "{} at {p:?}: {r:?} H={h}", cat.name());
            }
        }
    }

    #[test]
    fn nu_h_matches_generic_projection() {
        // Riemannian gradient from the coordinate metric, projected to H, normalized, rotated.
        let f = field("exp(z)*y + x*y + z^3");
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let mut checked = 0;
        for _ in 0..1000 {
            let guess = Point::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
            let Some(p) = project_to_surface(&f, &guess, 40) else { continue };
            let Ok(d) = point_data(&f, &p) else { continue };
            if d.singular {
                continue;
            }
            // metric G = Eᵀ E with E the coordinate→frame map
            let cols = [CoordVector::new(1.0, 0.0, 0.0), CoordVector::new(0.0, 1.0, 0.0), CoordVector::new(0.0, 0.0, 1.0)]
                .map(|e| frame::to_frame(&p, &e));
            let mut g = [[0.0; 3]; 3];
            for i in 0..3 {
                for k in 0..3 {
                    g[i][k] = cols[i].dot(&cols[k]);
                }
            }
            let du = f.eval_grad(&p).unwrap().to_array();
            let grad = solve3(g, du);
            let grad_f = frame::to_frame(&p, &CoordVector::new(grad[0], grad[1], grad[2]));
            let nu = (-grad_f).horizontal_part().normalized().unwrap();
            assert!(nu.max_abs_diff(&d.nu_h.unwrap()) < 1e-10);
            assert!(nu.j().max_abs_diff(&d.z.unwrap()) < 1e-10);
            checked += 1;
        }
        assert!(checked > 500);
    }

    fn solve3(m: [[f64; 3]; 3], rhs: [f64; 3]) -> [f64; 3] {
        let det = |c: [[f64; 3]; 3]| {
            c[0][0] * (c[1][1] * c[2][2] - c[1][2] * c[2][1]) - c[0][1] * (c[1][0] * c[2][2] - c[1][2] * c[2][0])
                + c[0][2] * (c[1][0] * c[2][1] - c[1][1] * c[2][0])
        };
        let d = det(m);
        let mut out = [0.0; 3];
        for (k, o) in out.iter_mut().enumerate() {
            let mut mk = m;
            for i in 0..3 {
                mk[i][k] = rhs[i];
            }
            *o = det(mk) / d;
        }
        out
    }

    #[test]
    fn surface_frame_invariants() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        for cat in CatalogSurface::examples() {
            let f = cat.field();
            for _ in 0..200 {
                let guess = Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                let Some(p) = project_to_surface(&f, &guess, 40) else { continue };
                let d = point_data(&f, &p).unwrap();
                assert!((d.normal.norm() - 1.0).abs() < 1e-10);
                assert!((d.nh_norm.powi(2) + d.nt.powi(2) - 1.0).abs() < 1e-10);
                assert_eq!(d.singular, d.nu_h.is_none());
                if let (Some(nu), Some(z), Some(s)) = (d.nu_h, d.z, d.s) {
                    assert!((nu.norm() - 1.0).abs() < 1e-12 && nu.is_horizontal());
                    assert!(z.dot(&nu).abs() < 1e-12);
                    assert!((z.a * z.a + z.b * z.b - 1.0).abs() < 1e-12);
                    assert!(z.dot(&d.normal).abs() < 1e-12 && s.dot(&d.normal).abs() < 1e-12);
                    assert!(z.dot(&s).abs() < 1e-12 && (s.norm() - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn torsion_term_examples() {
        let t = torsion_terms_for(&-FrameVector::X);
        assert_eq!((t.tau_zz, t.tau_z_nu), (0.0, -0.5));
        for z in [FrameVector::Y, -FrameVector::Y] {
            let t = torsion_terms_for(&z);
            assert_eq!((t.tau_zz.abs(), t.tau_z_nu), (0.0, 0.5));
        }
        let t = torsion_terms_for(&(FrameVector::horizontal(1.0, 1.0) * FRAC_1_SQRT_2));
        assert!((t.tau_zz + 0.5).abs() < 1e-15 && t.tau_z_nu.abs() < 1e-15);

        let t = surface_torsion_terms(&field("x"), &Point::new(0.0, 2.0, -1.0)).unwrap();
        assert_eq!((t.tau_zz, t.tau_z_nu), (0.0, -0.5));
        // Direct contraction with ν_h = −J(Z) has the opposite sign for the second term.
        let z = -FrameVector::X;
        assert_eq!(frame::torsion(&z).dot(&-z.j()), 0.5);
    }

    #[test]
    fn necessary_quantity_examples() {
        assert_eq!(necessary_stability_quantity(&field("x"), &Point::new(0.0, 1.0, 1.0)).unwrap(), 0.0);
        let f = field("exp(z)*y + exp(-z)*x");
        let p = Point::new(-(2.0f64.exp()) * 0.5, 0.5, 1.0);
        let q = necessary_stability_quantity(&f, &p).unwrap();
        assert!((q + 1.0).abs() < 1e-15);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let g = field("x + y + z");
        for _ in 0..100 {
            let guess = Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let p = project_to_surface(&g, &guess, 40).unwrap();
            assert!(necessary_stability_quantity(&g, &p).unwrap() <= 0.0);
        }
    }

    #[test]
    fn mean_curvature_matches_discrete_derivative() {
        // ∇_Z ν_h by central differences of the level-set ν_h along Z.
        let f = field("x + y + z");
        let tol = Tolerances::default();
        let p = project_to_surface(&f, &Point::new(0.2, 0.1, -0.4), 40).unwrap();
        let d = point_data(&f, &p).unwrap();
        let z = d.z.unwrap();
        let zc = frame::to_coord(&p, &z);
        let h = 1e-6;
        let nu = |q: &Point| level_data(&f, q, &tol).unwrap().nu_h.unwrap();
        let dnu = (nu(&p.offset(zc, h)) - nu(&p.offset(zc, -h))) * (0.5 / h);
        let cov = frame::covariant_derivative(&z, &d.nu_h.unwrap(), &dnu);
        let h_fd = -cov.dot(&z);
        assert!((h_fd - mean_curvature(&f, &p).unwrap()).abs() < 1e-7);
    }

    #[test]
    fn refines_onto_singular_sets() {
        let f = CatalogSurface::SaddleCurve { p0: Point::ORIGIN }.field();
        let q = refine_singular(&f, &Point::new(0.05, -0.03, 0.4), 50, 1e-12).unwrap();
        assert!(q.x.abs() < 1e-12 && q.y.abs() < 1e-12);
        let f = CatalogSurface::SaddlePoint { p0: Point::new(1.0, 2.0, 0.5) }.field();
        let q = refine_singular(&f, &Point::new(1.1, 1.9, 0.3), 50, 1e-12).unwrap();
        assert!(q.coord_distance(&Point::new(1.0, 2.0, 0.5)) < 1e-10, "{q:?}");
        assert!(refine_singular(&field("x"), &Point::new(0.0, 0.2, 0.1), 50, 1e-12).is_none());
    }
}
