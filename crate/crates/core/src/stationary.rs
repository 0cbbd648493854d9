//! Complete area-stationary surfaces.
//!
//! The main construction sweeps a horizontal curve `Γ(ε)` by the
//! characteristic curves leaving it in direction `J(Γ̇(ε))`:
//! `F(ε, t) = γ_ε(t)`. With `p = ż`, `m = ẋe^{−z} − ẏe^{z}` and
//! `s = mt/√2` the rulings are
//!
//! ```text
//! x = x(ε) − p e^{z(ε)} (t/√2) φ(s)
//! y = y(ε) + p e^{−z(ε)} (t/√2) φ(−s)
//! z = z(ε) + s
//! ```
//!
//! with `φ(s) = (e^s − 1)/s`. This form is regular at `m = 0` and `p = 0`,
//! so the two degenerate branches need no separate code path; they are
//! still classified and reported.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{self, CharacteristicCurve, CurveError};
use crate::field::{CatalogSurface, FieldError, ScalarField};
use crate::frame::{self, CoordVector, FrameVector, Point};
use crate::par;
use crate::surface::EPS_SING;

/// Tolerance on the horizontality of `Γ` at sampled parameters.
pub const GAMMA_HORIZONTAL_TOL: f64 = 1e-9;
/// Branch discriminant threshold on `|ż|` and `|ẋe^{−z} − ẏe^{z}|`.
pub const BRANCH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StationaryError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("singular curve is not horizontal at eps = {eps} (defect {defect:e})")]
    NotHorizontal { eps: f64, defect: f64 },
    #[error("singular curve has zero velocity at eps = {eps}")]
    DegenerateRuling { eps: f64 },
    #[error("non-finite surface value at (eps, t) = ({eps}, {t})")]
    Overflow { eps: f64, t: f64 },
    #[error("bad range: {0}")]
    BadRange(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
}

/// Built-in horizontal curves with analytic first and second derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HorizontalCurve {
    /// A characteristic curve with unit frame velocity `(a, b)` at `p0`.
    Characteristic { p0: Point, a: f64, b: f64 },
    /// `ε ↦ p0 + ε ∂z`, an integral curve of `X`.
    XLine { p0: Point },
    /// The integral curve of `Y` through `p0`.
    YLine { p0: Point },
    /// Horizontal curve with `z = z₀ + wε` and `ẋe^{−z} − ẏe^{z} = μ₀ + μ₁ε`.
    /// Not characteristic unless `μ₁ = 0`; used as a fixture.
    Ramp { p0: Point, w: f64, mu0: f64, mu1: f64 },
}

/// Position, velocity and acceleration of `Γ` at one parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveJet {
    pub p: Point,
    pub d1: CoordVector,
    pub d2: CoordVector,
}

impl CurveJet {
    /// `(p, m) = (ż, ẋe^{−z} − ẏe^{z})`.
    pub fn p_m(&self) -> (f64, f64) {
        let (ez, emz) = (self.p.z.exp(), (-self.p.z).exp());
        (self.d1.dz, self.d1.dx * emz - self.d1.dy * ez)
    }

    /// ε-derivatives of `(p, m)`.
    pub fn p_m_dot(&self) -> (f64, f64) {
        let (ez, emz) = (self.p.z.exp(), (-self.p.z).exp());
        let (d1, d2) = (self.d1, self.d2);
        let mdot = d2.dx * emz - d1.dx * d1.dz * emz - d2.dy * ez - d1.dy * d1.dz * ez;
        (d2.dz, mdot)
    }

    pub fn velocity_frame(&self) -> FrameVector {
        frame::to_frame(&self.p, &self.d1)
    }

    /// `|ẏe^z + ẋe^{−z}| / |Γ̇|`.
    pub fn horizontality_defect(&self) -> f64 {
        let n = self.velocity_frame().norm();
        (curve::horizontality_defect(&self.p, &self.d1) / n).abs()
    }
}

/// `∫₀^ε (μ₀ + μ₁s) e^{ws} ds`.
fn ramp_integral(mu0: f64, mu1: f64, w: f64, eps: f64) -> f64 {
    if w.abs() < 1e-8 {
        return mu0 * eps + 0.5 * mu1 * eps * eps + w * (0.5 * mu0 * eps * eps + mu1 * eps.powi(3) / 3.0);
    }
    let e1 = (w * eps).exp_m1() / w;
    let e2 = (eps * (w * eps).exp() - e1) / w;
    mu0 * e1 + mu1 * e2
}

impl HorizontalCurve {
    /// Characteristic curve record through `p0` with coordinate velocity `v0`.
    pub fn characteristic(p0: Point, v0: CoordVector) -> Result<Self, CurveError> {
        let c = curve::make_curve(p0, v0)?;
        let f = c.frame_velocity();
        Ok(HorizontalCurve::Characteristic { p0, a: f.a, b: f.b })
    }

    pub fn name(&self) -> &'static str {
        match self {
            HorizontalCurve::Characteristic { .. } => "characteristic",
            HorizontalCurve::XLine { .. } => "x-line",
            HorizontalCurve::YLine { .. } => "y-line",
            HorizontalCurve::Ramp { .. } => "ramp",
        }
    }

    pub fn jet(&self, eps: f64) -> CurveJet {
        match *self {
            HorizontalCurve::Characteristic { p0, a, b } => {
                let v0 = frame::to_coord(&p0, &FrameVector::horizontal(a, b));
                let k = v0.dz;
                let s = k * eps;
                let p = if k == 0.0 {
                    Point::new(p0.x + v0.dx * eps, p0.y + v0.dy * eps, p0.z)
                } else {
                    Point::new(p0.x + v0.dx * s.exp_m1() / k, p0.y - v0.dy * (-s).exp_m1() / k, p0.z + s)
                };
                let d1 = CoordVector::new(v0.dx * s.exp(), v0.dy * (-s).exp(), k);
                let d2 = CoordVector::new(d1.dx * k, -d1.dy * k, 0.0);
                CurveJet { p, d1, d2 }
            }
            HorizontalCurve::XLine { p0 } => CurveJet {
                p: Point::new(p0.x, p0.y, p0.z + eps),
                d1: CoordVector::new(0.0, 0.0, 1.0),
                d2: CoordVector::ZERO,
            },
            HorizontalCurve::YLine { p0 } => {
                let d1 = frame::to_coord(&p0, &FrameVector::Y);
                CurveJet { p: p0.offset(d1, eps), d1, d2: CoordVector::ZERO }
            }
            HorizontalCurve::Ramp { p0, w, mu0, mu1 } => {
                let z = p0.z + w * eps;
                let m = mu0 + mu1 * eps;
                let (ez, emz) = (z.exp(), (-z).exp());
                let p = Point::new(
                    p0.x + 0.5 * p0.z.exp() * ramp_integral(mu0, mu1, w, eps),
                    p0.y - 0.5 * (-p0.z).exp() * ramp_integral(mu0, mu1, -w, eps),
                    z,
                );
                let d1 = CoordVector::new(0.5 * m * ez, -0.5 * m * emz, w);
                let d2 = CoordVector::new(0.5 * (mu1 + m * w) * ez, 0.5 * (-mu1 + m * w) * emz, 0.0);
                CurveJet { p, d1, d2 }
            }
        }
    }

    pub fn point(&self, eps: f64) -> Point {
        self.jet(eps).p
    }

    /// Whether `Γ` itself is a characteristic curve with `H = 0`.
    pub fn is_characteristic(&self) -> bool {
        match *self {
            HorizontalCurve::Ramp { mu1, .. } => mu1 == 0.0,
            _ => true,
        }
    }

    /// `⟨τ(Γ̇), Γ̇⟩/|Γ̇|²` at `ε`.
    pub fn torsion_ratio(&self, eps: f64) -> f64 {
        let v = self.jet(eps).velocity_frame();
        frame::torsion(&v).dot(&v) / v.norm_sq()
    }
}

/// Degenerate cases of the sweep at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Generic,
    /// `Γ̇ ∥ X` there (`ẋe^{−z} − ẏe^{z} ≈ 0`): rulings along `±Y`, `z` constant.
    XBranch,
    /// `Γ̇ ∥ Y` there (`ż ≈ 0`): rulings along `±X`, `x, y` constant.
    YBranch,
}

/// `(e^s − 1)/s`
fn phi(s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else {
        s.exp_m1() / s
    }
}

/// `φ'(s) = (e^s(s − 1) + 1)/s²`
fn dphi(s: f64) -> f64 {
    if s.abs() < 1e-3 {
        // Σ (k+1) s^k / (k+2)!
        let mut sum = 0.0;
        let mut pow = 1.0;
        let mut fact = 2.0;
        for k in 0..6 {
            sum += (k as f64 + 1.0) * pow / fact;
            pow *= s;
            fact *= k as f64 + 3.0;
        }
        sum
    } else {
        let e = s.exp_m1();
        (s - e + s * e) / (s * s)
    }
}

fn sinhc(s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else {
        s.sinh() / s
    }
}

/// Geometry of a ruled surface at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuledPointData {
    pub point: Point,
    pub f_eps: FrameVector,
    pub f_t: FrameVector,
    /// `F_ε × F_t` in frame components.
    pub cross: FrameVector,
    pub area_element: f64,
    pub normal: FrameVector,
    pub nh_norm: f64,
    pub nt: f64,
    pub nu_h: Option<FrameVector>,
    pub z: Option<FrameVector>,
    pub s: Option<FrameVector>,
}

impl RuledPointData {
    fn new(point: Point, f_eps: FrameVector, f_t: FrameVector) -> Self {
        let cross = f_eps.cross(&f_t);
        let area_element = cross.norm();
        let normal = if area_element > 0.0 { cross * (1.0 / area_element) } else { FrameVector::ZERO };
        let nh_norm = normal.horizontal_part().norm();
        let nt = normal.c;
        let (nu_h, z, s) = if nh_norm < EPS_SING {
            (None, None, None)
        } else {
            let nu = normal.horizontal_part() * (1.0 / nh_norm);
            (Some(nu), Some(nu.j()), Some(nu * nt - FrameVector::T * nh_norm))
        };
        Self { point, f_eps, f_t, cross, area_element, normal, nh_norm, nt, nu_h, z, s }
    }

    /// Coefficients `(α, β)` with `W = αF_ε + βF_t` for a tangent `W`.
    pub fn tangent_coefficients(&self, w: &FrameVector) -> (f64, f64) {
        frame::tangent_coefficients(&self.f_eps, &self.f_t, w)
    }
}

/// One grid vertex of a sweep, for export.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSample {
    pub eps: f64,
    pub t: f64,
    pub point: Point,
    pub nh_norm: f64,
    pub vt: f64,
}

impl SweepSample {
    pub fn to_row(&self) -> [f64; 7] {
        [self.eps, self.t, self.point.x, self.point.y, self.point.z, self.nh_norm, self.vt]
    }
}

/// `F(ε, t)` swept from a horizontal curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuledSurface {
    pub gamma: HorizontalCurve,
    pub eps_range: [f64; 2],
    pub t_range: [f64; 2],
    /// Grid points per axis, `[n_eps, n_t]`.
    pub grid: [usize; 2],
    /// Extra rotation of the rulings away from `J(Γ̇)`. Zero for every
    /// stationary surface; nonzero values build skewed fixtures.
    pub skew: f64,
}

fn check_range(name: &str, r: [f64; 2]) -> Result<(), StationaryError> {
    if !(r[0].is_finite() && r[1].is_finite() && r[0] < r[1]) {
        return Err(StationaryError::BadRange(format!("{name} range must be finite with min < max")));
    }
    Ok(())
}

pub fn sweep_surface(
    gamma: HorizontalCurve,
    eps_range: [f64; 2],
    t_range: [f64; 2],
    grid: [usize; 2],
) -> Result<RuledSurface, StationaryError> {
    build(RuledSurface { gamma, eps_range, t_range, grid, skew: 0.0 })
}

/// A ruled surface whose rulings are turned by `skew` radians away from
/// `J(Γ̇)`. Not stationary; exists as a negative control.
pub fn skewed_surface(
    gamma: HorizontalCurve,
    eps_range: [f64; 2],
    t_range: [f64; 2],
    grid: [usize; 2],
    skew: f64,
) -> Result<RuledSurface, StationaryError> {
    build(RuledSurface { gamma, eps_range, t_range, grid, skew })
}

fn build(s: RuledSurface) -> Result<RuledSurface, StationaryError> {
    check_range("eps", s.eps_range)?;
    check_range("t", s.t_range)?;
    if s.grid[0] < 2 || s.grid[1] < 2 {
        return Err(StationaryError::BadRange("grid needs at least 2 points per axis".into()));
    }
    for i in 0..s.grid[0] {
        let eps = s.eps_at(i);
        let j = s.gamma.jet(eps);
        if !j.p.is_finite() || !j.d1.is_finite() || !j.d2.is_finite() {
            return Err(StationaryError::Overflow { eps, t: 0.0 });
        }
        let (p, m) = j.p_m();
        if p.abs() < BRANCH_TOL && m.abs() < BRANCH_TOL {
            return Err(StationaryError::DegenerateRuling { eps });
        }
        let defect = j.horizontality_defect();
        if defect > GAMMA_HORIZONTAL_TOL {
            return Err(StationaryError::NotHorizontal { eps, defect });
        }
        for t in [s.t_range[0], s.t_range[1]] {
            let d = s.point_data(eps, t);
            if !d.point.is_finite() || !d.f_eps.is_finite() || !d.f_t.is_finite() {
                return Err(StationaryError::Overflow { eps, t });
            }
        }
    }
    Ok(s)
}

/// Sweep of the characteristic curve through `p0` with velocity `v0`.
/// When all three components of `v0` are nonzero neither `Γ` nor the
/// rulings are geodesics.
pub fn non_geodesic_surface(
    p0: Point,
    v0: CoordVector,
    eps_range: [f64; 2],
    t_range: [f64; 2],
    grid: [usize; 2],
) -> Result<RuledSurface, StationaryError> {
    let gamma = HorizontalCurve::characteristic(p0, v0)?;
    if let HorizontalCurve::Characteristic { a, b, .. } = gamma {
        if a.abs() < curve::GEODESIC_TOL || b.abs() < curve::GEODESIC_TOL {
            return Err(StationaryError::BadParams("initial velocity is along X or Y".into()));
        }
    }
    sweep_surface(gamma, eps_range, t_range, grid)
}

impl RuledSurface {
    pub fn eps_at(&self, i: usize) -> f64 {
        let [a, b] = self.eps_range;
        if i + 1 == self.grid[0] {
            b
        } else {
            a + (b - a) * i as f64 / (self.grid[0] - 1) as f64
        }
    }

    pub fn t_at(&self, j: usize) -> f64 {
        let [a, b] = self.t_range;
        if j + 1 == self.grid[1] {
            b
        } else {
            a + (b - a) * j as f64 / (self.grid[1] - 1) as f64
        }
    }

    pub fn branch_at(&self, eps: f64) -> Branch {
        let (p, m) = self.gamma.jet(eps).p_m();
        if m.abs() < BRANCH_TOL {
            Branch::XBranch
        } else if p.abs() < BRANCH_TOL {
            Branch::YBranch
        } else {
            Branch::Generic
        }
    }

    /// Ruling frame velocity `(a_r, b_r)` and its ε-derivative.
    fn ruling(&self, j: &CurveJet) -> (f64, f64, f64, f64) {
        let (p, m) = j.p_m();
        let (pd, md) = j.p_m_dot();
        let (c, s) = (self.skew.cos(), self.skew.sin());
        let (a0, b0) = (m * FRAC_1_SQRT_2, p);
        let (ad, bd) = (md * FRAC_1_SQRT_2, pd);
        (c * a0 - s * b0, s * a0 + c * b0, c * ad - s * bd, s * ad + c * bd)
    }

    fn eval_parts(&self, eps: f64, t: f64) -> (Point, CoordVector, FrameVector) {
        let j = self.gamma.jet(eps);
        let (ar, br, ard, brd) = self.ruling(&j);
        let g = j.p;
        let (ez, emz) = (g.z.exp(), (-g.z).exp());
        let s = ar * t;
        let q = t * FRAC_1_SQRT_2;
        let point = Point::new(g.x - br * ez * q * phi(s), g.y + br * emz * q * phi(-s), g.z + s);
        let zd = j.d1.dz;
        let sd = ard * t;
        let f_eps = CoordVector::new(
            j.d1.dx - q * ez * (brd * phi(s) + br * zd * phi(s) + br * dphi(s) * sd),
            j.d1.dy + q * emz * (brd * phi(-s) - br * zd * phi(-s) - br * dphi(-s) * sd),
            zd + sd,
        );
        (point, f_eps, FrameVector::horizontal(ar, br))
    }

    pub fn f(&self, eps: f64, t: f64) -> Point {
        self.eval_parts(eps, t).0
    }

    /// `∂F/∂ε` in coordinates.
    pub fn f_eps_coord(&self, eps: f64, t: f64) -> CoordVector {
        self.eval_parts(eps, t).1
    }

    pub fn f_t(&self, eps: f64, t: f64) -> FrameVector {
        self.eval_parts(eps, t).2
    }

    pub fn point_data(&self, eps: f64, t: f64) -> RuledPointData {
        let (p, fe, ft) = self.eval_parts(eps, t);
        RuledPointData::new(p, frame::to_frame(&p, &fe), ft)
    }

    /// The ruling through `Γ(ε)` as a unit-speed characteristic curve;
    /// `F(ε, t) = ruling.point(speed·t)`.
    pub fn ruling_curve(&self, eps: f64) -> Result<(CharacteristicCurve, f64), CurveError> {
        let j = self.gamma.jet(eps);
        let (ar, br, _, _) = self.ruling(&j);
        let c = curve::from_frame(j.p, ar, br)?;
        Ok((c, ar.hypot(br)))
    }

    /// `⟨V_ε, T⟩` with `V_ε = ∂F/∂ε`.
    ///
    /// For unskewed sweeps the closed form
    /// `√2⟨V,T⟩ = −m sinh s − √2 p² t sinhc(s) + (ṗm − pṁ)(t²/2) sinhc(s/2)²`
    /// is used; otherwise the T-component of the analytic `F_ε`.
    pub fn jacobi_vertical(&self, eps: f64, t: f64) -> f64 {
        if self.skew != 0.0 {
            return self.point_data(eps, t).f_eps.c;
        }
        let j = self.gamma.jet(eps);
        let (p, m) = j.p_m();
        let (pd, md) = j.p_m_dot();
        let s = m * t * FRAC_1_SQRT_2;
        let h = sinhc(0.5 * s);
        let vp = -m * s.sinh() - SQRT_2 * p * p * t * sinhc(s) + (pd * m - p * md) * 0.5 * t * t * h * h;
        vp * FRAC_1_SQRT_2
    }

    /// Central difference of `F` in `ε` (step `h`) contracted with `T`.
    pub fn jacobi_vertical_fd(&self, eps: f64, t: f64, h: f64) -> f64 {
        let p = self.f(eps, t);
        let (a, b) = (self.f(eps + h, t), self.f(eps - h, t));
        let d = CoordVector::new((a.x - b.x) / (2.0 * h), (a.y - b.y) / (2.0 * h), (a.z - b.z) / (2.0 * h));
        frame::to_frame(&p, &d).c
    }

    pub fn nu_h(&self, eps: f64, t: f64) -> Option<FrameVector> {
        self.point_data(eps, t).nu_h
    }

    /// `∇_W ν_h` for a tangent `W`, by central differences of `ν_h` in the
    /// parameters.
    fn covariant_nu_h(&self, d: &RuledPointData, eps: f64, t: f64, w: &FrameVector) -> Option<FrameVector> {
        const H: f64 = 1e-5;
        let nu = d.nu_h?;
        let de = (self.nu_h(eps + H, t)? - self.nu_h(eps - H, t)?) * (0.5 / H);
        let dt = (self.nu_h(eps, t + H)? - self.nu_h(eps, t - H)?) * (0.5 / H);
        let (al, be) = d.tangent_coefficients(w);
        let dnu = de * al + dt * be;
        Some(frame::covariant_derivative(w, &nu, &dnu))
    }

    /// `H = −⟨∇_Z ν_h, Z⟩` computed from the parametrization.
    pub fn mean_curvature(&self, eps: f64, t: f64) -> Option<f64> {
        let d = self.point_data(eps, t);
        let z = d.z?;
        Some(-self.covariant_nu_h(&d, eps, t, &z)?.dot(&z))
    }

    /// `⟨∇_S ν_h, Z⟩` computed from the parametrization.
    pub fn s_derivative_term(&self, eps: f64, t: f64) -> Option<f64> {
        let d = self.point_data(eps, t);
        let (s, z) = (d.s?, d.z?);
        Some(self.covariant_nu_h(&d, eps, t, &s)?.dot(&z))
    }

    pub fn samples(&self) -> Vec<SweepSample> {
        let [ne, nt] = self.grid;
        par::map_range(ne * nt, |k| {
            let (eps, t) = (self.eps_at(k / nt), self.t_at(k % nt));
            let d = self.point_data(eps, t);
            SweepSample { eps, t, point: d.point, nh_norm: d.nh_norm, vt: self.jacobi_vertical(eps, t) }
        })
    }
}

/// Largest `|⟨γ̇_ε(0), Γ̇(ε)⟩| / (|γ̇_ε(0)||Γ̇(ε)|)` over the ε grid.
pub fn orthogonality_check(s: &RuledSurface) -> f64 {
    (0..s.grid[0])
        .map(|i| {
            let d = s.point_data(s.eps_at(i), 0.0);
            (d.f_t.dot(&d.f_eps) / (d.f_t.norm() * d.f_eps.norm())).abs()
        })
        .fold(0.0, f64::max)
}

/// A connected set of zeros of `⟨V, T⟩` found on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularLocus {
    pub t_mean: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub eps_min: f64,
    pub eps_max: f64,
    /// Number of ε-lines on which this locus was detected.
    pub lines: usize,
}

impl SingularLocus {
    pub fn is_base_curve(&self, tol: f64) -> bool {
        self.t_min.abs() <= tol && self.t_max.abs() <= tol
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Zeros of `⟨V,T⟩` along one ruling, from sign changes and near-zero grid
/// values (threshold `ε_sing·(1 + max|⟨V,T⟩|)`).
pub fn line_zeros(s: &RuledSurface, eps: f64) -> Vec<f64> {
    let nt = s.grid[1];
    let ts: Vec<f64> = (0..nt).map(|j| s.t_at(j)).collect();
    let vs: Vec<f64> = ts.iter().map(|&t| s.jacobi_vertical(eps, t)).collect();
    let vmax = vs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let thr = EPS_SING * (1.0 + vmax);
    let mut zeros = Vec::new();
    let mut j = 0;
    while j < nt {
        if vs[j].abs() < thr {
            // a run of near-zero values counts once
            let start = j;
            while j + 1 < nt && vs[j + 1].abs() < thr {
                j += 1;
            }
            let best = (start..=j).min_by(|&a, &b| vs[a].abs().total_cmp(&vs[b].abs())).unwrap_or(start);
            zeros.push(ts[best]);
        } else if j + 1 < nt && vs[j + 1].abs() >= thr && (vs[j] < 0.0) != (vs[j + 1] < 0.0) {
            zeros.push(bisect(|t| s.jacobi_vertical(eps, t), ts[j], ts[j + 1]));
        }
        j += 1;
    }
    zeros
}

/// All singular loci of a sweep on its grid.
///
/// Zeros on adjacent ε-lines are joined by rank when both lines have the
/// same number of zeros (zero curves of a smooth function do not cross
/// transversally), and by mutual nearest neighbour otherwise.
pub fn uniqueness_scan(s: &RuledSurface) -> Vec<SingularLocus> {
    let lines: Vec<Vec<f64>> = par::map_range(s.grid[0], |i| line_zeros(s, s.eps_at(i)));
    let offsets: Vec<usize> = lines
        .iter()
        .scan(0, |acc, l| {
            let o = *acc;
            *acc += l.len();
            Some(o)
        })
        .collect();
    let total: usize = lines.iter().map(Vec::len).sum();
    let mut parent: Vec<usize> = (0..total).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let nearest = |l: &[f64], t: f64| {
        (0..l.len()).min_by(|&a, &b| (l[a] - t).abs().total_cmp(&(l[b] - t).abs()))
    };
    for i in 0..lines.len().saturating_sub(1) {
        let (a, b) = (&lines[i], &lines[i + 1]);
        let pairs: Vec<(usize, usize)> = if a.len() == b.len() {
            (0..a.len()).map(|k| (k, k)).collect()
        } else {
            (0..a.len())
                .filter_map(|k| {
                    let m = nearest(b, a[k])?;
                    (nearest(a, b[m]) == Some(k)).then_some((k, m))
                })
                .collect()
        };
        for (k, m) in pairs {
            let (ra, rb) = (root(&mut parent, offsets[i] + k), root(&mut parent, offsets[i + 1] + m));
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut groups: Vec<(usize, Vec<(f64, f64)>)> = Vec::new();
    for (i, l) in lines.iter().enumerate() {
        for (k, &t) in l.iter().enumerate() {
            let r = root(&mut parent, offsets[i] + k);
            match groups.iter_mut().find(|g| g.0 == r) {
                Some(g) => g.1.push((s.eps_at(i), t)),
                None => groups.push((r, vec![(s.eps_at(i), t)])),
            }
        }
    }
    let mut loci: Vec<SingularLocus> = groups
        .into_iter()
        .map(|(_, c)| {
            let n = c.len();
            let mut eps: Vec<f64> = c.iter().map(|p| p.0).collect();
            eps.dedup();
            SingularLocus {
                t_mean: c.iter().map(|p| p.1).sum::<f64>() / n as f64,
                t_min: c.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
                t_max: c.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
                eps_min: eps[0],
                eps_max: eps[eps.len() - 1],
                lines: eps.len(),
            }
        })
        .collect();
    loci.sort_by(|a, b| a.t_mean.total_cmp(&b.t_mean));
    loci
}

/// The minimal surface with an isolated singular point at `p0`.
pub fn singular_point_surface(p0: Point) -> ScalarField {
    CatalogSurface::SaddlePoint { p0 }.field()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    PlaneAb,
    SaddleCurve,
}

pub fn family_surfaces(kind: FamilyKind, params: &[f64]) -> Result<CatalogSurface, StationaryError> {
    let name = match kind {
        FamilyKind::PlaneAb => "plane-ab",
        FamilyKind::SaddleCurve => "saddle-curve",
    };
    CatalogSurface::from_name(name, params).map_err(|e| match e {
        FieldError::BadParams(m) => StationaryError::BadParams(m),
        other => StationaryError::Field(other),
    })
}

/// Height of the singular line of `{ax + by + c = 0}`, present when `ab > 0`.
pub fn plane_ab_singular_height(a: f64, b: f64) -> Option<f64> {
    (a * b > 0.0).then(|| 0.5 * (b / a).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface;
    use rand::{Rng, SeedableRng};

    fn sweep(g: HorizontalCurve) -> RuledSurface {
        sweep_surface(g, [-1.0, 1.0], [-2.0, 2.0], [21, 41]).unwrap()
    }

    fn generic() -> HorizontalCurve {
        HorizontalCurve::Characteristic { p0: Point::new(0.2, -0.1, 0.3), a: 0.6, b: 0.8 }
    }

    fn ramp() -> HorizontalCurve {
        HorizontalCurve::Ramp { p0: Point::ORIGIN, w: 0.5, mu0: 0.5, mu1: -2.0 }
    }

    #[test]
    fn series_helpers() {
        for s in [-0.5, -1e-3, -1e-4, 0.0, 1e-6, 2e-3, 0.3, 4.0] {
            let h = 1e-5;
            let fd = (phi(s + h) - phi(s - h)) / (2.0 * h);
            assert!((fd - dphi(s)).abs() < 1e-8, "{s}: {fd} vs {}", dphi(s));
        }
        assert!((dphi(0.999e-3) - dphi(1.001e-3)).abs() < 1e-6);
    }

    #[test]
    fn curve_jets_match_finite_differences() {
        let curves = [
            generic(),
            HorizontalCurve::XLine { p0: Point::new(1.0, 2.0, -0.5) },
            HorizontalCurve::YLine { p0: Point::new(1.0, 2.0, -0.5) },
            ramp(),
            HorizontalCurve::Ramp { p0: Point::new(0.3, 0.1, -0.2), w: 0.0, mu0: 1.0, mu1: 0.5 },
        ];
        let h = 1e-5;
        for g in curves {
            for eps in [-0.7, 0.0, 0.4] {
                let j = g.jet(eps);
                let (a, b) = (g.jet(eps + h), g.jet(eps - h));
                let d1 = CoordVector::new((a.p.x - b.p.x) / (2.0 * h), (a.p.y - b.p.y) / (2.0 * h), (a.p.z - b.p.z) / (2.0 * h));
                let d2 = (a.d1 - b.d1) * (0.5 / h);
                assert!((d1 - j.d1).to_array().iter().all(|v| v.abs() < 1e-8), "{g:?} {eps}");
                assert!((d2 - j.d2).to_array().iter().all(|v| v.abs() < 1e-8), "{g:?} {eps}");
                assert!(j.horizontality_defect() < 1e-14);
                let (pa, ma) = a.p_m();
                let (pb, mb) = b.p_m();
                let (pd, md) = j.p_m_dot();
                assert!(((pa - pb) / (2.0 * h) - pd).abs() < 1e-8 && ((ma - mb) / (2.0 * h) - md).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn base_curve_and_rulings() {
        for g in [generic(), ramp(), HorizontalCurve::XLine { p0: Point::ORIGIN }, HorizontalCurve::YLine { p0: Point::ORIGIN }] {
            let s = sweep(g);
            for i in 0..s.grid[0] {
                let eps = s.eps_at(i);
                assert_eq!(s.f(eps, 0.0), g.point(eps));
                let (c, speed) = s.ruling_curve(eps).unwrap();
                // γ̇_ε(0) = J(Γ̇(ε))
                let jg = g.jet(eps).velocity_frame().j();
                assert!(s.f_t(eps, 0.0).max_abs_diff(&jg) < 1e-12);
                for j in 0..s.grid[1] {
                    let t = s.t_at(j);
                    let q = c.point(speed * t).unwrap();
                    assert!(q.coord_distance(&s.f(eps, t)) < 1e-10, "{g:?} ({eps}, {t})");
                }
            }
        }
    }

    #[test]
    fn rulings_are_horizontal_and_f_t_is_derivative() {
        let s = sweep(ramp());
        let h = 1e-6;
        for (eps, t) in [(0.3, 1.5), (-0.8, -1.0), (0.0, 0.2)] {
            let p = s.f(eps, t);
            let (a, b) = (s.f(eps, t + h), s.f(eps, t - h));
            let d = CoordVector::new((a.x - b.x) / (2.0 * h), (a.y - b.y) / (2.0 * h), (a.z - b.z) / (2.0 * h));
            let fd = frame::to_frame(&p, &d);
            assert!(fd.max_abs_diff(&s.f_t(eps, t)) < 1e-8);
            assert!(fd.c.abs() < 1e-8);
        }
    }

    #[test]
    fn branches() {
        assert_eq!(sweep(HorizontalCurve::XLine { p0: Point::ORIGIN }).branch_at(0.3), Branch::XBranch);
        assert_eq!(sweep(HorizontalCurve::YLine { p0: Point::ORIGIN }).branch_at(0.3), Branch::YBranch);
        assert_eq!(sweep(generic()).branch_at(0.3), Branch::Generic);
        let bad = HorizontalCurve::Ramp { p0: Point::ORIGIN, w: 0.0, mu0: 0.0, mu1: 0.0 };
        assert!(matches!(sweep_surface(bad, [-1.0, 1.0], [0.0, 1.0], [3, 3]), Err(StationaryError::DegenerateRuling { .. })));
    }

    #[test]
    fn degenerate_branch_displays() {
        // X-branch: x − ż e^z t/√2, y + ż e^{−z} t/√2, z constant
        let s = sweep(HorizontalCurve::XLine { p0: Point::ORIGIN });
        for (eps, t) in [(0.5, 1.3), (-0.2, -0.7)] {
            let p = s.f(eps, t);
            let want = Point::new(-eps.exp() * t * FRAC_1_SQRT_2, (-eps).exp() * t * FRAC_1_SQRT_2, eps);
            assert!(p.coord_distance(&want) < 1e-15);
        }
        // Y-branch: x, y constant, z affine
        let s = sweep(HorizontalCurve::YLine { p0: Point::ORIGIN });
        let g = s.gamma.point(0.4);
        let p = s.f(0.4, 1.1);
        assert_eq!((p.x, p.y), (g.x, g.y));
        assert!((p.z - (g.z - 1.1)).abs() < 1e-15);
    }

    #[test]
    fn sweeps_lie_on_known_level_sets() {
        let cases = [
            (HorizontalCurve::XLine { p0: Point::ORIGIN }, CatalogSurface::SaddleCurve { p0: Point::ORIGIN }),
            (
                HorizontalCurve::XLine { p0: Point::new(0.5, -1.0, 2.0) },
                CatalogSurface::SaddleCurve { p0: Point::new(0.5, -1.0, 0.0) },
            ),
            (HorizontalCurve::YLine { p0: Point::ORIGIN }, CatalogSurface::PlaneAb { a: 1.0, b: 1.0, c: 0.0 }),
        ];
        for (g, cat) in cases {
            let s = sweep(g);
            let f = cat.field();
            for smp in s.samples() {
                assert!(f.eval(&smp.point).unwrap().abs() < 1e-12, "{g:?} {smp:?}");
                if smp.nh_norm > 1e-3 {
                    let r = surface::minimal_residual(&f, &smp.point).unwrap();
                    assert!(r.normalized.unwrap().abs() < 1e-9);
                }
            }
        }
        // The z-axis sweep is not the isolated-point surface.
        let s = sweep(HorizontalCurve::XLine { p0: Point::ORIGIN });
        let f = singular_point_surface(Point::ORIGIN);
        assert!(s.samples().iter().any(|p| f.eval(&p.point).unwrap().abs() > 0.1));
    }

    #[test]
    fn orthogonality() {
        for g in [generic(), ramp(), HorizontalCurve::XLine { p0: Point::ORIGIN }, HorizontalCurve::YLine { p0: Point::ORIGIN }] {
            assert!(orthogonality_check(&sweep(g)) < 1e-10);
        }
        let s = skewed_surface(generic(), [-1.0, 1.0], [-1.0, 1.0], [11, 11], std::f64::consts::FRAC_PI_2 * 0.9).unwrap();
        assert!(orthogonality_check(&s) > 0.5);
        // plane x + y = 0: singular line is along Y, rulings along X
        let s = sweep(HorizontalCurve::YLine { p0: Point::ORIGIN });
        let d = s.point_data(0.3, 0.0);
        assert!(d.f_t.max_abs_diff(&-FrameVector::X) < 1e-15 && d.f_eps.max_abs_diff(&FrameVector::Y) < 1e-15);
    }

    #[test]
    fn jacobi_closed_form_matches_finite_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for g in [generic(), ramp(), HorizontalCurve::XLine { p0: Point::ORIGIN }, HorizontalCurve::YLine { p0: Point::ORIGIN }] {
            let s = sweep(g);
            for _ in 0..100 {
                let (eps, t) = (rng.gen_range(-1.0..1.0), rng.gen_range(-2.0..2.0));
                let v = s.jacobi_vertical(eps, t);
                let fd = s.jacobi_vertical_fd(eps, t, 1e-6);
                let analytic = s.point_data(eps, t).f_eps.c;
                assert!((v - fd).abs() <= 1e-5 * v.abs().max(1e-3), "{g:?} ({eps},{t}): {v} vs {fd}");
                assert!((v - analytic).abs() <= 1e-12 * (1.0 + v.abs()));
            }
            for i in 0..s.grid[0] {
                assert_eq!(s.jacobi_vertical(s.eps_at(i), 0.0), 0.0);
            }
        }
    }

    #[test]
    fn jacobi_first_order_at_t_zero() {
        // ⟨V,T⟩ = −|Γ̇|² t + O(t²): a simple zero.
        for g in [generic(), ramp()] {
            let s = sweep(g);
            let speed2 = g.jet(0.3).velocity_frame().norm_sq();
            let t = 1e-6;
            assert!((s.jacobi_vertical(0.3, t) / t + speed2).abs() < 1e-5);
        }
    }

    #[test]
    fn uniqueness_on_characteristic_sweeps() {
        for g in [generic(), HorizontalCurve::XLine { p0: Point::ORIGIN }, HorizontalCurve::YLine { p0: Point::ORIGIN }] {
            let s = sweep_surface(g, [-1.0, 1.0], [-5.0, 5.0], [21, 201]).unwrap();
            let loci = uniqueness_scan(&s);
            assert_eq!(loci.len(), 1, "{g:?}: {loci:?}");
            assert!(loci[0].is_base_curve(1e-12) && loci[0].lines == 21);
        }
    }

    #[test]
    fn ramp_fixture_has_two_loci() {
        let s = sweep_surface(ramp(), [-0.2, 0.2], [-0.5, 3.0], [11, 351]).unwrap();
        let loci = uniqueness_scan(&s);
        assert_eq!(loci.len(), 2, "{loci:?}");
        assert!(loci[0].is_base_curve(1e-12));
        assert!(loci[1].t_mean > 0.5 && loci[1].lines == 11);
    }

    #[test]
    fn ruled_mean_curvature_vanishes() {
        for g in [generic(), HorizontalCurve::XLine { p0: Point::new(0.1, 0.2, 0.3) }] {
            let s = sweep(g);
            for (eps, t) in [(0.2, 0.5), (-0.6, -1.5), (0.9, 1.9)] {
                assert!(s.mean_curvature(eps, t).unwrap().abs() < 1e-7);
            }
        }
        // H = 0 comes from the rulings alone, so the non-characteristic ramp also has it
        let s = sweep(ramp());
        assert!(s.mean_curvature(0.2, 0.5).unwrap().abs() < 1e-7);
    }

    #[test]
    fn ruled_geometry_matches_level_set() {
        // On the saddle-curve surface both descriptions must agree once the
        // orientations are matched.
        let s = sweep(HorizontalCurve::XLine { p0: Point::ORIGIN });
        let f = CatalogSurface::SaddleCurve { p0: Point::ORIGIN }.field();
        for (eps, t) in [(0.2, 0.5), (-0.6, -1.5), (0.4, 1.2)] {
            let d = s.point_data(eps, t);
            let l = surface::point_data(&f, &d.point).unwrap();
            let sign = d.normal.dot(&l.normal).signum();
            let fl = if sign > 0.0 { f.clone() } else { f.negated() };
            let l = surface::point_data(&fl, &d.point).unwrap();
            assert!(d.normal.max_abs_diff(&l.normal) < 1e-12);
            let a = s.s_derivative_term(eps, t).unwrap();
            let b = surface::s_derivative_term(&fl, &d.point, &Default::default()).unwrap();
            assert!((a - b).abs() < 1e-7, "{a} vs {b}");
            assert!((b + 0.5 * d.nh_norm).abs() < 1e-9);
        }
    }

    #[test]
    fn singular_set_at_t_zero_has_normal_t() {
        let s = sweep(generic());
        let d = s.point_data(0.1, 0.0);
        assert!(d.normal.max_abs_diff(&FrameVector::T) < 1e-15 && d.nu_h.is_none());
    }

    #[test]
    fn non_geodesic_witness() {
        let s = non_geodesic_surface(Point::ORIGIN, frame::to_coord(&Point::ORIGIN, &FrameVector::horizontal(0.6, 0.8)), [-1.0, 1.0], [-1.0, 1.0], [5, 5]).unwrap();
        assert!(s.gamma.torsion_ratio(0.0).abs() > 0.01);
        let (c, _) = s.ruling_curve(0.0).unwrap();
        assert!(!c.is_geodesic());
        assert!(non_geodesic_surface(Point::ORIGIN, CoordVector::new(0.0, 0.0, 1.0), [-1.0, 1.0], [-1.0, 1.0], [5, 5]).is_err());
    }

    #[test]
    fn families() {
        assert_eq!(family_surfaces(FamilyKind::SaddleCurve, &[]).unwrap().field().to_string(), "exp(z)*y + exp(-z)*x");
        assert_eq!(plane_ab_singular_height(1.0, 1.0), Some(0.0));
        assert_eq!(plane_ab_singular_height(1.0, 0.0), None);
        assert!(matches!(family_surfaces(FamilyKind::PlaneAb, &[0.0, 0.0, 1.0]), Err(StationaryError::BadParams(_))));
        let z = plane_ab_singular_height(2.0, 3.0).unwrap();
        let f = CatalogSurface::PlaneAb { a: 2.0, b: 3.0, c: 1.0 }.field();
        let p = surface::project_to_surface(&f, &Point::new(0.0, 0.0, z), 20).unwrap();
        assert!(surface::point_data(&f, &p).unwrap().singular);
    }

    #[test]
    fn isolated_singular_point() {
        let f = singular_point_surface(Point::new(1.0, 0.0, 0.0));
        assert_eq!(f.eval(&Point::new(1.0, 0.0, 0.0)).unwrap(), 0.0);
        let g = ScalarField::parse("exp(-z)*x + y").unwrap();
        let h = singular_point_surface(Point::ORIGIN);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let p = Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let q = surface::project_to_surface(&h, &p, 30).unwrap();
            assert!(g.eval(&q).unwrap().abs() < 1e-12);
            let r = surface::minimal_residual(&f, &p).unwrap();
            assert!(r.coordinate.abs() < 1e-12);
        }
    }
}
