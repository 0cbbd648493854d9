//! Second variation of the sub-Riemannian area.
//!
//! [`q_form`] integrates the stability form
//!
//! ```text
//! Q(u) = ∫_Σ { |N_h|⁻¹Z(u)² + |N_h|((1 + ⟨Z,Y⟩²) − (|N_h|(½ − ⟨Z,Y⟩²) − ⟨∇_S ν_h, Z⟩)²)u² } dΣ
//!      + 4∫_{Σ₀} ⟨N,T⟩⟨Z,Y⟩²⟨Z,ν⟩u² + ∫_{Σ₀} S(u)²
//! ```
//!
//! over a parametrized [`Patch`], with test functions `u = A·φ(p₁)ψ(p₂)`
//! built from C² plateau bumps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve;
use crate::field::{CatalogSurface, FieldError, ScalarField};
use crate::frame::{self, CoordVector, FrameVector, Point};
use crate::quadrature::{self, Estimate};
use crate::stationary::{self, HorizontalCurve, RuledSurface, StationaryError};
use crate::surface::{self, SurfaceError, Tolerances};

/// Tube half-width around a singular set, as a fraction of the parameter range.
pub const DEFAULT_TUBE_FRACTION: f64 = 0.1;
/// Largest `|H|` accepted as minimal.
pub const MINIMAL_TOL: f64 = 1e-7;
/// Tolerance on `sup ⟨N,T⟩` for the sufficient condition.
pub const SUFFICIENT_TOL: f64 = 1e-8;
/// `|⟨Z,X⟩|` below which the Jacobi profile is treated as affine.
pub const ZX_ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StabilityError {
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Stationary(#[from] StationaryError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("inadmissible test function: {0}")]
    Inadmissible(String),
    #[error("surface is not minimal (|H| = {h:e} at ({}, {}, {}))", point.x, point.y, point.z)]
    NotMinimal { h: f64, point: Point },
    #[error("singular point at ({}, {}, {})", point.x, point.y, point.z)]
    SingularPointFound { point: Point },
    #[error("perturbation support is not inside the window")]
    PerturbationNotCompact,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// C² bump: 1 on `|x − c| ≤ plateau`, 0 on `|x − c| ≥ radius`, quintic
/// smoothstep in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub plateau: f64,
    pub radius: f64,
}

impl Bump {
    pub fn new(center: f64, plateau: f64, radius: f64) -> Result<Self, StabilityError> {
        if !(center.is_finite() && plateau >= 0.0 && radius > plateau && radius.is_finite()) {
            return Err(StabilityError::Inadmissible(format!("bad bump ({center}, {plateau}, {radius})")));
        }
        Ok(Self { center, plateau, radius })
    }

    /// Value and derivative.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let r = (x - self.center).abs();
        if r <= self.plateau {
            return (1.0, 0.0);
        }
        if r >= self.radius {
            return (0.0, 0.0);
        }
        let w = self.radius - self.plateau;
        let s = (self.radius - r) / w;
        let v = s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
        let ds = 30.0 * s * s * (1.0 - s) * (1.0 - s);
        (v, -ds * (x - self.center).signum() / w)
    }

    pub fn support(&self) -> [f64; 2] {
        [self.center - self.radius, self.center + self.radius]
    }

    pub fn breakpoints(&self) -> [f64; 5] {
        let c = self.center;
        [c - self.radius, c - self.plateau, c, c + self.plateau, c + self.radius]
    }
}

/// `u(p₁, p₂) = amplitude·φ(p₁)ψ(p₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub amplitude: f64,
    pub first: Bump,
    pub second: Bump,
}

impl TestFunction {
    pub fn zero() -> Self {
        let b = Bump { center: 0.0, plateau: 0.0, radius: 1.0 };
        Self { amplitude: 0.0, first: b, second: b }
    }

    /// `(u, ∂₁u, ∂₂u)`
    pub fn eval(&self, p1: f64, p2: f64) -> (f64, f64, f64) {
        let (f, df) = self.first.eval(p1);
        let (g, dg) = self.second.eval(p2);
        let a = self.amplitude;
        (a * f * g, a * df * g, a * f * dg)
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0
    }
}

/// Singular set of a patch in parameter coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SingularSet {
    Empty,
    /// The line `p₂ = at`, a singular curve parametrized by `p₁`.
    Curve { at: f64 },
    Point { at: [f64; 2] },
}

/// Pointwise quantities entering `Q` at a regular point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchPoint {
    pub point: Point,
    /// Riemannian area element `|Φ₁ × Φ₂|`.
    pub area: f64,
    pub nh: f64,
    pub nt: f64,
    /// `⟨Z, Y⟩`
    pub zy: f64,
    /// `⟨∇_S ν_h, Z⟩`
    pub ds_nu_z: f64,
    /// `Z = α Φ₁ + β Φ₂`
    pub z_coef: (f64, f64),
    pub s_coef: (f64, f64),
}

/// One-sided limits along a singular curve at parameter `p₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySide {
    /// `⟨N,T⟩⟨Z,ν⟩` with `ν` pointing from the curve into this side.
    pub nt_z_nu: f64,
    pub zy2: f64,
    /// `S = α Φ₁ + β Φ₂`
    pub s_coef: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    /// `|∂Φ/∂p₁|` along the singular curve.
    pub speed: f64,
    pub sides: [BoundarySide; 2],
}

/// A parametrized piece of a surface.
pub trait Patch: Sync {
    fn label(&self) -> String;
    fn domain(&self) -> [[f64; 2]; 2];
    fn singular_set(&self) -> SingularSet;
    /// `None` on the singular set or where the parametrization fails.
    fn geometry(&self, p1: f64, p2: f64) -> Option<PatchPoint>;
    fn mean_curvature(&self, p1: f64, p2: f64) -> Option<f64>;
    /// Limits along a singular curve; `None` for other singular sets.
    fn boundary(&self, p1: f64) -> Option<BoundaryPoint>;
}

fn patch_point(point: Point, e1: FrameVector, e2: FrameVector, normal: FrameVector, ds_nu_z: f64) -> Option<PatchPoint> {
    let nh = normal.horizontal_part().norm();
    if nh < surface::EPS_SING {
        return None;
    }
    let nu = normal.horizontal_part() * (1.0 / nh);
    let z = nu.j();
    let s = nu * normal.c - FrameVector::T * nh;
    Some(PatchPoint {
        point,
        area: e1.cross(&e2).norm(),
        nh,
        nt: normal.c,
        zy: z.b,
        ds_nu_z,
        z_coef: frame::tangent_coefficients(&e1, &e2, &z),
        s_coef: frame::tangent_coefficients(&e1, &e2, &s),
    })
}

/// A level set written as a graph `x_k = g(p₁, p₂)` over the other two
/// coordinates, with geometry from the field's analytic derivatives.
#[derive(Debug, Clone)]
pub struct GraphPatch {
    pub field: ScalarField,
    pub axis: usize,
    pub domain: [[f64; 2]; 2],
    pub singular: SingularSet,
    pub label: String,
}

impl GraphPatch {
    pub fn free_axes(&self) -> [usize; 2] {
        match self.axis {
            0 => [1, 2],
            1 => [0, 2],
            _ => [0, 1],
        }
    }

    fn assemble(&self, p1: f64, p2: f64, xk: f64) -> Point {
        let mut c = [0.0; 3];
        let [i, j] = self.free_axes();
        c[i] = p1;
        c[j] = p2;
        c[self.axis] = xk;
        Point::new(c[0], c[1], c[2])
    }

    /// Surface point over `(p₁, p₂)` by Newton iteration in the graph axis.
    pub fn point(&self, p1: f64, p2: f64) -> Option<Point> {
        let mut xk = 0.0;
        for _ in 0..60 {
            let p = self.assemble(p1, p2, xk);
            let u = self.field.eval(&p).ok()?;
            let g = self.field.eval_grad(&p).ok()?.to_array()[self.axis];
            if g == 0.0 || !g.is_finite() {
                return None;
            }
            let step = u / g;
            xk -= step;
            if step.abs() <= 1e-15 * (1.0 + xk.abs()) {
                return Some(self.assemble(p1, p2, xk));
            }
        }
        None
    }

    fn tangents(&self, p: &Point) -> Option<(FrameVector, FrameVector)> {
        let g = self.field.eval_grad(p).ok()?.to_array();
        let [i, j] = self.free_axes();
        let k = self.axis;
        let e = |free: usize| {
            let mut c = [0.0; 3];
            c[free] = 1.0;
            c[k] = -g[free] / g[k];
            frame::to_frame(p, &CoordVector::new(c[0], c[1], c[2]))
        };
        Some((e(i), e(j)))
    }
}

impl Patch for GraphPatch {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn domain(&self) -> [[f64; 2]; 2] {
        self.domain
    }

    fn singular_set(&self) -> SingularSet {
        self.singular
    }

    fn geometry(&self, p1: f64, p2: f64) -> Option<PatchPoint> {
        let p = self.point(p1, p2)?;
        let tol = Tolerances::default();
        let d = surface::level_data(&self.field, &p, &tol).ok()?;
        if d.singular {
            return None;
        }
        let ds = surface::s_derivative_term(&self.field, &p, &Tolerances { eps_level: f64::INFINITY, ..tol }).ok()?;
        let (e1, e2) = self.tangents(&p)?;
        patch_point(p, e1, e2, d.normal, ds)
    }

    fn mean_curvature(&self, p1: f64, p2: f64) -> Option<f64> {
        let p = self.point(p1, p2)?;
        surface::mean_curvature_with(&self.field, &p, &Tolerances { eps_level: f64::INFINITY, ..Default::default() }).ok()
    }

    fn boundary(&self, _p1: f64) -> Option<BoundaryPoint> {
        None
    }
}

/// A sweep `F(ε, t)` with its singular curve at `t = 0`. When a defining
/// field is known, `⟨∇_S ν_h, Z⟩` comes from its second derivatives;
/// otherwise from differences of `ν_h` on the parametrization.
#[derive(Debug, Clone)]
pub struct RuledPatch {
    pub surface: RuledSurface,
    pub field: Option<ScalarField>,
    pub label: String,
    /// Use `−N` instead of the sweep's normal.
    pub flip: bool,
}

/// Offset from the singular curve used for one-sided limits.
const SIDE_OFFSET: f64 = 1e-6;

impl RuledPatch {
    fn oriented_field(&self, normal: &FrameVector, p: &Point) -> Option<ScalarField> {
        let f = self.field.as_ref()?;
        let d = surface::level_data(f, p, &Tolerances::default()).ok()?;
        Some(if d.normal.dot(normal) >= 0.0 { f.clone() } else { f.negated() })
    }
}

impl Patch for RuledPatch {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn domain(&self) -> [[f64; 2]; 2] {
        [self.surface.eps_range, self.surface.t_range]
    }

    fn singular_set(&self) -> SingularSet {
        let [a, b] = self.surface.t_range;
        if a < 0.0 && b > 0.0 {
            SingularSet::Curve { at: 0.0 }
        } else {
            SingularSet::Empty
        }
    }

    fn geometry(&self, eps: f64, t: f64) -> Option<PatchPoint> {
        let d = self.surface.point_data(eps, t);
        d.z?;
        let normal = if self.flip { -d.normal } else { d.normal };
        let ds = match &self.field {
            Some(_) => {
                let f = self.oriented_field(&normal, &d.point)?;
                let tol = Tolerances { eps_level: f64::INFINITY, ..Default::default() };
                surface::s_derivative_term(&f, &d.point, &tol).ok()?
            }
            // ⟨∇_S ν_h, Z⟩ is unchanged by the flip (S stays, ν_h and Z change sign)
            None => self.surface.s_derivative_term(eps, t)?,
        };
        patch_point(d.point, d.f_eps, d.f_t, normal, ds)
    }

    fn mean_curvature(&self, eps: f64, t: f64) -> Option<f64> {
        self.surface.mean_curvature(eps, t)
    }

    fn boundary(&self, eps: f64) -> Option<BoundaryPoint> {
        if self.singular_set() == (SingularSet::Empty) {
            return None;
        }
        let base = self.surface.point_data(eps, 0.0);
        let dir = base.f_t * (1.0 / base.f_t.norm());
        let side = |sign: f64| {
            let d = self.surface.point_data(eps, sign * SIDE_OFFSET);
            let z = d.z?;
            let nu = dir * sign;
            Some(BoundarySide {
                nt_z_nu: d.nt * z.dot(&nu),
                zy2: z.b * z.b,
                s_coef: d.tangent_coefficients(&d.s?),
            })
        };
        Some(BoundaryPoint { speed: base.f_eps.norm(), sides: [side(1.0)?, side(-1.0)?] })
    }
}

/// Default parameter domain for a catalog patch.
pub const DEFAULT_HALF_WIDTH: f64 = 1.0;

/// Parametrized patch of a catalog surface.
///
/// Planes `ax + by + c = 0` with `ab > 0` and the saddle-curve surface are
/// swept from their singular lines so that `Σ₀ = {t = 0}`; the rest are
/// graphs over two coordinates.
pub fn catalog_patch(cat: &CatalogSurface, half_width: f64) -> Result<Box<dyn Patch>, StabilityError> {
    catalog_patch_oriented(cat, half_width, false)
}

/// [`catalog_patch`] with the unit normal optionally reversed.
pub fn catalog_patch_oriented(cat: &CatalogSurface, half_width: f64, flip: bool) -> Result<Box<dyn Patch>, StabilityError> {
    cat.validate()?;
    let h = half_width;
    let graph = |axis: usize, center: [f64; 2], singular: SingularSet| -> Box<dyn Patch> {
        Box::new(GraphPatch {
            field: if flip { cat.field().negated() } else { cat.field() },
            axis,
            domain: [[center[0] - h, center[0] + h], [center[1] - h, center[1] + h]],
            singular,
            label: cat.name().to_string(),
        })
    };
    let ruled = |gamma: HorizontalCurve| -> Result<Box<dyn Patch>, StabilityError> {
        let s = stationary::sweep_surface(gamma, [-h, h], [-h, h], [9, 9])?;
        Ok(Box::new(RuledPatch { surface: s, field: Some(cat.field()), label: cat.name().to_string(), flip }))
    };
    Ok(match *cat {
        CatalogSurface::PlaneX { .. } => graph(0, [0.0, 0.0], SingularSet::Empty),
        CatalogSurface::PlaneY { .. } => graph(1, [0.0, 0.0], SingularSet::Empty),
        CatalogSurface::PlaneZ { .. } => graph(2, [0.0, 0.0], SingularSet::Empty),
        CatalogSurface::PlaneAb { a, b, c } => match stationary::plane_ab_singular_height(a, b) {
            Some(z) => {
                let n2 = a * a + b * b;
                ruled(HorizontalCurve::YLine { p0: Point::new(-c * a / n2, -c * b / n2, z) })?
            }
            None => graph(if a != 0.0 { 0 } else { 1 }, [0.0, 0.0], SingularSet::Empty),
        },
        CatalogSurface::Tilted { a, b, c, .. } => {
            let axis = [a.abs(), b.abs(), c.abs()].iter().enumerate().max_by(|x, y| x.1.total_cmp(y.1)).map(|x| x.0).unwrap_or(0);
            graph(axis, [0.0, 0.0], SingularSet::Empty)
        }
        CatalogSurface::SaddlePoint { p0 } => graph(0, [p0.y, p0.z], SingularSet::Point { at: [p0.y, p0.z] }),
        CatalogSurface::SaddleCurve { p0 } => ruled(HorizontalCurve::XLine { p0: Point::new(p0.x, p0.y, 0.0) })?,
    })
}

/// Graph patch for an arbitrary field over the two coordinates other than
/// `axis`. Rejects windows containing singular points.
pub fn field_patch(field: &ScalarField, axis: usize, domain: [[f64; 2]; 2]) -> Result<GraphPatch, StabilityError> {
    if axis > 2 {
        return Err(StabilityError::Unsupported("graph axis must be 0, 1 or 2".into()));
    }
    let g = GraphPatch { field: field.clone(), axis, domain, singular: SingularSet::Empty, label: field.to_string() };
    let n = 21;
    for i in 0..n {
        for j in 0..n {
            let p1 = domain[0][0] + (domain[0][1] - domain[0][0]) * i as f64 / (n - 1) as f64;
            let p2 = domain[1][0] + (domain[1][1] - domain[1][0]) * j as f64 / (n - 1) as f64;
            let p = g.point(p1, p2).ok_or_else(|| StabilityError::Numerical(format!("no surface point over ({p1}, {p2})")))?;
            let d = surface::level_data(field, &p, &Tolerances::default())?;
            if d.nh_norm < 1e-6 {
                return Err(StabilityError::Unsupported("singular points in the window of a general field".into()));
            }
        }
    }
    Ok(g)
}

fn tube_width(patch: &dyn Patch, tube: Option<f64>) -> f64 {
    let d = patch.domain();
    tube.unwrap_or(DEFAULT_TUBE_FRACTION * (d[1][1] - d[1][0]).min(d[0][1] - d[0][0]))
}

/// Check compact support and the constancy conditions near `Σ₀`.
pub fn check_admissible(patch: &dyn Patch, u: &TestFunction, delta: f64) -> Result<(), StabilityError> {
    if u.is_zero() {
        return Ok(());
    }
    let d = patch.domain();
    for (k, b) in [u.first, u.second].iter().enumerate() {
        let [lo, hi] = b.support();
        if lo <= d[k][0] || hi >= d[k][1] {
            return Err(StabilityError::Inadmissible(format!("support touches the boundary in parameter {}", k + 1)));
        }
    }
    match patch.singular_set() {
        SingularSet::Empty => Ok(()),
        SingularSet::Curve { at } => {
            let [lo, hi] = u.second.support();
            let meets = lo < at + delta && hi > at - delta;
            if meets && (u.second.center - at).abs() + delta > u.second.plateau {
                return Err(StabilityError::Inadmissible("Z(u) must vanish in the tube around the singular curve".into()));
            }
            Ok(())
        }
        SingularSet::Point { at } => {
            let dist2: f64 = (0..2)
                .map(|k| {
                    let b = [u.first, u.second][k].support();
                    let c = at[k].clamp(b[0], b[1]);
                    (c - at[k]).powi(2)
                })
                .sum();
            if dist2 < delta * delta {
                let covers = (u.first.center - at[0]).abs() + delta <= u.first.plateau
                    && (u.second.center - at[1]).abs() + delta <= u.second.plateau;
                if !covers {
                    return Err(StabilityError::Inadmissible("u must be constant near the singular point".into()));
                }
            }
            Ok(())
        }
    }
}

/// Seeded battery of admissible test functions.
///
/// Half of the bumps straddle the singular set (when there is one) with a
/// plateau covering the tube; the rest avoid it.
pub fn battery(patch: &dyn Patch, count: usize, seed: u64, tube: Option<f64>) -> Vec<TestFunction> {
    let d = patch.domain();
    let delta = tube_width(patch, tube);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let margin = 1e-3;
    let random_bump = |rng: &mut ChaCha8Rng, k: usize| {
        let [a, b] = d[k];
        let len = b - a;
        let radius = rng.gen_range(0.15..0.45) * len;
        let center = rng.gen_range(a + radius + margin * len..b - radius - margin * len);
        let plateau = rng.gen_range(0.0..0.6) * radius;
        Bump { center, plateau, radius }
    };
    let centered_bump = |rng: &mut ChaCha8Rng, k: usize, at: f64| {
        let [a, b] = d[k];
        let room = (at - a).min(b - at) * (1.0 - margin);
        let plateau = delta * rng.gen_range(1.05..1.6);
        let plateau = plateau.min(0.8 * room);
        let radius = rng.gen_range(plateau + 0.3 * (room - plateau)..room);
        Bump { center: at, plateau, radius }
    };
    while out.len() < count {
        let amplitude = rng.gen_range(0.5..2.0);
        let straddle = out.len() % 2 == 0;
        let u = match (patch.singular_set(), straddle) {
            (SingularSet::Curve { at }, true) => {
                TestFunction { amplitude, first: random_bump(&mut rng, 0), second: centered_bump(&mut rng, 1, at) }
            }
            (SingularSet::Point { at }, true) => TestFunction {
                amplitude,
                first: centered_bump(&mut rng, 0, at[0]),
                second: centered_bump(&mut rng, 1, at[1]),
            },
            _ => TestFunction { amplitude, first: random_bump(&mut rng, 0), second: random_bump(&mut rng, 1) },
        };
        if check_admissible(patch, &u, delta).is_ok() {
            out.push(u);
        }
    }
    out
}

/// Which integrand to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QIntegrand {
    /// The general stability form.
    General,
    /// `∫{|N_h|⁻¹Z(u)² + |N_h|⟨N,T⟩²u²} + ∫_{Σ₀} S(u)²`, printed for the planes `ax + by + c = 0`.
    PlaneAb,
    /// `∫{|N_h|⁻¹Z(u)² + 2|N_h|²u²} + ∫_{Σ₀} S(u)² + 4∫_{Σ₀} u²`, printed for `e^z y + e^{−z}x = 0`.
    SaddleCurve,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureReport {
    pub surface_integral: f64,
    pub boundary_integral_tau: f64,
    #[serde(rename = "boundary_integral_S")]
    pub boundary_integral_s: f64,
    pub total: f64,
    pub error_estimate: f64,
    pub grid: [usize; 2],
    /// The τ boundary term with `ν` reversed.
    #[serde(rename = "boundary_integral_tau_opposite_nu")]
    pub boundary_integral_tau_opposite: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QOptions {
    /// Cells per axis on the coarse level; the fine level doubles it.
    pub cells: usize,
    /// Tube half-width; `None` for the default fraction of the range.
    pub tube: Option<f64>,
    pub integrand: QIntegrand,
}

impl Default for QOptions {
    fn default() -> Self {
        Self { cells: 8, tube: None, integrand: QIntegrand::General }
    }
}

fn axis_breaks(patch: &dyn Patch, u: &TestFunction, k: usize, delta: f64) -> Vec<f64> {
    let b = [u.first, u.second][k];
    let mut v: Vec<f64> = b.breakpoints().to_vec();
    match patch.singular_set() {
        SingularSet::Curve { at } if k == 1 => v.extend([at - delta, at, at + delta]),
        SingularSet::Point { at } => v.extend([at[k] - delta, at[k], at[k] + delta]),
        _ => {}
    }
    v
}

fn check_minimal(patch: &dyn Patch, u: &TestFunction) -> Result<(), StabilityError> {
    let [s1, s2] = [u.first.support(), u.second.support()];
    let n = 5;
    for i in 0..n {
        for j in 0..n {
            let p1 = s1[0] + (s1[1] - s1[0]) * (i as f64 + 0.5) / n as f64;
            let p2 = s2[0] + (s2[1] - s2[0]) * (j as f64 + 0.5) / n as f64;
            if let Some(h) = patch.mean_curvature(p1, p2) {
                if h.abs() > MINIMAL_TOL || !h.is_finite() {
                    let point = patch.geometry(p1, p2).map(|g| g.point).unwrap_or(Point::ORIGIN);
                    return Err(StabilityError::NotMinimal { h, point });
                }
            }
        }
    }
    Ok(())
}

fn q_level(patch: &dyn Patch, u: &TestFunction, opts: &QOptions, n: usize, delta: f64) -> ([f64; 4], [usize; 2]) {
    let sing = patch.singular_set();
    let s1 = u.first.support();
    let s2 = u.second.support();
    let e1 = quadrature::cell_edges(s1[0], s1[1], &axis_breaks(patch, u, 0, delta), n);
    let e2 = quadrature::cell_edges(s2[0], s2[1], &axis_breaks(patch, u, 1, delta), n);
    let kind = opts.integrand;
    let [surf] = quadrature::integrate_2d(&e1, &e2, |p1, p2| {
        let (val, d1, d2) = u.eval(p1, p2);
        if val == 0.0 && d1 == 0.0 && d2 == 0.0 {
            return [0.0];
        }
        let Some(g) = patch.geometry(p1, p2) else { return [f64::NAN] };
        let zu = g.z_coef.0 * d1 + g.z_coef.1 * d2;
        let in_tube = match sing {
            SingularSet::Curve { at } => (p2 - at).abs() < delta,
            SingularSet::Point { at } => (p1 - at[0]).hypot(p2 - at[1]) < delta,
            SingularSet::Empty => false,
        };
        // Admissible u has Z(u) = 0 in the tube, where |N_h|⁻¹ is unbounded.
        let zterm = if in_tube { 0.0 } else { zu * zu / g.nh };
        let uterm = match kind {
            QIntegrand::General => {
                let zy2 = g.zy * g.zy;
                let inner = g.nh * (0.5 - zy2) - g.ds_nu_z;
                g.nh * ((1.0 + zy2) - inner * inner)
            }
            QIntegrand::PlaneAb => g.nh * g.nt * g.nt,
            QIntegrand::SaddleCurve => 2.0 * g.nh * g.nh,
        };
        [(zterm + uterm * val * val) * g.area]
    });
    let (tau, tau_alt, sterm) = match sing {
        SingularSet::Curve { at } => {
            let [t, ta, s] = quadrature::integrate_1d(&e1, |p1| {
                let (val, d1, _) = u.eval(p1, at);
                if val == 0.0 && d1 == 0.0 {
                    return [0.0; 3];
                }
                let Some(b) = patch.boundary(p1) else { return [f64::NAN; 3] };
                let mut tau = 0.0;
                let mut s2 = 0.0;
                for side in &b.sides {
                    let su = side.s_coef.0 * d1;
                    s2 += 0.5 * su * su;
                    tau += 0.5 * match kind {
                        QIntegrand::General => 4.0 * side.nt_z_nu * side.zy2,
                        QIntegrand::PlaneAb => 0.0,
                        QIntegrand::SaddleCurve => 4.0,
                    };
                }
                let alt = match kind {
                    QIntegrand::General => -tau,
                    _ => tau,
                };
                [tau * val * val * b.speed, alt * val * val * b.speed, s2 * b.speed]
            });
            (t, ta, s)
        }
        _ => (0.0, 0.0, 0.0),
    };
    ([surf, tau, sterm, tau_alt], [e1.len() - 1, e2.len() - 1])
}

/// Evaluate `Q(u)` on two grid levels.
pub fn q_form(patch: &dyn Patch, u: &TestFunction, opts: &QOptions) -> Result<QuadratureReport, StabilityError> {
    let delta = tube_width(patch, opts.tube);
    if !(delta > 0.0) || opts.cells < 1 {
        return Err(StabilityError::Unsupported("tube width and cell count must be positive".into()));
    }
    check_admissible(patch, u, delta)?;
    if u.is_zero() {
        return Ok(QuadratureReport {
            surface_integral: 0.0,
            boundary_integral_tau: 0.0,
            boundary_integral_s: 0.0,
            total: 0.0,
            error_estimate: 0.0,
            grid: [2 * opts.cells, 2 * opts.cells],
            boundary_integral_tau_opposite: 0.0,
        });
    }
    check_minimal(patch, u)?;
    let (coarse, _) = q_level(patch, u, opts, opts.cells, delta);
    let (fine, grid) = q_level(patch, u, opts, 2 * opts.cells, delta);
    if fine.iter().chain(coarse.iter()).any(|v| !v.is_finite()) {
        return Err(StabilityError::Numerical("non-finite integrand (parametrization failed)".into()));
    }
    let error_estimate = (0..3).map(|k| (fine[k] - coarse[k]).abs()).sum();
    Ok(QuadratureReport {
        surface_integral: fine[0],
        boundary_integral_tau: fine[1],
        boundary_integral_s: fine[2],
        total: fine[0] + fine[1] + fine[2],
        error_estimate,
        grid,
        boundary_integral_tau_opposite: fine[3],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimplifiedKind {
    PlaneAb,
    SaddleCurve,
}

/// `Q(u)` with the closed-form integrand printed for the given family.
pub fn q_form_simplified(
    kind: SimplifiedKind,
    patch: &dyn Patch,
    u: &TestFunction,
    opts: &QOptions,
) -> Result<QuadratureReport, StabilityError> {
    let integrand = match kind {
        SimplifiedKind::PlaneAb => QIntegrand::PlaneAb,
        SimplifiedKind::SaddleCurve => QIntegrand::SaddleCurve,
    };
    q_form(patch, u, &QOptions { integrand, ..*opts })
}

/// One term on which the general and printed forms disagree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermMismatch {
    pub term: String,
    pub general: f64,
    pub simplified: f64,
    pub difference: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QComparison {
    pub general: QuadratureReport,
    pub simplified: QuadratureReport,
    pub tolerance: f64,
    pub agree: bool,
    pub mismatches: Vec<TermMismatch>,
}

/// Compare term by term. The tolerance is ten times the combined error
/// estimate, floored at `1e−10·(1 + |Q|)` for round-off.
pub fn compare_q(general: QuadratureReport, simplified: QuadratureReport) -> QComparison {
    let scale = 1.0 + general.total.abs().max(simplified.total.abs());
    let tolerance = (10.0 * (general.error_estimate + simplified.error_estimate)).max(1e-10 * scale);
    let terms = [
        ("surface_integral", general.surface_integral, simplified.surface_integral),
        ("boundary_integral_tau", general.boundary_integral_tau, simplified.boundary_integral_tau),
        ("boundary_integral_S", general.boundary_integral_s, simplified.boundary_integral_s),
    ];
    let mismatches: Vec<TermMismatch> = terms
        .iter()
        .filter(|(_, g, s)| (g - s).abs() > tolerance)
        .map(|&(term, g, s)| TermMismatch { term: term.to_string(), general: g, simplified: s, difference: g - s, tolerance })
        .collect();
    QComparison { general, simplified, tolerance, agree: mismatches.is_empty(), mismatches }
}

/// Result of the one-sided sufficient stability test on a surface with
/// empty singular set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SufficientReport {
    pub samples: usize,
    pub sup_nt: f64,
    /// `sup (2Z(q) + q²)` with `q = ⟨N,T⟩/|N_h|`.
    pub sup_internal: f64,
    /// `sup (a + b)` of the cosh/sinh Jacobi solution over points with `⟨Z,X⟩ ≠ 0`.
    pub sup_a_plus_b: Option<f64>,
    pub max_abs_h: f64,
    pub zx_zero_points: usize,
    /// Decided by the hypotheses: minimal, no singular points, `⟨N,T⟩ ≤ 0`.
    pub sufficient_condition_met: bool,
    /// Whether `2Z(q) + q² ≤ 0` held at every sample (diagnostic).
    pub internal_inequality_met: bool,
}

/// Sample `{u = 0}` inside a coordinate window (grid³ seeds projected onto
/// the surface) and test the hypotheses of the sufficient condition.
pub fn sufficient_condition(field: &ScalarField, window: [[f64; 2]; 3], grid: usize) -> Result<SufficientReport, StabilityError> {
    let n = grid.max(2);
    let at = |k: usize, i: usize| window[k][0] + (window[k][1] - window[k][0]) * i as f64 / (n - 1) as f64;
    let inside = |p: &Point| {
        let c = p.to_array();
        (0..3).all(|k| c[k] >= window[k][0] - 1e-12 && c[k] <= window[k][1] + 1e-12)
    };
    let tol = Tolerances::default();
    let mut rep = SufficientReport {
        samples: 0,
        sup_nt: f64::NEG_INFINITY,
        sup_internal: f64::NEG_INFINITY,
        sup_a_plus_b: None,
        max_abs_h: 0.0,
        zx_zero_points: 0,
        sufficient_condition_met: false,
        internal_inequality_met: false,
    };
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let seed = Point::new(at(0, i), at(1, j), at(2, k));
                let Some(p) = surface::project_to_surface(field, &seed, 50) else { continue };
                if !inside(&p) {
                    continue;
                }
                let d = surface::point_data_with(field, &p, &Tolerances { eps_level: 1e-8, ..tol })?;
                if d.singular {
                    return Err(StabilityError::SingularPointFound { point: p });
                }
                let relaxed = Tolerances { eps_level: 1e-8, ..tol };
                let h = surface::mean_curvature_with(field, &p, &relaxed)?;
                let (q, zq) = surface::normal_ratio_and_z_derivative(field, &p, &relaxed)?;
                rep.samples += 1;
                rep.sup_nt = rep.sup_nt.max(d.nt);
                rep.max_abs_h = rep.max_abs_h.max(h.abs());
                rep.sup_internal = rep.sup_internal.max(2.0 * zq + q * q);
                let zx = d.z.map(|z| z.a).unwrap_or(0.0);
                if zx.abs() < ZX_ZERO_TOL {
                    rep.zx_zero_points += 1;
                } else {
                    let v2 = -d.nh_norm * (zq + q * q);
                    let ab = v2 / (zx * zx) - d.nt / zx.abs();
                    rep.sup_a_plus_b = Some(rep.sup_a_plus_b.map_or(ab, |m: f64| m.max(ab)));
                }
            }
        }
    }
    if rep.samples == 0 {
        return Err(StabilityError::Numerical("window does not meet the surface".into()));
    }
    rep.sufficient_condition_met = rep.sup_nt <= SUFFICIENT_TOL && rep.max_abs_h <= MINIMAL_TOL;
    rep.internal_inequality_met = rep.sup_internal <= SUFFICIENT_TOL;
    Ok(rep)
}

/// `⟨V,T⟩(0), ⟨V,T⟩'(0), ⟨V,T⟩''(0)` and `⟨Z,X⟩` at a regular point.
pub fn jacobi_initial_data(field: &ScalarField, p: &Point) -> Result<(f64, [f64; 3]), StabilityError> {
    let d = surface::point_data(field, p)?;
    let z = d.z.ok_or(StabilityError::SingularPointFound { point: *p })?;
    let (q, zq) = surface::normal_ratio_and_z_derivative(field, p, &Tolerances::default())?;
    Ok((z.a, [-d.nh_norm, -d.nt, -d.nh_norm * (zq + q * q)]))
}

/// Solution of `V''' = k²V'` with the given initial data and its first
/// three derivatives at `s`.
pub fn jacobi_closed(k: f64, init: [f64; 3], s: f64) -> [f64; 4] {
    let [v0, v1, v2] = init;
    if k.abs() < ZX_ZERO_TOL {
        return [v0 + v1 * s + 0.5 * v2 * s * s, v1 + v2 * s, v2, 0.0];
    }
    let k = k.abs();
    let (a, b) = (v2 / (k * k), v1 / k);
    let c = v0 - a;
    let (ch, sh) = ((k * s).cosh(), (k * s).sinh());
    [a * ch + b * sh + c, k * (a * sh + b * ch), k * k * (a * ch + b * sh), k * k * k * (a * sh + b * ch)]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiSample {
    pub s: f64,
    pub closed: f64,
    pub numeric: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobiProfile {
    pub point: Point,
    pub zx: f64,
    pub initial: [f64; 3],
    /// `(a, b, c)` of `a cosh(|⟨Z,X⟩|s) + b sinh(|⟨Z,X⟩|s) + c`; absent when `⟨Z,X⟩ = 0`.
    pub coefficients: Option<[f64; 3]>,
    pub zx_zero: bool,
    pub a_plus_b: Option<f64>,
    pub samples: Vec<JacobiSample>,
    /// `max |V''' − k²V'| / (1 + |V'''| + k²|V'|)` of the closed form.
    pub max_ode_residual: f64,
    /// `max |closed − numeric| / (1 + |closed|)`.
    pub max_numeric_deviation: f64,
}

fn rk4_jacobi(k: f64, init: [f64; 3], s_end: f64, steps: usize) -> f64 {
    let f = |y: [f64; 3]| [y[1], y[2], k * k * y[1]];
    let h = s_end / steps as f64;
    let mut y = init;
    for _ in 0..steps {
        let add = |y: [f64; 3], d: [f64; 3], c: f64| [y[0] + c * d[0], y[1] + c * d[1], y[2] + c * d[2]];
        let k1 = f(y);
        let k2 = f(add(y, k1, 0.5 * h));
        let k3 = f(add(y, k2, 0.5 * h));
        let k4 = f(add(y, k3, h));
        for i in 0..3 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y[0]
}

/// `⟨V,T⟩(s)` along the characteristic curve through `p`, closed form
/// against a numerical solution of the third-order equation.
pub fn jacobi_profile(field: &ScalarField, p: &Point, s_range: [f64; 2], n: usize) -> Result<JacobiProfile, StabilityError> {
    let (zx, init) = jacobi_initial_data(field, p)?;
    let k = zx.abs();
    let zx_zero = k < ZX_ZERO_TOL;
    let coefficients = (!zx_zero).then(|| {
        let a = init[2] / (k * k);
        [a, init[1] / k, init[0] - a]
    });
    let n = n.max(1);
    let mut samples = Vec::with_capacity(n + 1);
    let mut max_res = 0.0f64;
    let mut max_dev = 0.0f64;
    for i in 0..=n {
        let s = s_range[0] + (s_range[1] - s_range[0]) * i as f64 / n as f64;
        let [v, v1, _, v3] = jacobi_closed(zx, init, s);
        let res = (v3 - k * k * v1).abs() / (1.0 + v3.abs() + k * k * v1.abs());
        let steps = ((s.abs() * 400.0).ceil() as usize).max(1);
        let numeric = rk4_jacobi(k, init, s, steps);
        max_res = max_res.max(res);
        max_dev = max_dev.max((v - numeric).abs() / (1.0 + v.abs()));
        samples.push(JacobiSample { s, closed: v, numeric });
    }
    Ok(JacobiProfile {
        point: *p,
        zx,
        initial: init,
        a_plus_b: coefficients.map(|c| c[0] + c[1]),
        coefficients,
        zx_zero,
        samples,
        max_ode_residual: max_res,
        max_numeric_deviation: max_dev,
    })
}

/// `⟨V,T⟩(s)` from the actual foliation: characteristic curves leaving the
/// integral curve `α` of `S` through `p`, differentiated in the leaf
/// parameter by central differences.
pub fn jacobi_field_numeric(field: &ScalarField, p: &Point, s: f64) -> Result<f64, StabilityError> {
    let tol = Tolerances { eps_level: f64::INFINITY, ..Default::default() };
    let s_field = |q: &Point| -> Result<CoordVector, StabilityError> {
        let d = surface::level_data(field, q, &tol)?;
        let sv = d.s.ok_or(StabilityError::SingularPointFound { point: *q })?;
        Ok(frame::to_coord(q, &sv))
    };
    let alpha = |eps: f64| -> Result<Point, StabilityError> {
        let steps = 8;
        let h = eps / steps as f64;
        let mut q = *p;
        for _ in 0..steps {
            let k1 = s_field(&q)?;
            let k2 = s_field(&q.offset(k1, 0.5 * h))?;
            let k3 = s_field(&q.offset(k2, 0.5 * h))?;
            let k4 = s_field(&q.offset(k3, h))?;
            q = q.offset(k1 + k2 * 2.0 + k3 * 2.0 + k4, h / 6.0);
        }
        Ok(q)
    };
    let leaf = |eps: f64| -> Result<Point, StabilityError> {
        let q = alpha(eps)?;
        let z = surface::level_data(field, &q, &tol)?.z.ok_or(StabilityError::SingularPointFound { point: q })?;
        let c = curve::from_frame(q, z.a, z.b).map_err(|e| StabilityError::Numerical(e.to_string()))?;
        c.point(s).map_err(|e| StabilityError::Numerical(e.to_string()))
    };
    let h = 1e-4;
    let (a, b, o) = (leaf(h)?, leaf(-h)?, leaf(0.0)?);
    let v = CoordVector::new((a.x - b.x) / (2.0 * h), (a.y - b.y) / (2.0 * h), (a.z - b.z) / (2.0 * h));
    Ok(frame::to_frame(&o, &v).c)
}

/// The three plane families foliated by geodesics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlaneKind {
    X,
    Y,
    Z,
}

impl PlaneKind {
    pub fn axis(self) -> usize {
        match self {
            PlaneKind::X => 0,
            PlaneKind::Y => 1,
            PlaneKind::Z => 2,
        }
    }

    pub fn from_catalog(cat: &CatalogSurface) -> Option<(Self, f64)> {
        match *cat {
            CatalogSurface::PlaneX { c } => Some((PlaneKind::X, c)),
            CatalogSurface::PlaneY { c } => Some((PlaneKind::Y, c)),
            CatalogSurface::PlaneZ { c } => Some((PlaneKind::Z, c)),
            _ => None,
        }
    }
}

/// Competitor `x_k = −c + η·b(p₁, p₂)` for the plane `x_k + c = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphPerturbation {
    pub eta: f64,
    pub bump: TestFunction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaReport {
    pub base: Estimate,
    pub competitor: Estimate,
    pub difference: f64,
    pub grid: [usize; 2],
}

fn graph_area(axis: usize, c: f64, pert: &GraphPerturbation, window: [[f64; 2]; 2], n: usize) -> (f64, [usize; 2]) {
    let free = match axis {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    };
    let b = pert.bump;
    let e1 = quadrature::cell_edges(window[0][0], window[0][1], &b.first.breakpoints(), n);
    let e2 = quadrature::cell_edges(window[1][0], window[1][1], &b.second.breakpoints(), n);
    let [a] = quadrature::integrate_2d(&e1, &e2, |p1, p2| {
        let (v, d1, d2) = b.eval(p1, p2);
        let mut coords = [0.0; 3];
        coords[free[0]] = p1;
        coords[free[1]] = p2;
        coords[axis] = -c + pert.eta * v;
        let p = Point::new(coords[0], coords[1], coords[2]);
        let tangent = |f: usize, d: f64| {
            let mut t = [0.0; 3];
            t[f] = 1.0;
            t[axis] = pert.eta * d;
            frame::to_frame(&p, &CoordVector::new(t[0], t[1], t[2]))
        };
        let cross = tangent(free[0], d1).cross(&tangent(free[1], d2));
        [cross.horizontal_part().norm()]
    });
    (a, [e1.len() - 1, e2.len() - 1])
}

/// Sub-Riemannian area `∫|N_h| dΣ` of a plane and of a compactly supported
/// graph perturbation of it over the same window, on two grid levels.
pub fn area_compare(
    plane: PlaneKind,
    c: f64,
    pert: &GraphPerturbation,
    window: [[f64; 2]; 2],
    cells: usize,
) -> Result<AreaReport, StabilityError> {
    if pert.eta != 0.0 && !pert.bump.is_zero() {
        for (k, bump) in [pert.bump.first, pert.bump.second].iter().enumerate() {
            let [lo, hi] = bump.support();
            if lo <= window[k][0] || hi >= window[k][1] {
                return Err(StabilityError::PerturbationNotCompact);
            }
        }
    }
    let axis = plane.axis();
    let base = GraphPerturbation { eta: 0.0, bump: pert.bump };
    let (b1, _) = graph_area(axis, c, &base, window, cells);
    let (b2, grid) = graph_area(axis, c, &base, window, 2 * cells);
    let (c1, _) = graph_area(axis, c, pert, window, cells);
    let (c2, _) = graph_area(axis, c, pert, window, 2 * cells);
    let base = Estimate::from_levels(b1, b2);
    let competitor = Estimate::from_levels(c1, c2);
    Ok(AreaReport { base, competitor, difference: competitor.value - base.value, grid })
}
