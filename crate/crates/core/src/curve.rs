//! Characteristic curves of vanishing curvature.
//!
//! In frame components a unit horizontal curve `γ̇ = aX + bY` with `H = 0`
//! has `a` and `b` constant, which leaves two closed-form families:
//! straight lines when `ż₀ = a = 0` and exponentials otherwise.
//! [`integrate_ode`] solves the same equations numerically as an oracle.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::{self, CoordVector, FrameVector, Point};

/// Tolerance on `|ẏe^z + ẋe^{−z}|/|v|` for a velocity to count as horizontal.
pub const HORIZONTAL_DEFECT_TOL: f64 = 1e-10;
/// Below this `|ż₀|` a curve is treated as a line.
pub const LINE_TOL: f64 = 1e-12;
/// Frame-component tolerance for the geodesic predicate.
pub const GEODESIC_TOL: f64 = 1e-9;
/// Largest `|ż₀t|` evaluated before reporting overflow.
pub const MAX_EXPONENT: f64 = 700.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("initial velocity is not horizontal (defect {defect:e})")]
    NotHorizontal { defect: f64 },
    #[error("initial velocity is zero")]
    ZeroVelocity,
    #[error("exponent overflow at t = {t}")]
    Overflow { t: f64 },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("non-finite input")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveFamily {
    Line,
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicCurve {
    pub p0: Point,
    /// Unit horizontal initial velocity in coordinates.
    pub v0: CoordVector,
    pub family: CurveFamily,
    /// `c₀ = ẏ₀e^{z₀} − ẋ₀e^{−z₀}`
    pub c0: f64,
    pub zdot0: f64,
}

/// One row of a sampled path: `(t, x, y, z, ẋ, ẏ, ż)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub t: f64,
    pub p: Point,
    pub v: CoordVector,
}

impl CurveSample {
    pub fn to_row(&self) -> [f64; 7] {
        [self.t, self.p.x, self.p.y, self.p.z, self.v.dx, self.v.dy, self.v.dz]
    }
}

/// `ẏe^z + ẋe^{−z}`, which is `√2·⟨v, T⟩`.
pub fn horizontality_defect(p: &Point, v: &CoordVector) -> f64 {
    v.dy * p.z.exp() + v.dx * (-p.z).exp()
}

pub fn make_curve(p0: Point, v0: CoordVector) -> Result<CharacteristicCurve, CurveError> {
    if !p0.is_finite() || !v0.is_finite() {
        return Err(CurveError::NonFinite);
    }
    let f = frame::to_frame(&p0, &v0);
    let n = f.norm();
    if n == 0.0 {
        return Err(CurveError::ZeroVelocity);
    }
    let defect = (horizontality_defect(&p0, &v0) / n).abs();
    if defect > HORIZONTAL_DEFECT_TOL {
        return Err(CurveError::NotHorizontal { defect });
    }
    Ok(from_frame_unchecked(p0, f.a / n, f.b / n))
}

/// Curve with initial velocity `cos α X + sin α Y`.
pub fn from_angle(p0: Point, alpha: f64) -> Result<CharacteristicCurve, CurveError> {
    if !p0.is_finite() || !alpha.is_finite() {
        return Err(CurveError::NonFinite);
    }
    Ok(from_frame_unchecked(p0, alpha.cos(), alpha.sin()))
}

/// Curve with horizontal frame velocity `(a, b)`, normalized.
pub fn from_frame(p0: Point, a: f64, b: f64) -> Result<CharacteristicCurve, CurveError> {
    if !p0.is_finite() || !a.is_finite() || !b.is_finite() {
        return Err(CurveError::NonFinite);
    }
    let n = a.hypot(b);
    if n == 0.0 {
        return Err(CurveError::ZeroVelocity);
    }
    Ok(from_frame_unchecked(p0, a / n, b / n))
}

fn from_frame_unchecked(p0: Point, a: f64, b: f64) -> CharacteristicCurve {
    let v0 = frame::to_coord(&p0, &FrameVector::horizontal(a, b));
    let zdot0 = v0.dz;
    let family = if zdot0.abs() < LINE_TOL { CurveFamily::Line } else { CurveFamily::Exponential };
    let c0 = v0.dy * p0.z.exp() - v0.dx * (-p0.z).exp();
    CharacteristicCurve { p0, v0, family, c0, zdot0 }
}

impl CharacteristicCurve {
    /// The constant frame velocity `(a, b, 0)`.
    pub fn frame_velocity(&self) -> FrameVector {
        let v = frame::to_frame(&self.p0, &self.v0);
        FrameVector::horizontal(v.a, v.b)
    }

    pub fn eval(&self, t: f64) -> Result<(Point, CoordVector), CurveError> {
        eval_curve(self, t)
    }

    pub fn point(&self, t: f64) -> Result<Point, CurveError> {
        eval_curve(self, t).map(|(p, _)| p)
    }

    pub fn is_geodesic(&self) -> bool {
        is_geodesic(self)
    }

    /// `⟨τ(γ̇), γ̇⟩`, constant along the curve.
    pub fn torsion_along(&self) -> f64 {
        let v = self.frame_velocity();
        frame::torsion(&v).dot(&v)
    }

    pub fn sample(&self, t0: f64, t1: f64, n: usize) -> Result<Vec<CurveSample>, CurveError> {
        let n = n.max(1);
        (0..=n)
            .map(|i| {
                let t = t0 + (t1 - t0) * i as f64 / n as f64;
                eval_curve(self, t).map(|(p, v)| CurveSample { t, p, v })
            })
            .collect()
    }
}

pub fn eval_curve(c: &CharacteristicCurve, t: f64) -> Result<(Point, CoordVector), CurveError> {
    let (p0, v0) = (c.p0, c.v0);
    match c.family {
        CurveFamily::Line => Ok((
            Point::new(p0.x + v0.dx * t, p0.y + v0.dy * t, p0.z),
            CoordVector::new(v0.dx, v0.dy, 0.0),
        )),
        CurveFamily::Exponential => {
            let k = c.zdot0;
            let s = k * t;
            if !s.is_finite() || s.abs() > MAX_EXPONENT {
                return Err(CurveError::Overflow { t });
            }
            let p = Point::new(p0.x + v0.dx * s.exp_m1() / k, p0.y - v0.dy * (-s).exp_m1() / k, p0.z + s);
            let v = CoordVector::new(v0.dx * s.exp(), v0.dy * (-s).exp(), k);
            if !p.is_finite() || !v.is_finite() {
                return Err(CurveError::Overflow { t });
            }
            Ok((p, v))
        }
    }
}

pub fn is_geodesic(c: &CharacteristicCurve) -> bool {
    let v = c.frame_velocity();
    v.a.abs() < GEODESIC_TOL || v.b.abs() < GEODESIC_TOL
}

/// Evaluate many curves at one parameter, in parallel when enabled.
pub fn eval_many(curves: &[CharacteristicCurve], t: f64) -> Vec<Result<(Point, CoordVector), CurveError>> {
    crate::par::map_range(curves.len(), |i| eval_curve(&curves[i], t))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Curvature `H`; only `H = 0` is covered by the closed forms.
    pub curvature: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-13, atol: 1e-13, curvature: 0.0, max_steps: 1_000_000 }
    }
}

type State = [f64; 5];

fn rhs(s: &State, h: f64) -> State {
    let [_, _, z, a, b] = *s;
    let q = b / SQRT_2;
    [-q * z.exp(), q * (-z).exp(), a, h * b, -h * a]
}

fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..5 {
            out[i] += h * c * k[i];
        }
    }
    out
}

// Dormand–Prince 5(4) tableau; the system is autonomous so the nodes are not needed.
const A2: [f64; 1] = [0.2];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
const B5: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

fn dp_step(y: &State, h: f64, curv: f64) -> (State, f64, State) {
    let k1 = rhs(y, curv);
    let k2 = rhs(&axpy(y, h, &[(A2[0], &k1)]), curv);
    let k3 = rhs(&axpy(y, h, &[(A3[0], &k1), (A3[1], &k2)]), curv);
    let k4 = rhs(&axpy(y, h, &[(A4[0], &k1), (A4[1], &k2), (A4[2], &k3)]), curv);
    let k5 = rhs(&axpy(y, h, &[(A5[0], &k1), (A5[1], &k2), (A5[2], &k3), (A5[3], &k4)]), curv);
    let k6 = rhs(&axpy(y, h, &[(A6[0], &k1), (A6[1], &k2), (A6[2], &k3), (A6[3], &k4), (A6[4], &k5)]), curv);
    let y5 = axpy(y, h, &[(B5[0], &k1), (B5[2], &k3), (B5[3], &k4), (B5[4], &k5), (B5[5], &k6)]);
    let k7 = rhs(&y5, curv);
    let y4 = axpy(y, h, &[(B4[0], &k1), (B4[2], &k3), (B4[3], &k4), (B4[4], &k5), (B4[5], &k6), (B4[6], &k7)]);
    let mut err = 0.0f64;
    for i in 0..5 {
        err = err.max((y5[i] - y4[i]).abs());
    }
    (y5, err, k7)
}

/// Integrate the frame ODE from `t = 0` to `t_end`, reporting `steps + 1`
/// uniformly spaced samples. `t_end` may be negative.
pub fn integrate_ode(p0: Point, v0: CoordVector, t_end: f64, steps: usize) -> Result<Vec<CurveSample>, CurveError> {
    integrate_ode_with(p0, v0, t_end, steps, &OdeOptions::default())
}

pub fn integrate_ode_with(
    p0: Point,
    v0: CoordVector,
    t_end: f64,
    steps: usize,
    opts: &OdeOptions,
) -> Result<Vec<CurveSample>, CurveError> {
    let curve = make_curve(p0, v0)?;
    if !t_end.is_finite() {
        return Err(CurveError::NonFinite);
    }
    let fv = curve.frame_velocity();
    let mut y: State = [p0.x, p0.y, p0.z, fv.a, fv.b];
    let steps = steps.max(1);
    let dir = if t_end < 0.0 { -1.0 } else { 1.0 };
    let mut t = 0.0;
    let mut h = dir * (t_end.abs() / steps as f64).min(0.05).max(1e-6);
    let mut out = Vec::with_capacity(steps + 1);
    let sample = |t: f64, y: &State| {
        let v = frame::to_coord(&Point::new(y[0], y[1], y[2]), &FrameVector::horizontal(y[3], y[4]));
        CurveSample { t, p: Point::new(y[0], y[1], y[2]), v }
    };
    out.push(sample(0.0, &y));
    let mut taken = 0usize;
    for i in 1..=steps {
        let target = t_end * i as f64 / steps as f64;
        while (target - t) * dir > 0.0 {
            let remaining = target - t;
            let hs = if (h - remaining) * dir > 0.0 { remaining } else { h };
            let (y_new, err, _) = dp_step(&y, hs, opts.curvature);
            let scale = y.iter().chain(y_new.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
            let tol = opts.atol + opts.rtol * scale;
            let ratio = if err == 0.0 { 5.0 } else { (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0) };
            if err <= tol && y_new.iter().all(|v| v.is_finite()) {
                t = if hs == remaining { target } else { t + hs };
                y = y_new;
            }
            h = hs * ratio;
            if h.abs() < 1e-14 * t.abs().max(1.0) {
                return Err(CurveError::StepUnderflow { t });
            }
            taken += 1;
            if taken > opts.max_steps {
                return Err(CurveError::StepUnderflow { t });
            }
        }
        out.push(sample(target, &y));
    }
    Ok(out)
}
