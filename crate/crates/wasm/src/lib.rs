//! Browser bindings for the demo page in `www/`.
//!
//! The computations live in plain functions returning `Result<_, String>` so
//! they can be tested natively; the `#[wasm_bindgen]` wrappers only convert
//! errors.

use std::f64::consts::TAU;

use sol_geo::curve;
use sol_geo::frame::Point;
use sol_geo::stationary::{self, HorizontalCurve};
use sol_geo::surface;
use sol_geo::ScalarField;
use wasm_bindgen::prelude::*;

fn text<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Characteristic curves through `p0` at `count` equally spaced angles,
/// sampled at `samples + 1` points on `[-t_max, t_max]`. Flat `x y z` triples,
/// curve after curve.
pub fn curve_fan_points(p0: [f64; 3], count: usize, t_max: f64, samples: usize) -> Result<Vec<f64>, String> {
    if count == 0 || samples == 0 || !(t_max > 0.0) {
        return Err("count, samples and t_max must be positive".into());
    }
    let p0 = Point::new(p0[0], p0[1], p0[2]);
    let mut out = Vec::with_capacity(count * (samples + 1) * 3);
    for k in 0..count {
        let c = curve::from_angle(p0, k as f64 * TAU / count as f64).map_err(text)?;
        for s in c.sample(-t_max, t_max, samples).map_err(text)? {
            out.extend([s.p.x, s.p.y, s.p.z]);
        }
    }
    Ok(out)
}

/// Ruled area-stationary surface swept from the characteristic curve with
/// frame direction `(cos α, sin α)` through `p0`.
#[wasm_bindgen]
pub struct SweepMesh {
    positions: Vec<f64>,
    vt: Vec<f64>,
    rows: usize,
    cols: usize,
    orthogonality_defect: f64,
    singular_loci: usize,
}

#[wasm_bindgen]
impl SweepMesh {
    /// Flat `x y z` per vertex, row-major over (ε, t).
    #[wasm_bindgen(getter)]
    pub fn positions(&self) -> Vec<f64> {
        self.positions.clone()
    }

    /// `⟨V,T⟩` per vertex; it vanishes exactly on the singular curve.
    #[wasm_bindgen(getter)]
    pub fn vt(&self) -> Vec<f64> {
        self.vt.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[wasm_bindgen(getter)]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[wasm_bindgen(getter)]
    pub fn orthogonality_defect(&self) -> f64 {
        self.orthogonality_defect
    }

    #[wasm_bindgen(getter)]
    pub fn singular_loci(&self) -> usize {
        self.singular_loci
    }
}

pub fn build_sweep(alpha: f64, p0: [f64; 3], half: [f64; 2], grid: [usize; 2], skew: f64) -> Result<SweepMesh, String> {
    let p0 = Point::new(p0[0], p0[1], p0[2]);
    let gamma = HorizontalCurve::Characteristic { p0, a: alpha.cos(), b: alpha.sin() };
    let (er, tr) = ([-half[0], half[0]], [-half[1], half[1]]);
    let s = if skew == 0.0 {
        stationary::sweep_surface(gamma, er, tr, grid)
    } else {
        stationary::skewed_surface(gamma, er, tr, grid, skew)
    }
    .map_err(text)?;
    let samples = s.samples();
    let mut positions = Vec::with_capacity(samples.len() * 3);
    let mut vt = Vec::with_capacity(samples.len());
    for x in &samples {
        positions.extend([x.point.x, x.point.y, x.point.z]);
        vt.push(x.vt);
    }
    Ok(SweepMesh {
        positions,
        vt,
        rows: grid[0],
        cols: grid[1],
        orthogonality_defect: stationary::orthogonality_check(&s),
        singular_loci: stationary::uniqueness_scan(&s).len(),
    })
}

/// Samples of `u`, `|N_h|` and the normalized minimal-surface residual of the
/// level set through each pixel of the slice `z = const`; `n × n` pixels,
/// three values each, NaN where undefined.
pub fn slice_values(expr: &str, z: f64, x: [f64; 2], y: [f64; 2], n: usize) -> Result<Vec<f64>, String> {
    let f = ScalarField::parse(expr).map_err(text)?;
    if n < 2 || !(x[0] < x[1] && y[0] < y[1]) {
        return Err("need n >= 2 and increasing ranges".into());
    }
    let step = |r: [f64; 2], i: usize| r[0] + (r[1] - r[0]) * i as f64 / (n - 1) as f64;
    let tol = surface::Tolerances::default();
    let mut out = Vec::with_capacity(n * n * 3);
    for j in 0..n {
        for i in 0..n {
            let p = Point::new(step(x, i), step(y, n - 1 - j), z);
            let u = f.eval(&p).unwrap_or(f64::NAN);
            let nh = surface::level_data(&f, &p, &tol).map_or(f64::NAN, |d| d.nh_norm);
            let r = surface::minimal_residual(&f, &p).ok().and_then(|r| r.normalized).unwrap_or(f64::NAN);
            out.extend([u, nh, r]);
        }
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn curve_fan(x0: f64, y0: f64, z0: f64, count: usize, t_max: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    curve_fan_points([x0, y0, z0], count, t_max, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn sweep_mesh(
    alpha: f64,
    x0: f64,
    y0: f64,
    z0: f64,
    eps_half: f64,
    t_half: f64,
    rows: usize,
    cols: usize,
    skew: f64,
) -> Result<SweepMesh, JsError> {
    build_sweep(alpha, [x0, y0, z0], [eps_half, t_half], [rows, cols], skew).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn residual_slice(expr: &str, z: f64, x0: f64, x1: f64, y0: f64, y1: f64, n: usize) -> Result<Vec<f64>, JsError> {
    slice_values(expr, z, [x0, x1], [y0, y1], n).map_err(|e| JsError::new(&e))
}
