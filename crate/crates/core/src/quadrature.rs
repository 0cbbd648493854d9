//! Tensor-product Gauss–Legendre quadrature on piecewise-uniform grids.
//!
//! Each axis is split at caller-supplied breakpoints (where the integrand
//! has reduced smoothness) and each piece is divided into cells. Cells are
//! evaluated in parallel and summed in index order.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::par;

/// Points per cell and axis.
pub const ORDER: usize = 8;

/// Nodes and weights on `[−1, 1]`, by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

/// Cell edges over `[a, b]` with `breaks` respected, about `n` cells total
/// (at least one per piece).
pub fn cell_edges(a: f64, b: f64, breaks: &[f64], n: usize) -> Vec<f64> {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|x| *x > a && *x < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (b - a));
    let len = b - a;
    let mut edges = vec![a];
    for w in pts.windows(2) {
        let k = ((n as f64 * (w[1] - w[0]) / len).round() as usize).max(1);
        for j in 1..=k {
            edges.push(if j == k { w[1] } else { w[0] + (w[1] - w[0]) * j as f64 / k as f64 });
        }
    }
    edges
}

/// `∫∫ f` over the tensor grid given by cell edges, for `K` integrands at once.
pub fn integrate_2d<const K: usize, F>(eu: &[f64], ev: &[f64], f: F) -> [f64; K]
where
    F: Fn(f64, f64) -> [f64; K] + Sync + Send,
{
    let (x, w) = rule();
    let (nu, nv) = (eu.len() - 1, ev.len() - 1);
    let cells = par::map_range(nu * nv, |c| {
        let (i, j) = (c / nv, c % nv);
        let (ua, ub, va, vb) = (eu[i], eu[i + 1], ev[j], ev[j + 1]);
        let (hu, hv) = (0.5 * (ub - ua), 0.5 * (vb - va));
        let mut acc = [0.0; K];
        for (xi, wi) in x.iter().zip(w) {
            let u = ua + hu * (xi + 1.0);
            for (xj, wj) in x.iter().zip(w) {
                let v = va + hv * (xj + 1.0);
                let val = f(u, v);
                for k in 0..K {
                    acc[k] += wi * wj * val[k];
                }
            }
        }
        acc.map(|a| a * hu * hv)
    });
    let mut out = [0.0; K];
    for c in cells {
        for k in 0..K {
            out[k] += c[k];
        }
    }
    out
}

pub fn integrate_1d<const K: usize, F>(e: &[f64], f: F) -> [f64; K]
where
    F: Fn(f64) -> [f64; K] + Sync + Send,
{
    let (x, w) = rule();
    let cells = par::map_range(e.len() - 1, |i| {
        let h = 0.5 * (e[i + 1] - e[i]);
        let mut acc = [0.0; K];
        for (xi, wi) in x.iter().zip(w) {
            let val = f(e[i] + h * (xi + 1.0));
            for k in 0..K {
                acc[k] += wi * val[k];
            }
        }
        acc.map(|a| a * h)
    });
    let mut out = [0.0; K];
    for c in cells {
        for k in 0..K {
            out[k] += c[k];
        }
    }
    out
}

/// A value from the finer of two grid levels with `|fine − coarse|` as the
/// error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn from_levels(coarse: f64, fine: f64) -> Self {
        Self { value: fine, error: (fine - coarse).abs() }
    }
}
