//! Finite-difference derivatives from function values only.
//!
//! Used as an oracle against the symbolic derivative trees; nothing here
//! touches [`super::Expr::diff`].

use crate::frame::{CoordVector, Point};

use super::Hessian;

/// Step for first derivatives.
pub const GRAD_STEP: f64 = 1e-5;
/// Step for second derivatives (a smaller step drowns in round-off).
pub const HESS_STEP: f64 = 1e-3;

fn shifted(p: &Point, i: usize, h: f64) -> Point {
    let mut a = p.to_array();
    a[i] += h;
    Point::new(a[0], a[1], a[2])
}

fn central(f: &dyn Fn(&Point) -> f64, p: &Point, i: usize, h: f64) -> f64 {
    (f(&shifted(p, i, h)) - f(&shifted(p, i, -h))) / (2.0 * h)
}

/// Central differences with one Richardson step.
pub fn gradient(f: &dyn Fn(&Point) -> f64, p: &Point) -> CoordVector {
    let d = |i| {
        let coarse = central(f, p, i, GRAD_STEP);
        let fine = central(f, p, i, GRAD_STEP / 2.0);
        (4.0 * fine - coarse) / 3.0
    };
    CoordVector::new(d(0), d(1), d(2))
}

fn second(f: &dyn Fn(&Point) -> f64, p: &Point, i: usize, j: usize, h: f64) -> f64 {
    if i == j {
        (f(&shifted(p, i, h)) - 2.0 * f(p) + f(&shifted(p, i, -h))) / (h * h)
    } else {
        let pp = shifted(&shifted(p, i, h), j, h);
        let pm = shifted(&shifted(p, i, h), j, -h);
        let mp = shifted(&shifted(p, i, -h), j, h);
        let mm = shifted(&shifted(p, i, -h), j, -h);
        (f(&pp) - f(&pm) - f(&mp) + f(&mm)) / (4.0 * h * h)
    }
}

pub fn hessian(f: &dyn Fn(&Point) -> f64, p: &Point) -> Hessian {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let coarse = second(f, p, i, j, HESS_STEP);
            let fine = second(f, p, i, j, HESS_STEP / 2.0);
            let v = (4.0 * fine - coarse) / 3.0;
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    out
}
