//! Scalar fields `u(x, y, z)` whose zero level sets define surfaces.
//!
//! Fields are parsed from a small expression language and differentiated
//! symbolically once, at construction. Evaluation of the value, gradient and
//! Hessian walks the cached trees.

mod catalog;
mod expr;
pub mod fd;
mod parse;

use std::fmt;

use thiserror::Error;

use crate::frame::{CoordVector, Point};

pub use catalog::CatalogSurface;
pub use expr::{Expr, Var};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("division by zero at ({}, {}, {})", point.x, point.y, point.z)]
    Pole { point: Point },
    #[error("non-finite value at ({}, {}, {})", point.x, point.y, point.z)]
    Overflow { point: Point },
    #[error("bad surface parameters: {0}")]
    BadParams(String),
}

/// Symmetric 3×3 matrix of second partials, indexed by [`Var::index`].
pub type Hessian = [[f64; 3]; 3];

/// Value, gradient and Hessian of a field at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldJet {
    pub value: f64,
    pub grad: CoordVector,
    pub hess: Hessian,
}

#[derive(Debug, Clone)]
pub struct ScalarField {
    expr: Expr,
    grad: [Expr; 3],
    // xx, xy, xz, yy, yz, zz
    hess: [Expr; 6],
}

const HESS_INDEX: [[usize; 3]; 3] = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];

impl ScalarField {
    pub fn parse(source: &str) -> Result<Self, FieldError> {
        parse::parse_expr(source).map(Self::from_expr)
    }

    pub fn from_expr(expr: Expr) -> Self {
        let grad = Var::ALL.map(|v| expr.diff(v));
        let hess = [
            grad[0].diff(Var::X),
            grad[0].diff(Var::Y),
            grad[0].diff(Var::Z),
            grad[1].diff(Var::Y),
            grad[1].diff(Var::Z),
            grad[2].diff(Var::Z),
        ];
        Self { expr, grad, hess }
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    /// Partial derivative tree `∂u/∂v`.
    pub fn partial(&self, v: Var) -> &Expr {
        &self.grad[v.index()]
    }

    pub fn second_partial(&self, a: Var, b: Var) -> &Expr {
        &self.hess[HESS_INDEX[a.index()][b.index()]]
    }

    /// The same surface with the opposite orientation (`u ↦ −u`).
    pub fn negated(&self) -> Self {
        Self::from_expr(Expr::neg(self.expr.clone()))
    }

    pub fn has_division(&self) -> bool {
        self.expr.has_division()
    }

    pub fn eval(&self, p: &Point) -> Result<f64, FieldError> {
        self.expr.eval(p)
    }

    pub fn eval_grad(&self, p: &Point) -> Result<CoordVector, FieldError> {
        Ok(CoordVector::new(
            self.grad[0].eval(p)?,
            self.grad[1].eval(p)?,
            self.grad[2].eval(p)?,
        ))
    }

    pub fn eval_hessian(&self, p: &Point) -> Result<Hessian, FieldError> {
        let mut h = [[0.0; 3]; 3];
        for (i, row) in h.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = self.hess[HESS_INDEX[i][j]].eval(p)?;
            }
        }
        Ok(h)
    }

    pub fn jet(&self, p: &Point) -> Result<FieldJet, FieldError> {
        Ok(FieldJet { value: self.eval(p)?, grad: self.eval_grad(p)?, hess: self.eval_hessian(p)? })
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.expr)
    }
}
