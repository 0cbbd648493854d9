use serde::{Deserialize, Serialize};

use super::{Expr, FieldError, ScalarField};
use crate::frame::Point;

/// Named surfaces, so callers need not type formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum CatalogSurface {
    /// `x + c = 0`
    PlaneX { c: f64 },
    /// `y + c = 0`
    PlaneY { c: f64 },
    /// `z + c = 0`
    PlaneZ { c: f64 },
    /// `a·x + b·y + c = 0`
    PlaneAb { a: f64, b: f64, c: f64 },
    /// `a·x + b·y + c·z + d = 0` (not minimal unless `c = 0`)
    Tilted { a: f64, b: f64, c: f64, d: f64 },
    /// `e^{z+z₀}(y − y₀) + x − x₀ = 0`, the minimal surface with an isolated
    /// singular point at `p0`.
    SaddlePoint { p0: Point },
    /// `e^{z}(y − y₀) + e^{−z}(x − x₀) = 0`, singular along the vertical line
    /// through `(x₀, y₀)`. `z₀` is carried along but the surface is invariant
    /// under translation along that line.
    SaddleCurve { p0: Point },
}

impl CatalogSurface {
    pub const NAMES: [&'static str; 7] =
        ["plane-x", "plane-y", "plane-z", "plane-ab", "tilted", "saddle-point", "saddle-curve"];

    pub fn name(&self) -> &'static str {
        match self {
            CatalogSurface::PlaneX { .. } => "plane-x",
            CatalogSurface::PlaneY { .. } => "plane-y",
            CatalogSurface::PlaneZ { .. } => "plane-z",
            CatalogSurface::PlaneAb { .. } => "plane-ab",
            CatalogSurface::Tilted { .. } => "tilted",
            CatalogSurface::SaddlePoint { .. } => "saddle-point",
            CatalogSurface::SaddleCurve { .. } => "saddle-curve",
        }
    }

    /// Build from a name and positional parameters; missing trailing
    /// parameters take the documented defaults.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self, FieldError> {
        let get = |i: usize, default: f64| params.get(i).copied().unwrap_or(default);
        let max = match name {
            "plane-x" | "plane-y" | "plane-z" => 1,
            "plane-ab" | "saddle-point" | "saddle-curve" => 3,
            "tilted" => 4,
            _ => return Err(FieldError::BadParams(format!("unknown surface '{name}'"))),
        };
        if params.len() > max {
            return Err(FieldError::BadParams(format!("{name} takes at most {max} parameters")));
        }
        let p0 = || Point::new(get(0, 0.0), get(1, 0.0), get(2, 0.0));
        let s = match name {
            "plane-x" => CatalogSurface::PlaneX { c: get(0, 0.0) },
            "plane-y" => CatalogSurface::PlaneY { c: get(0, 0.0) },
            "plane-z" => CatalogSurface::PlaneZ { c: get(0, 0.0) },
            "plane-ab" => CatalogSurface::PlaneAb { a: get(0, 1.0), b: get(1, 1.0), c: get(2, 0.0) },
            "tilted" => CatalogSurface::Tilted { a: get(0, 1.0), b: get(1, 1.0), c: get(2, 1.0), d: get(3, 0.0) },
            "saddle-point" => CatalogSurface::SaddlePoint { p0: p0() },
            _ => CatalogSurface::SaddleCurve { p0: p0() },
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        let ok = match *self {
            CatalogSurface::PlaneX { c } | CatalogSurface::PlaneY { c } | CatalogSurface::PlaneZ { c } => finite(&[c]),
            CatalogSurface::PlaneAb { a, b, c } => {
                if a == 0.0 && b == 0.0 {
                    return Err(FieldError::BadParams("plane-ab needs (a, b) != (0, 0)".into()));
                }
                finite(&[a, b, c])
            }
            CatalogSurface::Tilted { a, b, c, d } => {
                if a == 0.0 && b == 0.0 && c == 0.0 {
                    return Err(FieldError::BadParams("tilted needs a nonzero normal".into()));
                }
                finite(&[a, b, c, d])
            }
            CatalogSurface::SaddlePoint { p0 } | CatalogSurface::SaddleCurve { p0 } => p0.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(FieldError::BadParams("parameters must be finite".into()))
        }
    }

    pub fn expr(&self) -> Expr {
        use Expr as E;
        let shifted = |v: Expr, by: f64| E::sub(v, E::c(by));
        match *self {
            CatalogSurface::PlaneX { c } => E::add(E::x(), E::c(c)),
            CatalogSurface::PlaneY { c } => E::add(E::y(), E::c(c)),
            CatalogSurface::PlaneZ { c } => E::add(E::z(), E::c(c)),
            CatalogSurface::PlaneAb { a, b, c } => {
                E::add(E::add(E::mul(E::c(a), E::x()), E::mul(E::c(b), E::y())), E::c(c))
            }
            CatalogSurface::Tilted { a, b, c, d } => E::add(
                E::add(E::add(E::mul(E::c(a), E::x()), E::mul(E::c(b), E::y())), E::mul(E::c(c), E::z())),
                E::c(d),
            ),
            CatalogSurface::SaddlePoint { p0 } => E::sub(
                E::add(E::mul(E::exp(E::add(E::z(), E::c(p0.z))), shifted(E::y(), p0.y)), E::x()),
                E::c(p0.x),
            ),
            CatalogSurface::SaddleCurve { p0 } => E::add(
                E::mul(E::exp(E::z()), shifted(E::y(), p0.y)),
                E::mul(E::exp(E::neg(E::z())), shifted(E::x(), p0.x)),
            ),
        }
    }

    pub fn field(&self) -> ScalarField {
        ScalarField::from_expr(self.expr())
    }

    /// One representative of every entry with non-trivial parameters.
    pub fn examples() -> Vec<CatalogSurface> {
        vec![
            CatalogSurface::PlaneX { c: 0.5 },
            CatalogSurface::PlaneY { c: -1.0 },
            CatalogSurface::PlaneZ { c: 0.25 },
            CatalogSurface::PlaneAb { a: 1.0, b: 2.0, c: -0.5 },
            CatalogSurface::Tilted { a: 1.0, b: 1.0, c: 1.0, d: 0.0 },
            CatalogSurface::SaddlePoint { p0: Point::new(0.3, -0.4, 0.6) },
            CatalogSurface::SaddleCurve { p0: Point::new(-0.2, 0.7, 0.0) },
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_forms() {
        assert_eq!(CatalogSurface::SaddlePoint { p0: Point::ORIGIN }.field().to_string(), "exp(z)*y + x");
        assert_eq!(
            CatalogSurface::SaddleCurve { p0: Point::ORIGIN }.field().to_string(),
            "exp(z)*y + exp(-z)*x"
        );
        assert_eq!(CatalogSurface::PlaneX { c: 2.0 }.field().to_string(), "x + 2.0");
    }

    #[test]
    fn parameters() {
        assert_eq!(CatalogSurface::from_name("plane-ab", &[]).unwrap(), CatalogSurface::PlaneAb { a: 1.0, b: 1.0, c: 0.0 });
        assert!(matches!(CatalogSurface::from_name("plane-ab", &[0.0, 0.0]), Err(FieldError::BadParams(_))));
        assert!(matches!(CatalogSurface::from_name("plane-x", &[1.0, 2.0]), Err(FieldError::BadParams(_))));
        assert!(matches!(CatalogSurface::from_name("torus", &[]), Err(FieldError::BadParams(_))));
        for n in CatalogSurface::NAMES {
            assert_eq!(CatalogSurface::from_name(n, &[]).unwrap().name(), n);
        }
    }
}
