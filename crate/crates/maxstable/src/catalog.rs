//! Test function catalog.
//!
//! [`ScalarField`] is a univariate function with registered first and
//! second derivatives where available, plus metadata the calculus modules
//! need: a log-Lipschitz constant (a bound on x |f'(x)|) and the locations
//! of any jumps, which quadrature routines must treat as panel boundaries.
//! [`FieldD`] is the multivariate analogue used by Monte Carlo routines.

use crate::error::{Error, Result};
use std::f64::consts::FRAC_PI_4;
use std::sync::Arc;

type Fn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type FnD = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradD = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
pub struct ScalarField {
    pub name: String,
    f: Fn1,
    df: Option<Fn1>,
    d2f: Option<Fn1>,
    pub log_lipschitz: Option<f64>,
    /// Points where the function jumps or loses smoothness.
    pub thresholds: Vec<f64>,
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarField")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

impl ScalarField {
    pub fn new<F>(name: &str, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.to_string(),
            f: Arc::new(f),
            df: None,
            d2f: None,
            log_lipschitz: None,
            thresholds: Vec::new(),
        }
    }

    pub fn with_derivative<F>(mut self, df: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.df = Some(Arc::new(df));
        self
    }

    pub fn with_second_derivative<F>(mut self, d2f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.d2f = Some(Arc::new(d2f));
        self
    }

    pub fn with_log_lipschitz(mut self, c: f64) -> Self {
        self.log_lipschitz = Some(c);
        self
    }

    pub fn with_thresholds(mut self, t: Vec<f64>) -> Self {
        self.thresholds = t;
        self
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn deriv(&self, x: f64) -> Result<f64> {
        match &self.df {
            Some(df) => Ok(df(x)),
            None => Err(Error::MissingDerivative(self.name.clone())),
        }
    }

    pub fn second_deriv(&self, x: f64) -> Result<f64> {
        match &self.d2f {
            Some(d2) => Ok(d2(x)),
            None => Err(Error::MissingDerivative(self.name.clone())),
        }
    }

    pub fn has_derivative(&self) -> bool {
        self.df.is_some()
    }

    /// Shift by a constant (used to center against a stationary mean).
    pub fn shifted(&self, c: f64) -> Self {
        let f = self.f.clone();
        Self {
            name: format!("{}{:+.6e}", self.name, c),
            f: Arc::new(move |x| f(x) + c),
            df: self.df.clone(),
            d2f: self.d2f.clone(),
            log_lipschitz: self.log_lipschitz,
            thresholds: self.thresholds.clone(),
        }
    }
}

/// log x. Log-Lipschitz constant 1.
pub fn f_log() -> ScalarField {
    ScalarField::new("log", |x| x.ln())
        .with_derivative(|x| 1.0 / x)
        .with_second_derivative(|x| -1.0 / (x * x))
        .with_log_lipschitz(1.0)
}

/// 1 / (1 + x). Bounded, decreasing; x|f'| peaks at 1/4.
pub fn f_inv1p() -> ScalarField {
    ScalarField::new("inv1p", |x| 1.0 / (1.0 + x))
        .with_derivative(|x| -1.0 / ((1.0 + x) * (1.0 + x)))
        .with_second_derivative(|x| 2.0 / ((1.0 + x) * (1.0 + x) * (1.0 + x)))
        .with_log_lipschitz(0.25)
}

/// arctan(log x). Bounded with x|f'| = 1/(1 + log^2 x) <= 1.
pub fn f_atanlog() -> ScalarField {
    ScalarField::new("atanlog", |x| x.ln().atan())
        .with_derivative(|x| {
            let l = x.ln();
            1.0 / (x * (1.0 + l * l))
        })
        .with_second_derivative(|x| {
            let l = x.ln();
            let q = 1.0 + l * l;
            -(q + 2.0 * l) / (x * x * q * q)
        })
        .with_log_lipschitz(1.0)
}

/// x / (1 + x). Bounded, increasing; x|f'| peaks at 1/4.
pub fn f_ratio() -> ScalarField {
    ScalarField::new("ratio", |x| x / (1.0 + x))
        .with_derivative(|x| 1.0 / ((1.0 + x) * (1.0 + x)))
        .with_second_derivative(|x| -2.0 / ((1.0 + x) * (1.0 + x) * (1.0 + x)))
        .with_log_lipschitz(0.25)
}

/// Constant one.
pub fn f_const1() -> ScalarField {
    ScalarField::new("const1", |_| 1.0)
        .with_derivative(|_| 0.0)
        .with_second_derivative(|_| 0.0)
        .with_log_lipschitz(0.0)
}

/// 1/x - 1, centered under the unit Fréchet law (alpha = 1).
pub fn f_recip_centered() -> ScalarField {
    ScalarField::new("recip_centered", |x| 1.0 / x - 1.0)
        .with_derivative(|x| -1.0 / (x * x))
        .with_second_derivative(|x| 2.0 / (x * x * x))
        .with_log_lipschitz(f64::INFINITY)
}

/// Indicator of (-inf, z], the character function of the max-semigroup.
pub fn f_indicator(z: f64) -> ScalarField {
    ScalarField::new(&format!("h_z:{z}"), move |x| {
        if x <= z {
            1.0
        } else {
            0.0
        }
    })
    .with_thresholds(vec![z])
}

/// exp(arctan(log x)): a strictly positive field for entropy inequalities.
pub fn f_exp_atanlog() -> ScalarField {
    ScalarField::new("exp_atanlog", |x| x.ln().atan().exp())
        .with_derivative(|x| {
            let l = x.ln();
            x.ln().atan().exp() / (x * (1.0 + l * l))
        })
        .with_log_lipschitz(FRAC_PI_4.exp())
}

/// 1 + x/(1+x): strictly positive, bounded in [1, 2].
pub fn f_one_plus_ratio() -> ScalarField {
    ScalarField::new("one_plus_ratio", |x| 1.0 + x / (1.0 + x))
        .with_derivative(|x| 1.0 / ((1.0 + x) * (1.0 + x)))
        .with_second_derivative(|x| -2.0 / ((1.0 + x) * (1.0 + x) * (1.0 + x)))
        .with_log_lipschitz(0.25)
}

/// The smooth catalog entries used by the verification suites.
pub fn smooth_catalog() -> Vec<ScalarField> {
    vec![f_log(), f_inv1p(), f_atanlog(), f_ratio()]
}

/// Resolve a catalog entry by name. Indicators are addressed as `h_z:<z>`.
pub fn by_name(name: &str) -> Result<ScalarField> {
    match name {
        "log" => Ok(f_log()),
        "inv1p" => Ok(f_inv1p()),
        "atanlog" => Ok(f_atanlog()),
        "ratio" => Ok(f_ratio()),
        "const1" => Ok(f_const1()),
        "recip_centered" => Ok(f_recip_centered()),
        "exp_atanlog" => Ok(f_exp_atanlog()),
        "one_plus_ratio" => Ok(f_one_plus_ratio()),
        _ => {
            if let Some(z) = name.strip_prefix("h_z:") {
                let z: f64 = z
                    .parse()
                    .map_err(|_| Error::Parameter(format!("bad indicator level `{z}`")))?;
                Ok(f_indicator(z))
            } else {
                Err(Error::Parameter(format!(
                    "unknown catalog function `{name}`; available: log, inv1p, \
                     atanlog, ratio, const1, recip_centered, exp_atanlog, \
                     one_plus_ratio, h_z:<z>"
                )))
            }
        }
    }
}

/// A multivariate scalar function with optional gradient.
#[derive(Clone)]
pub struct FieldD {
    pub name: String,
    pub d: usize,
    f: FnD,
    grad: Option<GradD>,
    /// Levels (in any coordinate) where the field jumps; radial quadrature
    /// against the exponent measure splits at the crossing radii.
    pub thresholds: Vec<f64>,
}

impl std::fmt::Debug for FieldD {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FieldD")
            .field("name", &self.name)
            .field("d", &self.d)
            .finish_non_exhaustive()
    }
}

impl FieldD {
    pub fn new<F>(name: &str, d: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.to_string(),
            d,
            f: Arc::new(f),
            grad: None,
            thresholds: Vec::new(),
        }
    }

    pub fn with_gradient<G>(mut self, g: G) -> Self
    where
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.grad = Some(Arc::new(g));
        self
    }

    pub fn with_thresholds(mut self, t: Vec<f64>) -> Self {
        self.thresholds = t;
        self
    }

    /// Indicator of the box [0, z] in d variables.
    pub fn box_indicator(z: Vec<f64>) -> Self {
        let levels = z.clone();
        let zc = z.clone();
        Self::new(&format!("h_box:{z:?}"), z.len(), move |x: &[f64]| {
            if x.iter().zip(zc.iter()).all(|(&xj, &zj)| xj <= zj) {
                1.0
            } else {
                0.0
            }
        })
        .with_thresholds(levels)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        match &self.grad {
            Some(g) => Ok(g(x)),
            None => Err(Error::MissingDerivative(self.name.clone())),
        }
    }

    /// Lift a univariate field to d variables through one coordinate.
    pub fn coordinate(base: &ScalarField, d: usize, j: usize) -> Self {
        assert!(j < d);
        let f = base.clone();
        let g = base.clone();
        Self::new(&format!("{}[x{}]", base.name, j), d, move |x: &[f64]| {
            f.eval(x[j])
        })
        .with_gradient(move |x: &[f64]| {
            let mut grad = vec![0.0; x.len()];
            grad[j] = g.deriv(x[j]).unwrap_or(f64::NAN);
            grad
        })
    }

    /// Sum of a univariate field over all coordinates.
    pub fn separable_sum(base: &ScalarField, d: usize) -> Self {
        let f = base.clone();
        let g = base.clone();
        Self::new(&format!("sum_{}", base.name), d, move |x: &[f64]| {
            x.iter().map(|&xj| f.eval(xj)).sum()
        })
        .with_gradient(move |x: &[f64]| {
            x.iter().map(|&xj| g.deriv(xj).unwrap_or(f64::NAN)).collect()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn central(f: &ScalarField, x: f64) -> f64 {
        let h = 1e-6 * x.max(1.0);
        (f.eval(x + h) - f.eval(x - h)) / (2.0 * h)
    }

    fn central2(f: &ScalarField, x: f64) -> f64 {
        let h = 1e-4 * x.max(1.0);
        (f.eval(x + h) - 2.0 * f.eval(x) + f.eval(x - h)) / (h * h)
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for f in [
            f_log(),
            f_inv1p(),
            f_atanlog(),
            f_ratio(),
            f_recip_centered(),
            f_exp_atanlog(),
            f_one_plus_ratio(),
        ] {
            for &x in &[0.3, 0.9, 1.7, 4.2] {
                let d = f.deriv(x).unwrap();
                assert!(
                    (d - central(&f, x)).abs() <= 1e-6 * d.abs().max(1.0),
                    "{} deriv at {x}",
                    f.name
                );
                if let Ok(d2) = f.second_deriv(x) {
                    assert!(
                        (d2 - central2(&f, x)).abs() <= 1e-5 * d2.abs().max(1.0),
                        "{} second deriv at {x}",
                        f.name
                    );
                }
            }
        }
    }

    #[test]
    fn log_lipschitz_constants_hold_on_grid() {
        for f in smooth_catalog() {
            let c = f.log_lipschitz.unwrap();
            let mut x = 1e-3;
            while x < 1e3 {
                assert!(x * f.deriv(x).unwrap().abs() <= c + 1e-12, "{} at {x}", f.name);
                x *= 1.37;
            }
        }
    }

    #[test]
    fn lookup_by_name() {
        assert!(by_name("log").is_ok());
        assert!(by_name("h_z:1.5").is_ok());
        assert!(by_name("nope").is_err());
        let h = by_name("h_z:2").unwrap();
        assert_eq!(h.eval(1.9), 1.0);
        assert_eq!(h.eval(2.1), 0.0);
        assert_eq!(h.thresholds, vec![2.0]);
    }

    #[test]
    fn multivariate_lift() {
        let f = FieldD::separable_sum(&f_log(), 2);
        assert!((f.eval(&[1.0, std::f64::consts::E]) - 1.0).abs() < 1e-15);
        let g = f.gradient(&[2.0, 4.0]).unwrap();
        assert!((g[0] - 0.5).abs() < 1e-15 && (g[1] - 0.25).abs() < 1e-15);
    }
}
