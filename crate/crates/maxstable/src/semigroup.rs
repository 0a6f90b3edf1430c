//! The max-stable analogue of the Ornstein-Uhlenbeck semigroup.
//!
//! The transition mechanism replaces the Gaussian convolution identity by
//! its max-stable counterpart: starting from x, the state at time t is the
//! component-wise maximum of a contracted copy of x and an independently
//! scaled stationary draw. On the Fréchet branch,
//!
//! ```text
//! state(t) = e^(-t/alpha) x  max  (1 - e^(-t))^(1/alpha) Z,
//! ```
//!
//! with Z drawn from the stationary max-stable law. The Gumbel branch
//! (alpha = 0) shifts instead of scales. In one dimension the transition
//! kernel is explicit, so the semigroup is also available by quadrature.

use crate::catalog::{FieldD, ScalarField};
use crate::error::{Error, Result};
use crate::measures::{AngularMeasure, MaxStableLaw};
use crate::quad::QuadratureSpec;
use crate::rng::{mc_mean, McEstimate, RngSpec};
use crate::sampling::sample_branch;

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Parameter(format!("time must be >= 0, got {t}")));
    }
    Ok(())
}

/// One transition of the Mehler-type recursion applied to a point.
pub fn transition_point(law: &MaxStableLaw, t: f64, x: &[f64], z: &[f64]) -> Vec<f64> {
    let alpha = law.alpha;
    if alpha == 0.0 {
        let shift = (1.0 - (-t).exp()).ln();
        x.iter()
            .zip(z.iter())
            .map(|(&xj, &zj)| (xj - t).max(zj + shift))
            .collect()
    } else {
        let contract = (-t / alpha).exp();
        let inject = (1.0 - (-t).exp()).powf(1.0 / alpha);
        x.iter()
            .zip(z.iter())
            .map(|(&xj, &zj)| (contract * xj).max(inject * zj))
            .collect()
    }
}

/// Monte Carlo evaluation of P_t f(x) on any branch.
pub fn mehler_mc(
    law: &MaxStableLaw,
    f: &FieldD,
    t: f64,
    x: &[f64],
    n: usize,
    spec: RngSpec,
) -> Result<McEstimate> {
    check_time(t)?;
    if x.len() != law.d() || f.d != law.d() {
        return Err(Error::Domain(
            "state, field and law dimensions must agree".into(),
        ));
    }
    if t == 0.0 {
        return Ok(McEstimate {
            value: f.eval(x),
            std_error: 0.0,
            n: 0,
            rng: spec,
        });
    }
    Ok(mc_mean(spec, n, |rng| {
        let z = sample_branch(law, rng).expect("stationary draw");
        f.eval(&transition_point(law, t, x, &z))
    }))
}

/// Exact quadrature evaluation of P_t f(x) in one dimension on the
/// Fréchet branch. The kernel has an atom at the contracted start point
/// plus an absolutely continuous part, integrated after the substitution
/// z = x v^(-1/alpha):
///
/// ```text
/// P_t f(x) = f(e^(-t/a) x) e^(-g/x^a)
///          + g x^(-a) * integral over v in (0,1) of
///            f(e^(-t/a) x v^(-1/a)) e^(-g x^(-a) v) dv,
/// ```
///
/// with g = e^t - 1.
pub fn semigroup_1d(
    alpha: f64,
    f: &ScalarField,
    t: f64,
    x: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    check_time(t)?;
    if alpha <= 0.0 || x <= 0.0 {
        return Err(Error::Domain(
            "semigroup_1d needs alpha > 0 and x > 0".into(),
        ));
    }
    if t == 0.0 {
        return Ok(f.eval(x));
    }
    let g = t.exp_m1();
    let contract = (-t / alpha).exp();
    let xa = x.powf(-alpha);
    let atom = f.eval(contract * x) * (-g * xa).exp();
    // Jumps of f at level `thr` show up at v = (contract * x / thr)^alpha.
    let breaks: Vec<f64> = f
        .thresholds
        .iter()
        .filter(|&&thr| thr > 0.0)
        .map(|&thr| (contract * x / thr).powf(alpha))
        .collect();
    let integral = quad.integrate_split(0.0, 1.0, &breaks, |v| {
        f.eval(contract * x * v.powf(-1.0 / alpha)) * (-g * xa * v).exp()
    })?;
    Ok(atom + g * xa * integral)
}

/// Exact spatial derivative of P_t f in one dimension:
/// (P_t f)'(x) = e^(-t/a) e^(-g/x^a) f'(e^(-t/a) x).
pub fn semigroup_derivative_1d(alpha: f64, f: &ScalarField, t: f64, x: f64) -> Result<f64> {
    check_time(t)?;
    if alpha <= 0.0 || x <= 0.0 {
        return Err(Error::Domain(
            "semigroup_derivative_1d needs alpha > 0 and x > 0".into(),
        ));
    }
    let contract = (-t / alpha).exp();
    let g = t.exp_m1();
    Ok(contract * (-g * x.powf(-alpha)).exp() * f.deriv(contract * x)?)
}

/// Closed-form transition cdf in one dimension (Fréchet branch):
/// P(state(t) <= z | start x).
pub fn transition_cdf_1d(alpha: f64, t: f64, x: f64, z: f64) -> f64 {
    if z <= 0.0 || x * (-t / alpha).exp() > z {
        return 0.0;
    }
    (-(1.0 - (-t).exp()) * z.powf(-alpha)).exp()
}

/// Max-id semigroups conjugate to the Fréchet-branch semigroup through a
/// monotone marginal map psi onto the unit Fréchet scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PsiBranch {
    /// psi(x) = x^alpha, alpha > 0: the Fréchet branch itself.
    Power { alpha: f64 },
    /// psi(x) = e^x: Gumbel margins.
    Gumbel,
    /// psi(x) = (-x)^alpha, alpha < 0: Weibull margins on (-inf, 0).
    Weibull { alpha: f64 },
    /// psi(x) = 1/x: min-stable dynamics with exponential margins. psi is
    /// decreasing, so the Fréchet-scale max becomes a min after mapping back.
    MinStableExponential,
    /// psi(x) = -1/ln(x): uniform margins on (0, 1).
    MaxIdUniform,
    /// psi(x) = 1/ln(1 + e^(-x)): logistic margins.
    MaxIdLogistic,
}

impl PsiBranch {
    pub fn validate(&self) -> Result<()> {
        match self {
            PsiBranch::Power { alpha } if *alpha <= 0.0 => Err(Error::Parameter(
                "power branch needs alpha > 0".into(),
            )),
            PsiBranch::Weibull { alpha } if *alpha >= 0.0 => Err(Error::Parameter(
                "weibull branch needs alpha < 0".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Map a state coordinate to the unit Fréchet scale.
    pub fn psi(&self, x: f64) -> f64 {
        match self {
            PsiBranch::Power { alpha } => x.powf(*alpha),
            PsiBranch::Gumbel => x.exp(),
            PsiBranch::Weibull { alpha } => (-x).powf(*alpha),
            PsiBranch::MinStableExponential => 1.0 / x,
            PsiBranch::MaxIdUniform => -1.0 / x.ln(),
            PsiBranch::MaxIdLogistic => 1.0 / (1.0 + (-x).exp()).ln(),
        }
    }

    /// Inverse of psi on (0, inf).
    pub fn psi_inv(&self, z: f64) -> f64 {
        match self {
            PsiBranch::Power { alpha } => z.powf(1.0 / alpha),
            PsiBranch::Gumbel => z.ln(),
            PsiBranch::Weibull { alpha } => -z.powf(1.0 / alpha),
            PsiBranch::MinStableExponential => 1.0 / z,
            PsiBranch::MaxIdUniform => (-1.0 / z).exp(),
            PsiBranch::MaxIdLogistic => -((1.0 / z).exp_m1()).ln(),
        }
    }

    /// Whether psi is increasing; decreasing maps turn the Fréchet-scale
    /// maximum into a minimum on the original scale.
    pub fn increasing(&self) -> bool {
        !matches!(self, PsiBranch::MinStableExponential)
    }
}

/// A semigroup obtained by conjugating the alpha = 1 Fréchet-branch
/// semigroup with a marginal map.
#[derive(Debug, Clone)]
pub struct TransformedSemigroup {
    pub branch: PsiBranch,
    pub nu: AngularMeasure,
}

impl TransformedSemigroup {
    pub fn new(branch: PsiBranch, nu: AngularMeasure) -> Result<Self> {
        branch.validate()?;
        Ok(Self { branch, nu })
    }

    /// One transition on the original scale: map to the Fréchet scale,
    /// contract and inject there, map back.
    pub fn transition_point(&self, t: f64, x: &[f64], w: &[f64]) -> Vec<f64> {
        let decay = (-t).exp();
        x.iter()
            .zip(w.iter())
            .map(|(&xj, &wj)| {
                let z = (decay * self.branch.psi(xj)).max((1.0 - decay) * wj);
                self.branch.psi_inv(z)
            })
            .collect()
    }

    /// Monte Carlo evaluation of the transformed semigroup.
    pub fn eval_mc(
        &self,
        f: &FieldD,
        t: f64,
        x: &[f64],
        n: usize,
        spec: RngSpec,
    ) -> Result<McEstimate> {
        check_time(t)?;
        let unit = MaxStableLaw::new(1.0, self.nu.clone())?;
        if t == 0.0 {
            return Ok(McEstimate {
                value: f.eval(x),
                std_error: 0.0,
                n: 0,
                rng: spec,
            });
        }
        Ok(mc_mean(spec, n, |rng| {
            let w = crate::sampling::sample_max_stable(&unit, rng).expect("unit draw");
            f.eval(&self.transition_point(t, x, &w))
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{f_indicator, f_log, FieldD};
    use crate::measures::AngularMeasure;

    fn q() -> QuadratureSpec {
        QuadratureSpec::with_tol(1e-11)
    }

    #[test]
    fn time_zero_is_identity() {
        let f = f_log();
        let v = semigroup_1d(1.0, &f, 0.0, 2.0, &q()).unwrap();
        assert_eq!(v, (2.0f64).ln());
    }

    #[test]
    fn constants_are_preserved() {
        let f = crate::catalog::f_const1();
        for &alpha in &[0.5, 1.0, 2.0] {
            for &t in &[0.1, 1.0, 3.0] {
                let v = semigroup_1d(alpha, &f, t, 1.7, &q()).unwrap();
                assert!((v - 1.0).abs() < 1e-10, "alpha {alpha} t {t}: {v}");
            }
        }
    }

    #[test]
    fn indicator_has_closed_form() {
        for &alpha in &[0.5, 1.0, 2.0] {
            for &(t, x, z) in &[(0.3, 0.8, 1.0), (1.0, 2.0, 1.5), (2.0, 0.5, 0.5)] {
                let f = f_indicator(z);
                let v = semigroup_1d(alpha, &f, t, x, &q()).unwrap();
                let want = transition_cdf_1d(alpha, t, x, z);
                assert!((v - want).abs() < 1e-10, "alpha {alpha} t {t}: {v} vs {want}");
            }
        }
    }

    #[test]
    fn quadrature_matches_monte_carlo() {
        let law = MaxStableLaw::new(1.0, AngularMeasure::dependence(1)).unwrap();
        let f1 = f_log();
        let fd = FieldD::coordinate(&f1, 1, 0);
        let t = 0.7;
        let x = 1.3;
        let exact = semigroup_1d(1.0, &f1, t, x, &q()).unwrap();
        let mc = mehler_mc(&law, &fd, t, &[x], 200_000, RngSpec::new(2, 0)).unwrap();
        assert!(
            (mc.value - exact).abs() < 4.0 * mc.std_error,
            "{} vs {exact} +- {}",
            mc.value,
            mc.std_error
        );
    }

    #[test]
    fn semigroup_law_under_quadrature() {
        // P_{t+s} f = P_t (P_s f) pointwise.
        let f = f_log();
        let (t, s, x, alpha) = (0.4, 0.9, 1.6, 2.0);
        let lhs = semigroup_1d(alpha, &f, t + s, x, &q()).unwrap();
        let inner = f.clone();
        let ps = ScalarField::new("Ps", move |y| {
            semigroup_1d(alpha, &inner, s, y, &QuadratureSpec::with_tol(1e-12)).unwrap()
        });
        let rhs = semigroup_1d(alpha, &ps, t, x, &q()).unwrap();
        assert!((lhs - rhs).abs() < 1e-8, "{lhs} vs {rhs}");
    }

    #[test]
    fn derivative_commutation_exact_form() {
        // (P_t f)'(x) agrees with a central difference of P_t f.
        let f = f_log();
        let (alpha, t, x) = (1.0, 0.6, 1.2);
        let d = semigroup_derivative_1d(alpha, &f, t, x).unwrap();
        let h = 1e-5;
        let up = semigroup_1d(alpha, &f, t, x + h, &q()).unwrap();
        let dn = semigroup_1d(alpha, &f, t, x - h, &q()).unwrap();
        assert!((d - (up - dn) / (2.0 * h)).abs() < 1e-6);
    }

    #[test]
    fn gumbel_branch_mc_matches_power_branch() {
        // The Gumbel dynamics are the log of the alpha = 1 dynamics.
        let nu = AngularMeasure::dependence(1);
        let g_law = MaxStableLaw::new(0.0, nu.clone()).unwrap();
        let f_law = MaxStableLaw::new(1.0, nu).unwrap();
        let id_g = FieldD::new("id", 1, |x: &[f64]| x[0]);
        let log_f = FieldD::new("log", 1, |x: &[f64]| x[0].ln());
        let (t, x) = (0.8, 0.4);
        let spec = RngSpec::new(17, 0);
        let a = mehler_mc(&g_law, &id_g, t, &[x], 100_000, spec).unwrap();
        let b = mehler_mc(&f_law, &log_f, t, &[x.exp()], 100_000, spec).unwrap();
        // Same seed, same underlying draws: identical up to the transform.
        assert!((a.value - b.value).abs() < 1e-12);
    }

    #[test]
    fn uniform_branch_formula() {
        // psi_inv(e^-t psi(x) max (1-e^-t) W) = x^(e^t) max U^(1/(1-e^-t))
        // with U = exp(-1/W).
        let b = PsiBranch::MaxIdUniform;
        let (t, x, w) = (0.9f64, 0.6f64, 2.3f64);
        let got = b.psi_inv(((-t).exp() * b.psi(x)).max((1.0 - (-t).exp()) * w));
        let u = (-1.0 / w).exp();
        let want = x.powf(t.exp()).max(u.powf(1.0 / (1.0 - (-t).exp())));
        assert!((got - want).abs() < 1e-14);
    }

    #[test]
    fn min_stable_branch_formula() {
        // Exponential margins: state(t) = min(e^t x, (1-e^-t)^-1 E) with
        // E = 1/W exponential.
        let b = PsiBranch::MinStableExponential;
        let (t, x, w) = (0.5f64, 1.4f64, 0.9f64);
        let got = b.psi_inv(((-t).exp() * b.psi(x)).max((1.0 - (-t).exp()) * w));
        let want = (t.exp() * x).min(1.0 / ((1.0 - (-t).exp()) * w));
        assert!((got - want).abs() < 1e-14);
    }

    #[test]
    fn psi_round_trips() {
        for b in [
            PsiBranch::Power { alpha: 2.0 },
            PsiBranch::Gumbel,
            PsiBranch::Weibull { alpha: -1.5 },
            PsiBranch::MinStableExponential,
            PsiBranch::MaxIdUniform,
            PsiBranch::MaxIdLogistic,
        ] {
            for &z in &[0.3, 1.0, 4.2] {
                assert!(
                    (b.psi(b.psi_inv(z)) - z).abs() < 1e-10 * z.max(1.0),
                    "{b:?} at {z}"
                );
            }
        }
    }

    #[test]
    fn transformed_semigroup_is_stationary_at_its_margin() {
        // Uniform branch started from its stationary law stays uniform:
        // P_t f integrated against Unif(0,1) equals E[f(U)].
        let ts = TransformedSemigroup::new(PsiBranch::MaxIdUniform, AngularMeasure::dependence(1))
            .unwrap();
        let f = FieldD::new("square", 1, |x: &[f64]| x[0] * x[0]);
        let spec = RngSpec::new(4, 0);
        // E over start U of P_t f(U) should be E[U^2] = 1/3.
        let est = mc_mean(spec, 200_000, |rng| {
            let u = crate::rng::unit_open(rng);
            let unit = MaxStableLaw::new(1.0, ts.nu.clone()).unwrap();
            let w = crate::sampling::sample_max_stable(&unit, rng).unwrap();
            let y = ts.transition_point(0.8, &[u], &w);
            f.eval(&y)
        });
        assert!((est.value - 1.0 / 3.0).abs() < 4.0 * est.std_error);
    }
}
