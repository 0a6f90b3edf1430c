//! Angular measures on the sup-norm sphere and the max-stable laws they
//! parameterize.
//!
//! An angular measure is a finite atomic measure on the positive part of
//! the unit sphere for the sup norm: every direction lies in [0,1]^d with
//! at least one coordinate equal to one. A valid measure satisfies the
//! moment constraint that each coordinate integrates to one, which pins the
//! margins of the associated max-stable law to standard Fréchet.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const MOMENT_TOL: f64 = 1e-12;
const SPHERE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub w: f64,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngularMeasure {
    d: usize,
    norm: String,
    atoms: Vec<Atom>,
}

/// Raw deserialization target; promoted to `AngularMeasure` only after
/// validation.
#[derive(Deserialize)]
struct RawMeasure {
    d: usize,
    #[serde(default = "default_norm")]
    norm: String,
    atoms: Vec<Atom>,
}

fn default_norm() -> String {
    "sup".to_string()
}

impl<'de> Deserialize<'de> for AngularMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = RawMeasure::deserialize(de)?;
        if raw.norm != "sup" {
            return Err(serde::de::Error::custom(format!(
                "unsupported norm `{}` (only `sup`)",
                raw.norm
            )));
        }
        AngularMeasure::new(raw.d, raw.atoms).map_err(serde::de::Error::custom)
    }
}

impl AngularMeasure {
    /// Build and structurally validate a measure. The moment constraint is
    /// also enforced; use [`AngularMeasure::new_unconstrained`] to skip it.
    pub fn new(d: usize, atoms: Vec<Atom>) -> Result<Self> {
        let m = Self::new_unconstrained(d, atoms)?;
        m.validate_moment_constraint()?;
        Ok(m)
    }

    /// Structural validation only: positive weights, directions in [0,1]^d
    /// with sup norm one.
    pub fn new_unconstrained(d: usize, atoms: Vec<Atom>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidMeasure("dimension must be positive".into()));
        }
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("measure has no atoms".into()));
        }
        for (k, a) in atoms.iter().enumerate() {
            if !(a.w.is_finite() && a.w > 0.0) {
                return Err(Error::InvalidMeasure(format!(
                    "atom {k} has non-positive weight {}",
                    a.w
                )));
            }
            if a.u.len() != d {
                return Err(Error::InvalidMeasure(format!(
                    "atom {k} has dimension {} but the measure declares d = {d}",
                    a.u.len()
                )));
            }
            let mut max = f64::NEG_INFINITY;
            for &uj in &a.u {
                if !(uj.is_finite() && (0.0..=1.0 + SPHERE_TOL).contains(&uj)) {
                    return Err(Error::InvalidMeasure(format!(
                        "atom {k} has coordinate {uj} outside [0, 1]"
                    )));
                }
                max = max.max(uj);
            }
            if (max - 1.0).abs() > SPHERE_TOL {
                return Err(Error::InvalidMeasure(format!(
                    "atom {k} has sup norm {max}, expected 1"
                )));
            }
        }
        Ok(Self {
            d,
            norm: default_norm(),
            atoms,
        })
    }

    /// Check that every coordinate integrates to one under the measure.
    pub fn validate_moment_constraint(&self) -> Result<()> {
        for j in 0..self.d {
            let sum: f64 = self.atoms.iter().map(|a| a.w * a.u[j]).sum();
            if (sum - 1.0).abs() > MOMENT_TOL {
                return Err(Error::MomentConstraint {
                    coord: j,
                    sum,
                    tol: MOMENT_TOL,
                });
            }
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.w).sum()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("measure serializes")
    }

    /// Full independence: unit mass on each coordinate axis.
    pub fn independence(d: usize) -> Self {
        let atoms = (0..d)
            .map(|j| {
                let mut u = vec![0.0; d];
                u[j] = 1.0;
                Atom { w: 1.0, u }
            })
            .collect();
        Self::new(d, atoms).expect("independence preset is valid")
    }

    /// Full dependence: unit mass on the diagonal direction.
    pub fn dependence(d: usize) -> Self {
        Self::new(
            d,
            vec![Atom {
                w: 1.0,
                u: vec![1.0; d],
            }],
        )
        .expect("dependence preset is valid")
    }

    /// Convex mixture: weight theta on the diagonal, 1 - theta on each axis.
    pub fn mixture(d: usize, theta: f64) -> Result<Self> {
        if !(0.0 < theta && theta < 1.0) {
            return Err(Error::Parameter(format!(
                "mixture weight must lie in (0, 1), got {theta}"
            )));
        }
        let mut atoms = vec![Atom {
            w: theta,
            u: vec![1.0; d],
        }];
        for j in 0..d {
            let mut u = vec![0.0; d];
            u[j] = 1.0;
            atoms.push(Atom { w: 1.0 - theta, u });
        }
        Self::new(d, atoms)
    }

    /// Preset by name: `independence`, `dependence`, or `mixture:<theta>`.
    pub fn preset(name: &str, d: usize) -> Result<Self> {
        match name {
            "independence" => Ok(Self::independence(d)),
            "dependence" => Ok(Self::dependence(d)),
            _ => {
                if let Some(t) = name.strip_prefix("mixture:") {
                    let theta: f64 = t
                        .parse()
                        .map_err(|_| Error::Parameter(format!("bad mixture weight `{t}`")))?;
                    Self::mixture(d, theta)
                } else {
                    Err(Error::Parameter(format!("unknown preset `{name}`")))
                }
            }
        }
    }
}

/// Tail of the exponent measure, a nonnegative extended real. The tail is
/// infinite exactly when some coordinate of the query point is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExponentTail {
    Finite(f64),
    Infinite,
}

impl ExponentTail {
    pub fn value(&self) -> f64 {
        match self {
            ExponentTail::Finite(v) => *v,
            ExponentTail::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExponentTail::Finite(_))
    }
}

/// Marginal family of a max-stable law, determined by the sign of alpha.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Frechet,
    Gumbel,
    Weibull,
}

/// A d-variate max-stable law with standardized margins: Fréchet(alpha)
/// for alpha > 0, standard Gumbel for alpha = 0, Weibull for alpha < 0.
/// Dependence is carried by the angular measure of the alpha = 1 conjugate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxStableLaw {
    pub alpha: f64,
    pub nu: AngularMeasure,
}

impl MaxStableLaw {
    pub fn new(alpha: f64, nu: AngularMeasure) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::Parameter(format!("alpha must be finite, got {alpha}")));
        }
        Ok(Self { alpha, nu })
    }

    pub fn branch(&self) -> Branch {
        if self.alpha > 0.0 {
            Branch::Frechet
        } else if self.alpha == 0.0 {
            Branch::Gumbel
        } else {
            Branch::Weibull
        }
    }

    pub fn d(&self) -> usize {
        self.nu.d()
    }

    /// Monotone marginal map onto the alpha = 1 (unit Fréchet) scale.
    /// Points outside the branch support map to the boundary.
    pub fn to_frechet_scale(&self, xj: f64) -> f64 {
        match self.branch() {
            Branch::Frechet => {
                if xj <= 0.0 {
                    0.0
                } else {
                    xj.powf(self.alpha)
                }
            }
            Branch::Gumbel => xj.exp(),
            Branch::Weibull => {
                if xj >= 0.0 {
                    f64::INFINITY
                } else {
                    (-xj).powf(self.alpha)
                }
            }
        }
    }

    /// Inverse of [`MaxStableLaw::to_frechet_scale`] on (0, inf).
    pub fn from_frechet_scale(&self, z: f64) -> f64 {
        match self.branch() {
            Branch::Frechet => z.powf(1.0 / self.alpha),
            Branch::Gumbel => z.ln(),
            Branch::Weibull => -z.powf(1.0 / self.alpha),
        }
    }

    /// Cumulative distribution function at `x`.
    pub fn cdf(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.d() {
            return Err(Error::Domain(format!(
                "point has dimension {}, law has dimension {}",
                x.len(),
                self.d()
            )));
        }
        let z: Vec<f64> = x.iter().map(|&xj| self.to_frechet_scale(xj)).collect();
        if z.iter().any(|&zj| zj == 0.0) {
            return Ok(0.0);
        }
        Ok((-frechet_scale_tail(&self.nu, &z)).exp())
    }
}

/// Exponent measure tail on the unit Fréchet scale: the mass of the
/// complement of [0, z].
fn frechet_scale_tail(nu: &AngularMeasure, z: &[f64]) -> f64 {
    nu.atoms()
        .iter()
        .map(|a| {
            a.w * a
                .u
                .iter()
                .zip(z.iter())
                .map(|(&uj, &zj)| uj / zj)
                .fold(0.0_f64, f64::max)
        })
        .sum()
}

/// Tail mass of the exponent measure outside [0, x] for a Fréchet-branch
/// law (alpha > 0). Errs on points with a negative coordinate; returns
/// `Infinite` when some coordinate is zero.
pub fn exponent_tail(law: &MaxStableLaw, x: &[f64]) -> Result<ExponentTail> {
    if law.alpha <= 0.0 {
        return Err(Error::Parameter(
            "exponent_tail requires the Fréchet branch (alpha > 0)".into(),
        ));
    }
    if x.len() != law.d() {
        return Err(Error::Domain(format!(
            "point has dimension {}, law has dimension {}",
            x.len(),
            law.d()
        )));
    }
    if x.iter().any(|&xj| xj < 0.0 || !xj.is_finite()) {
        return Err(Error::Domain(
            "exponent_tail needs finite nonnegative coordinates".into(),
        ));
    }
    if x.iter().any(|&xj| xj == 0.0) {
        return Ok(ExponentTail::Infinite);
    }
    let z: Vec<f64> = x.iter().map(|&xj| xj.powf(law.alpha)).collect();
    Ok(ExponentTail::Finite(frechet_scale_tail(&law.nu, &z)))
}

/// Relative residual of the homogeneity relation: scaling the set [0, x]
/// by t^(1/alpha) divides the tail by t.
pub fn homogeneity_check(law: &MaxStableLaw, x: &[f64], t: f64) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::Parameter(format!("t must be positive, got {t}")));
    }
    let s = t.powf(1.0 / law.alpha);
    let scaled: Vec<f64> = x.iter().map(|&xj| s * xj).collect();
    let lhs = exponent_tail(law, &scaled)?;
    let rhs = exponent_tail(law, x)?;
    match (lhs, rhs) {
        (ExponentTail::Finite(l), ExponentTail::Finite(r)) => {
            let want = r / t;
            Ok((l - want).abs() / want.abs().max(f64::MIN_POSITIVE))
        }
        (ExponentTail::Infinite, ExponentTail::Infinite) => Ok(0.0),
        _ => Ok(f64::INFINITY),
    }
}
