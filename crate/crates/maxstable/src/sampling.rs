//! Exact samplers.
//!
//! Scalar laws are sampled by inversion. Multivariate max-stable vectors
//! are sampled by the LePage series: a unit-rate Poisson arrival sequence
//! drives the radii, directions are drawn from the normalized angular
//! measure, and the running component-wise maximum is returned once the
//! next radius can no longer change any coordinate. Because directions lie
//! on the sup-norm sphere, that stopping rule is exact, not a truncation.

use crate::error::{Error, Result};
use crate::measures::{Branch, MaxStableLaw};
use crate::rng::unit_open;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

/// Fréchet(alpha, sigma) by inversion: sigma (-ln U)^(-1/alpha).
pub fn sample_frechet(alpha: f64, sigma: f64, rng: &mut ChaCha8Rng) -> f64 {
    sigma * (-unit_open(rng).ln()).powf(-1.0 / alpha)
}

/// Standard Gumbel by inversion: -ln(-ln U).
pub fn sample_gumbel(rng: &mut ChaCha8Rng) -> f64 {
    -(-unit_open(rng).ln()).ln()
}

/// Weibull branch (alpha < 0) by inversion: -(-ln U)^(-1/alpha), supported
/// on the negative half-line with cdf exp(-(-x)^(-alpha)).
pub fn sample_weibull(alpha: f64, rng: &mut ChaCha8Rng) -> Result<f64> {
    if alpha >= 0.0 {
        return Err(Error::Parameter(format!(
            "the Weibull branch needs alpha < 0, got {alpha}"
        )));
    }
    Ok(-(-unit_open(rng).ln()).powf(-1.0 / alpha))
}

/// Pareto(alpha) on [1, inf) by inversion: U^(-1/alpha).
pub fn sample_pareto(alpha: f64, rng: &mut ChaCha8Rng) -> f64 {
    unit_open(rng).powf(-1.0 / alpha)
}

/// One point of the LePage series.
#[derive(Debug, Clone, PartialEq)]
pub struct LePagePoint {
    /// Radius after the marginal transform, i.e. r^(1/alpha) on the
    /// original scale is applied through the direction.
    pub radius: f64,
    /// Index of the angular atom that was drawn.
    pub atom: usize,
}

/// The Poisson points a LePage draw consumed, for diagnostics.
#[derive(Debug, Clone, Default)]
pub struct LePageRealization {
    pub points: Vec<LePagePoint>,
}

const LEPAGE_MAX_POINTS: usize = 1_000_000;

/// Draw Z ~ MS(alpha, nu) on the Fréchet branch (alpha > 0).
pub fn sample_max_stable(law: &MaxStableLaw, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    sample_max_stable_traced(law, rng, None)
}

/// As [`sample_max_stable`], optionally recording the consumed points.
pub fn sample_max_stable_traced(
    law: &MaxStableLaw,
    rng: &mut ChaCha8Rng,
    mut trace: Option<&mut LePageRealization>,
) -> Result<Vec<f64>> {
    if law.alpha <= 0.0 {
        // Gumbel and Weibull branches are marginal transforms of the
        // alpha = 1 draw.
        let unit = MaxStableLaw::new(1.0, law.nu.clone())?;
        let z = sample_max_stable_traced(&unit, rng, trace)?;
        return Ok(z.iter().map(|&zj| law.from_frechet_scale(zj)).collect());
    }
    let nu = &law.nu;
    let d = nu.d();
    let m = nu.total_mass();
    let inv_alpha = 1.0 / law.alpha;
    let cum: Vec<f64> = nu
        .atoms()
        .iter()
        .scan(0.0, |acc, a| {
            *acc += a.w;
            Some(*acc)
        })
        .collect();

    let mut z = vec![0.0_f64; d];
    let mut gamma = 0.0_f64;
    for _ in 0..LEPAGE_MAX_POINTS {
        gamma += -unit_open(rng).ln();
        let r = (gamma / m).powf(-inv_alpha);
        // Radii decrease; once r cannot beat the smallest coordinate the
        // remaining points are dominated and the maximum is final.
        if r <= z.iter().cloned().fold(f64::INFINITY, f64::min) {
            return Ok(z);
        }
        let pick = m * unit_open(rng);
        let k = cum.partition_point(|&c| c < pick).min(cum.len() - 1);
        if let Some(t) = trace.as_deref_mut() {
            t.points.push(LePagePoint { radius: r, atom: k });
        }
        for (zj, &uj) in z.iter_mut().zip(nu.atoms()[k].u.iter()) {
            if uj > 0.0 {
                *zj = zj.max(r * uj.powf(inv_alpha));
            }
        }
    }
    Err(Error::Domain(
        "LePage series failed to terminate; check alpha and the measure".into(),
    ))
}

/// Draw from a max-stable law whose angular measure is given only through
/// a direction sampler (continuous spectral measures). The moment
/// constraint is the caller's responsibility.
pub fn sample_max_stable_with<F>(
    d: usize,
    alpha: f64,
    total_mass: f64,
    mut direction: F,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>>
where
    F: FnMut(&mut ChaCha8Rng) -> Vec<f64>,
{
    if alpha <= 0.0 || total_mass <= 0.0 {
        return Err(Error::Parameter(
            "need alpha > 0 and positive total mass".into(),
        ));
    }
    let inv_alpha = 1.0 / alpha;
    let mut z = vec![0.0_f64; d];
    let mut gamma = 0.0_f64;
    for _ in 0..LEPAGE_MAX_POINTS {
        gamma += -unit_open(rng).ln();
        let r = (gamma / total_mass).powf(-inv_alpha);
        if r <= z.iter().cloned().fold(f64::INFINITY, f64::min) {
            return Ok(z);
        }
        let u = direction(rng);
        debug_assert_eq!(u.len(), d);
        for (zj, &uj) in z.iter_mut().zip(u.iter()) {
            if uj > 0.0 {
                *zj = zj.max(r * uj.powf(inv_alpha));
            }
        }
    }
    Err(Error::Domain(
        "LePage series failed to terminate; check alpha and the mass".into(),
    ))
}

/// A nonnegative step function on [0, T], constant on [bounds[i], bounds[i+1]).
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    bounds: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(bounds: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if bounds.len() != values.len() + 1 || values.is_empty() {
            return Err(Error::Parameter(
                "need n+1 bounds for n step values, n >= 1".into(),
            ));
        }
        if bounds.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter("bounds must be strictly increasing".into()));
        }
        if values.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::Parameter("step values must be finite and >= 0".into()));
        }
        Ok(Self { bounds, values })
    }

    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values
            .iter()
            .zip(self.bounds.windows(2))
            .map(|(&v, w)| (v, w[1] - w[0]))
    }

    /// The alpha-th power of the L^alpha norm: sum of v^alpha * length.
    pub fn lalpha_power(&self, alpha: f64) -> f64 {
        self.pieces()
            .map(|(v, len)| if v == 0.0 { 0.0 } else { v.powf(alpha) * len })
            .sum()
    }

    /// Pointwise max with a scaled copy of another step on the same grid.
    pub fn max_with(&self, scale_self: f64, other: &Self, scale_other: f64) -> Result<Self> {
        if self.bounds != other.bounds {
            return Err(Error::Parameter("step functions must share a grid".into()));
        }
        let values = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(&a, &b)| (scale_self * a).max(scale_other * b))
            .collect();
        Self::new(self.bounds.clone(), values)
    }
}

/// Extremal integral of a step function against independently scattered
/// alpha-Fréchet noise: the max over pieces of a_i M(A_i), where M(A_i) is
/// Fréchet(alpha, |A_i|^(1/alpha)). Pieces are consumed in grid order, so
/// two integrals on the same grid driven by the same generator state share
/// their noise draws.
pub fn sample_extremal_integral(
    step: &StepFunction,
    alpha: f64,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    if alpha <= 0.0 {
        return Err(Error::Parameter("extremal integrals need alpha > 0".into()));
    }
    let mut out = 0.0_f64;
    for (v, len) in step.pieces() {
        let noise = sample_frechet(alpha, len.powf(1.0 / alpha), rng);
        out = out.max(v * noise);
    }
    Ok(out)
}

/// Points of a Poisson random measure on [0, T] x (cutoff, inf) with
/// intensity ds x alpha r^(-alpha-1) dr.
#[derive(Debug, Clone, Default)]
pub struct SupMeasurePoints {
    /// (time, radius) pairs, unsorted.
    pub points: Vec<(f64, f64)>,
    pub cutoff: f64,
    pub horizon: f64,
}

pub fn sample_sup_measure_points(
    horizon: f64,
    alpha: f64,
    cutoff: f64,
    rng: &mut ChaCha8Rng,
) -> Result<SupMeasurePoints> {
    if horizon <= 0.0 || alpha <= 0.0 || cutoff <= 0.0 {
        return Err(Error::Parameter(
            "need positive horizon, alpha and cutoff".into(),
        ));
    }
    let mean = horizon * cutoff.powf(-alpha);
    let pois = Poisson::new(mean)
        .map_err(|e| Error::Parameter(format!("invalid Poisson mean {mean}: {e}")))?;
    let n = pois.sample(rng) as usize;
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let s = horizon * unit_open(rng);
        // Radius above the cutoff: Pareto(alpha) scaled by the cutoff.
        let r = cutoff * unit_open(rng).powf(-1.0 / alpha);
        points.push((s, r));
    }
    Ok(SupMeasurePoints {
        points,
        cutoff,
        horizon,
    })
}

/// Evaluate a max-id functional max_i f(x_i) over a point configuration.
/// An empty configuration returns the neutral element and a flag.
pub fn sample_max_id_functional(points: &[Vec<f64>], f: &crate::catalog::FieldD) -> (f64, bool) {
    if points.is_empty() {
        return (f64::NEG_INFINITY, true);
    }
    let v = points
        .iter()
        .map(|p| f.eval(p))
        .fold(f64::NEG_INFINITY, f64::max);
    (v, false)
}

/// Draw Z on the original branch scale for any alpha (Gumbel and Weibull
/// are marginal transforms of the Fréchet branch draw).
pub fn sample_branch(law: &MaxStableLaw, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    match law.branch() {
        Branch::Frechet => sample_max_stable(law, rng),
        _ => {
            let unit = MaxStableLaw::new(1.0, law.nu.clone())?;
            let z = sample_max_stable(&unit, rng)?;
            Ok(z.iter().map(|&zj| law.from_frechet_scale(zj)).collect())
        }
    }
}

/// Convenience: univariate Fréchet-branch law draw as a scalar.
pub fn sample_scalar(law: &MaxStableLaw, rng: &mut ChaCha8Rng) -> Result<f64> {
    Ok(sample_max_stable(law, rng)?[0])
}
