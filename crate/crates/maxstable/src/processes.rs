//! Path simulation.
//!
//! Two constructions of the stationary Fréchet-branch process are
//! provided. The Markov recursion applies the exact one-step transition
//! on a time grid. The pointwise construction realizes the process from a
//! Poisson field of (time, radius) points with the radii truncated at a
//! cutoff; the probability that the truncation discarded a point that
//! would have shown through is bounded explicitly via the deterministic
//! lower envelope e^(-t/alpha) x0 of the path.

use crate::error::{Error, Result};
use crate::measures::MaxStableLaw;
use crate::rng::RngSpec;
use crate::sampling::{sample_frechet, sample_max_stable, sample_sup_measure_points};
use serde::Serialize;

/// A simulated path on a fixed time grid.
#[derive(Debug, Clone, Serialize)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub alpha: f64,
    pub x0: f64,
    pub rng: RngSpec,
}

fn check_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Parameter("empty time grid".into()));
    }
    if times[0] < 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter(
            "time grid must be nonnegative and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Uniform grid 0, T/n, ..., T.
pub fn uniform_grid(horizon: f64, steps: usize) -> Vec<f64> {
    (0..=steps)
        .map(|i| horizon * i as f64 / steps as f64)
        .collect()
}

/// Stationary Fréchet-branch process started at x0, by exact one-step
/// transitions: over a step of length dt the state contracts by
/// e^(-dt/alpha) and competes with an independently scaled stationary
/// draw. The law of the path is exact on the grid for any step sizes.
pub fn simulate_frechet_process(
    law: &MaxStableLaw,
    x0: f64,
    times: &[f64],
    spec: RngSpec,
) -> Result<PathSample> {
    if law.alpha <= 0.0 {
        return Err(Error::Parameter("need the Fréchet branch".into()));
    }
    if law.d() != 1 {
        return Err(Error::Parameter("path simulation is univariate".into()));
    }
    if x0 <= 0.0 {
        return Err(Error::Domain("need x0 > 0".into()));
    }
    check_grid(times)?;
    let alpha = law.alpha;
    let mut rng = spec.rng();
    let mut values = Vec::with_capacity(times.len());
    let mut x = if times[0] == 0.0 {
        x0
    } else {
        step(law, x0, times[0], alpha, &mut rng)?
    };
    values.push(x);
    for w in times.windows(2) {
        x = step(law, x, w[1] - w[0], alpha, &mut rng)?;
        values.push(x);
    }
    Ok(PathSample {
        times: times.to_vec(),
        values,
        alpha,
        x0,
        rng: spec,
    })
}

fn step(
    law: &MaxStableLaw,
    x: f64,
    dt: f64,
    alpha: f64,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<f64> {
    let z = sample_max_stable(law, rng)?[0];
    Ok(((-dt / alpha).exp() * x).max((1.0 - (-dt).exp()).powf(1.0 / alpha) * z))
}

/// The same process realized from its Poisson representation: points
/// (s_i, r_i) on [0, T] x (cutoff, inf) with intensity ds x alpha
/// r^(-alpha-1) dr, and
///
/// ```text
/// X_t = e^(-t/alpha) x0  max  max over s_i <= t of e^(-(t-s_i)/alpha) r_i.
/// ```
///
/// Returns the path and an upper bound on the probability that a discarded
/// point (radius below the cutoff) would have appeared in the path; the
/// call is rejected if that bound exceeds `omission_level`.
pub fn simulate_frechet_process_pointwise(
    alpha: f64,
    x0: f64,
    times: &[f64],
    cutoff: f64,
    omission_level: f64,
    spec: RngSpec,
) -> Result<(PathSample, f64)> {
    if alpha <= 0.0 || x0 <= 0.0 || cutoff <= 0.0 {
        return Err(Error::Parameter(
            "need alpha, x0 and cutoff positive".into(),
        ));
    }
    check_grid(times)?;
    let horizon = *times.last().unwrap();
    // A discarded point (radius <= cutoff) can only show through if it
    // beats the deterministic envelope e^(-T/alpha) x0; the expected number
    // of such points bounds the omission probability.
    let envelope = (-horizon / alpha).exp() * x0;
    let bound = if cutoff <= envelope {
        0.0
    } else {
        horizon * (envelope.powf(-alpha) - cutoff.powf(-alpha))
    };
    if bound > omission_level {
        return Err(Error::CutoffTooCoarse {
            bound,
            level: omission_level,
        });
    }
    let mut rng = spec.rng();
    let field = sample_sup_measure_points(horizon, alpha, cutoff, &mut rng)?;
    let values = times
        .iter()
        .map(|&t| {
            let mut x = (-t / alpha).exp() * x0;
            for &(s, r) in &field.points {
                if s <= t {
                    x = x.max((-(t - s) / alpha).exp() * r);
                }
            }
            x
        })
        .collect();
    Ok((
        PathSample {
            times: times.to_vec(),
            values,
            alpha,
            x0,
            rng: spec,
        },
        bound,
    ))
}

/// Max-stable motion: the independent-increments process with
/// Z_0 = 0 and Z_(t+dt) = Z_t max (dt)^(1/alpha) F, F ~ Fréchet(alpha, 1),
/// so that Z_t ~ Fréchet(alpha, t^(1/alpha)).
pub fn simulate_max_stable_motion(alpha: f64, times: &[f64], spec: RngSpec) -> Result<PathSample> {
    if alpha <= 0.0 {
        return Err(Error::Parameter("need alpha > 0".into()));
    }
    check_grid(times)?;
    let mut rng = spec.rng();
    let mut values = Vec::with_capacity(times.len());
    let mut z = if times[0] == 0.0 {
        0.0
    } else {
        sample_frechet(alpha, times[0].powf(1.0 / alpha), &mut rng)
    };
    values.push(z);
    for w in times.windows(2) {
        let inc = sample_frechet(alpha, (w[1] - w[0]).powf(1.0 / alpha), &mut rng);
        z = z.max(inc);
        values.push(z);
    }
    Ok(PathSample {
        times: times.to_vec(),
        values,
        alpha,
        x0: 0.0,
        rng: spec,
    })
}

/// Default parameters of the illustrative path figure: one stationary
/// path per tail index, common start.
pub const FIGURE_ALPHAS: [f64; 4] = [0.5, 1.0, 2.0, 4.0];
pub const FIGURE_X0: f64 = 3.0;

/// Rows (alpha, t, x) for the path figure.
pub fn figure_paths(
    horizon: f64,
    steps: usize,
    spec: RngSpec,
) -> Result<Vec<(f64, f64, f64)>> {
    let times = uniform_grid(horizon, steps);
    let mut rows = Vec::new();
    for (k, &alpha) in FIGURE_ALPHAS.iter().enumerate() {
        let law = MaxStableLaw::new(alpha, crate::measures::AngularMeasure::dependence(1))?;
        let path = simulate_frechet_process(
            &law,
            FIGURE_X0,
            &times,
            spec.with_stream(spec.stream + k as u64),
        )?;
        for (&t, &x) in path.times.iter().zip(path.values.iter()) {
            rows.push((alpha, t, x));
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::AngularMeasure;
    use crate::semigroup::transition_cdf_1d;
    use crate::stats::{ks_critical_two_sample_01, ks_two_sample};

    #[test]
    fn markov_path_is_reproducible() {
        let law = MaxStableLaw::new(1.0, AngularMeasure::dependence(1)).unwrap();
        let times = uniform_grid(2.0, 50);
        let spec = RngSpec::new(77, 0);
        let a = simulate_frechet_process(&law, 3.0, &times, spec).unwrap();
        let b = simulate_frechet_process(&law, 3.0, &times, spec).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn transition_marginal_matches_closed_form() {
        let law = MaxStableLaw::new(2.0, AngularMeasure::dependence(1)).unwrap();
        let (x0, t, z) = (3.0, 0.8, 2.5);
        let spec = RngSpec::new(13, 0);
        let n = 50_000;
        let times = vec![t];
        let mut hits = 0usize;
        for i in 0..n {
            let p =
                simulate_frechet_process(&law, x0, &times, spec.with_stream(i as u64)).unwrap();
            if p.values[0] <= z {
                hits += 1;
            }
        }
        let want = transition_cdf_1d(2.0, t, x0, z);
        let phat = hits as f64 / n as f64;
        let se = (want * (1.0 - want) / n as f64).sqrt();
        assert!((phat - want).abs() < 4.0 * se, "{phat} vs {want}");
    }

    #[test]
    fn two_constructions_agree_in_law() {
        let alpha = 1.0;
        let law = MaxStableLaw::new(alpha, AngularMeasure::dependence(1)).unwrap();
        let t = 1.5;
        let times = vec![t];
        let n = 4000;
        let mut markov = Vec::with_capacity(n);
        let mut pointwise = Vec::with_capacity(n);
        for i in 0..n {
            markov.push(
                simulate_frechet_process(&law, 3.0, &times, RngSpec::new(5, i as u64))
                    .unwrap()
                    .values[0],
            );
            let (p, _) = simulate_frechet_process_pointwise(
                alpha,
                3.0,
                &times,
                0.05,
                1e-6,
                RngSpec::new(6, i as u64),
            )
            .unwrap();
            pointwise.push(p.values[0]);
        }
        let d = ks_two_sample(&markov, &pointwise);
        assert!(d < ks_critical_two_sample_01(n, n), "KS statistic {d}");
    }

    #[test]
    fn pointwise_rejects_coarse_cutoff() {
        let err = simulate_frechet_process_pointwise(
            1.0,
            3.0,
            &[5.0],
            3.0,
            1e-6,
            RngSpec::new(1, 0),
        )
        .unwrap_err();
        assert!(matches!(err, Error::CutoffTooCoarse { .. }));
    }

    #[test]
    fn motion_marginal_scale() {
        // Z_t ~ Fréchet(alpha, t^(1/alpha)): P(Z_t <= z) = exp(-t z^-alpha).
        let alpha = 2.0;
        let times = uniform_grid(2.0, 4);
        let n = 50_000;
        let z = 1.8;
        let mut hits = 0usize;
        for i in 0..n {
            let p = simulate_max_stable_motion(alpha, &times, RngSpec::new(9, i as u64)).unwrap();
            if *p.values.last().unwrap() <= z {
                hits += 1;
            }
        }
        let want = (-2.0 * z.powf(-alpha)).exp();
        let phat = hits as f64 / n as f64;
        let se = (want * (1.0 - want) / n as f64).sqrt();
        assert!((phat - want).abs() < 4.0 * se, "{phat} vs {want}");
    }

    #[test]
    fn motion_paths_are_nondecreasing() {
        let p = simulate_max_stable_motion(0.5, &uniform_grid(3.0, 100), RngSpec::new(2, 0))
            .unwrap();
        assert!(p.values.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn figure_rows_cover_all_alphas() {
        let rows = figure_paths(5.0, 200, RngSpec::new(44, 0)).unwrap();
        assert_eq!(rows.len(), 4 * 201);
        for &alpha in FIGURE_ALPHAS.iter() {
            assert!(rows.iter().any(|r| r.0 == alpha));
        }
        // Every path starts at the common start value.
        for &alpha in FIGURE_ALPHAS.iter() {
            let first = rows.iter().find(|r| r.0 == alpha && r.1 == 0.0).unwrap();
            assert_eq!(first.2, FIGURE_X0);
        }
    }
}
