//! Monte Carlo trial engine for empirical false-alarm and detection rates.
//!
//! Trial `i` draws from its own stream keyed by `(seed, i)`, so hit counts
//! do not depend on how rayon schedules the work.

use rayon::prelude::*;
use serde::Serialize;

use crate::detector::Glrt;
use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};
use crate::scalar::Real;
use crate::sounding::{Hypothesis, InterferenceMode, WhitenedModel};

/// Two-sided 99% standard normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_901;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialReport {
    pub n_trials: u64,
    pub hits: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub hypothesis: &'static str,
    pub mode: &'static str,
    pub seed: u64,
}

impl TrialReport {
    pub fn contains(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }
}

/// Wilson score interval for `hits` successes out of `n`.
pub fn wilson_interval(hits: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Clone, Copy, Debug)]
pub struct TrialSettings {
    pub hypothesis: Hypothesis,
    pub mode: InterferenceMode,
    pub n_trials: u64,
    pub seed: u64,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

/// Runs `n_trials` independent draws and counts statistics above `gamma_prime`.
pub fn run_trials<T: Real>(model: &WhitenedModel<T>, settings: TrialSettings, gamma_prime: T) -> Result<TrialReport> {
    run_trials_mixture(std::slice::from_ref(model), settings, gamma_prime)
}

/// Like [`run_trials`], with trial `i` drawn from `models[i mod len]`. The
/// hit rate then estimates the P_D averaged over the models.
pub fn run_trials_mixture<T: Real>(
    models: &[WhitenedModel<T>],
    settings: TrialSettings,
    gamma_prime: T,
) -> Result<TrialReport> {
    if settings.n_trials == 0 {
        return Err(Error::invalid("trials", "must be at least 1"));
    }
    if models.is_empty() {
        return Err(Error::invalid("realizations", "no models to simulate"));
    }
    let detectors = models.iter().map(Glrt::new).collect::<Result<Vec<_>>>()?;
    let count = || -> Result<u64> {
        (0..settings.n_trials)
            .into_par_iter()
            .map(|trial| {
                let which = (trial % models.len() as u64) as usize;
                let mut rng = stream(settings.seed, Purpose::Trials, trial);
                let y = models[which].simulate_received(settings.hypothesis, settings.mode, &mut rng)?;
                Ok(u64::from(detectors[which].decide(&y, gamma_prime)?.decision))
            })
            .try_reduce(|| 0, |a, b| Ok(a + b))
    };
    let hits = match settings.workers {
        None => count()?,
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::invalid("workers", e.to_string()))?
            .install(count)?,
    };
    let (ci_low, ci_high) = wilson_interval(hits, settings.n_trials, Z_99);
    Ok(TrialReport {
        n_trials: settings.n_trials,
        hits,
        rate: hits as f64 / settings.n_trials as f64,
        ci_low,
        ci_high,
        hypothesis: settings.hypothesis.name(),
        mode: settings.mode.name(),
        seed: settings.seed,
    })
}

/// `3·√(p(1−p)/n)`, the calibration allowance around an analytic rate.
pub fn calibration_bound(p: f64, n: u64) -> f64 {
    3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::{analytic_point, threshold_from_pfa};
    use crate::scenario::{RisScheme, ScenarioConfig, SPEED_OF_LIGHT};
    use crate::sounding::{ModelBuilder, WhitenerKind};
    use proptest::prelude::*;

    fn model(zeta: f64) -> WhitenedModel<f64> {
        let mut cfg = ScenarioConfig::rooftop_default();
        cfg.bs_array.count_a = 2;
        cfg.bs_array.count_b = 3;
        cfg.ris_array.count_a = 2;
        cfg.ris_array.count_b = 4;
        cfg.ue_array.count_a = 1;
        cfg.ue_array.count_b = 2;
        cfg.ue_array.spacing_a = SPEED_OF_LIGHT / cfg.carrier_hz / 2.0;
        cfg.slots_k = 3;
        ModelBuilder::new(&cfg)
            .unwrap()
            .with_zeta(zeta)
            .unwrap()
            .model(RisScheme::Random, 3, 0, WhitenerKind::RankOneCholesky)
            .unwrap()
    }

    fn settings(hypothesis: Hypothesis, n: u64, seed: u64) -> TrialSettings {
        TrialSettings {
            hypothesis,
            mode: InterferenceMode::Stochastic,
            n_trials: n,
            seed,
            workers: None,
        }
    }

    #[test]
    fn wilson_known_values() {
        let (lo, hi) = wilson_interval(500, 10_000, Z_99);
        assert!((lo - 0.04467).abs() < 1e-4 && (hi - 0.05592).abs() < 1e-4, "{lo} {hi}");
        assert_eq!(wilson_interval(0, 10, Z_99).0, 0.0);
        assert_eq!(wilson_interval(10, 10, Z_99).1, 1.0);
    }

    #[test]
    fn false_alarm_rate_calibrated() {
        let m = model(0.3);
        let g = threshold_from_pfa(0.05, m.m_u(), m.slots()).unwrap();
        let r = run_trials(&m, settings(Hypothesis::H0, 10_000, 1), g).unwrap();
        assert!(r.rate >= 0.043 && r.rate <= 0.057, "{r:?}");
        assert!(r.contains(0.05));
    }

    #[test]
    fn no_echo_h1_matches_alpha() {
        let m = model(0.0);
        let g = threshold_from_pfa(0.05, m.m_u(), m.slots()).unwrap();
        let r = run_trials(&m, settings(Hypothesis::H1, 10_000, 2), g).unwrap();
        assert!(r.contains(0.05), "{r:?}");
    }

    #[test]
    fn detection_rate_matches_analytic() {
        let m = model(0.3);
        let pt = analytic_point(&m, 0.01).unwrap();
        let n = 10_000;
        let r = run_trials(&m, settings(Hypothesis::H1, n, 3), pt.gamma_prime).unwrap();
        assert!((r.rate - pt.p_d).abs() <= calibration_bound(pt.p_d, n).max(0.005), "{r:?} vs {}", pt.p_d);
    }

    #[test]
    fn single_trial_and_zero_trials() {
        let m = model(0.3);
        let r = run_trials(&m, settings(Hypothesis::H0, 1, 4), 10.0).unwrap();
        assert!(r.rate == 0.0 || r.rate == 1.0);
        assert!(run_trials(&m, settings(Hypothesis::H0, 0, 4), 10.0).is_err());
    }

    #[test]
    fn worker_count_does_not_change_hits() {
        let m = model(0.3);
        let g = threshold_from_pfa(0.2, m.m_u(), m.slots()).unwrap();
        let hits: Vec<u64> = [1, 2, 8]
            .into_iter()
            .map(|w| {
                let s = TrialSettings {
                    workers: Some(w),
                    ..settings(Hypothesis::H0, 2_000, 77)
                };
                run_trials(&m, s, g).unwrap().hits
            })
            .collect();
        assert_eq!(hits[0], hits[1]);
        assert_eq!(hits[0], hits[2]);
    }

    proptest! {
        #[test]
        fn wilson_brackets_rate(n in 1u64..100_000, frac in 0.0..=1.0f64) {
            let hits = ((n as f64) * frac).floor() as u64;
            let (lo, hi) = wilson_interval(hits, n, Z_99);
            let p = hits as f64 / n as f64;
            prop_assert!(0.0 <= lo && lo <= p + 1e-15 && p <= hi + 1e-15 && hi <= 1.0);
        }
    }
}
