//! Noncentral chi-squared tails as a Poisson mixture of central tails.
//!
//! `F(x; k, λ) = Σ_l Pois(l; λ/2)·F(x; k+2l)`. The sum starts at the modal
//! index `⌊λ/2⌋` and walks outward in both directions, so nothing underflows
//! for large λ. Along the walk the central tails are advanced with the step
//! identity `Q(x; k+2) = Q(x; k) + (x/2)^{k/2} e^{−x/2} / Γ(k/2+1)` instead of
//! fresh incomplete-gamma evaluations.

use super::chi2::{chi2_sf, Dof};
use super::gamma::{dpois_raw, gamma_q, ln_dpois_raw, ln_gamma_p, ln_gamma_q};
use super::normal::normal_sf;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Relative weight below which the mixture walk stops.
const WEIGHT_CUTOFF: f64 = 1e-16;
const MAX_TERMS: usize = 1_000_000;

/// Evaluation method for the noncentral tail.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NcMethod {
    /// Poisson mixture, accurate to about 1e-13 absolute.
    #[default]
    Series,
    /// Sankaran's normal approximation. Cheap but only about 1e-3 accurate;
    /// intended for `k + λ` well above 1e5.
    Sankaran,
}

/// Survival value plus bookkeeping of the mixture walk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NcSeries<T> {
    pub value: T,
    /// Sum of the Poisson weights visited; 1 up to truncation.
    pub weight_sum: T,
    pub terms: usize,
}

fn check_inputs<T: Real>(func: &'static str, x: T, lambda: T) -> Result<()> {
    if !(x >= T::zero()) {
        return Err(Error::domain(func, format!("x = {x} must be non-negative")));
    }
    if !(lambda >= T::zero()) || !lambda.is_finite() {
        return Err(Error::domain(
            func,
            format!("noncentrality {lambda} must be finite and non-negative"),
        ));
    }
    Ok(())
}

/// Right tail `P(χ'²_k(λ) > x)`.
pub fn nc_chi2_sf<T: Real>(x: T, k: Dof, lambda: T) -> Result<T> {
    nc_chi2_sf_series(x, k, lambda).map(|s| s.value)
}

pub fn nc_chi2_sf_with<T: Real>(x: T, k: Dof, lambda: T, method: NcMethod) -> Result<T> {
    match method {
        NcMethod::Series => nc_chi2_sf(x, k, lambda),
        NcMethod::Sankaran => nc_chi2_sf_sankaran(x, k, lambda),
    }
}

/// Mixture evaluation exposing the weight bookkeeping.
pub fn nc_chi2_sf_series<T: Real>(x: T, k: Dof, lambda: T) -> Result<NcSeries<T>> {
    check_inputs("nc_chi2_sf", x, lambda)?;
    if lambda == T::zero() {
        return Ok(NcSeries {
            value: chi2_sf(x, k)?,
            weight_sum: T::one(),
            terms: 1,
        });
    }
    if x == T::zero() {
        return Ok(NcSeries {
            value: T::one(),
            weight_sum: T::one(),
            terms: 0,
        });
    }
    let half = T::lit(0.5);
    let mean = lambda * half;
    let xh = x * half;
    let a0: T = k.half();
    let cutoff = T::lit(WEIGHT_CUTOFF);

    let mode = mean.floor();
    let w_mode = dpois_raw(mode, mean);
    let sf_mode = gamma_q(a0 + mode, xh)?;
    let mut total = w_mode * sf_mode;
    let mut weight_sum = w_mode;
    let mut terms = 1;

    // Upward: l = mode+1, mode+2, ...
    let (mut l, mut w, mut sf) = (mode, w_mode, sf_mode);
    for _ in 0..MAX_TERMS {
        sf = (sf + dpois_raw(a0 + l, xh)).min(T::one());
        l += T::one();
        w *= mean / l;
        total += w * sf;
        weight_sum += w;
        terms += 1;
        if w < cutoff * weight_sum {
            break;
        }
    }

    // Downward: l = mode-1, ..., 0
    let (mut l, mut w, mut sf) = (mode, w_mode, sf_mode);
    while l > T::zero() && terms < MAX_TERMS {
        w *= l / mean;
        l -= T::one();
        sf = (sf - dpois_raw(a0 + l, xh)).max(T::zero());
        total += w * sf;
        weight_sum += w;
        terms += 1;
        if w < cutoff * weight_sum {
            break;
        }
    }

    Ok(NcSeries {
        value: total.min(T::one()).max(T::zero()),
        weight_sum,
        terms,
    })
}

/// `ln P(χ'²_k(λ) ≤ x)` by log-sum-exp over the mixture.
///
/// Each central term is evaluated directly in the log domain, so the result
/// stays finite and strictly ordered where the plain CDF underflows. Slower
/// than [`nc_chi2_sf`]; meant for diagnostics and tail work.
pub fn nc_chi2_ln_cdf<T: Real>(x: T, k: Dof, lambda: T) -> Result<T> {
    check_inputs("nc_chi2_ln_cdf", x, lambda)?;
    if x == T::zero() {
        return Ok(T::neg_infinity());
    }
    let direct = ln_mixture(x, k, lambda, ln_gamma_p, false)?;
    complement_if_dominant(direct, || ln_mixture(x, k, lambda, ln_gamma_q, true))
}

/// Chernoff bound on `ln P(χ'²_k(λ) ≤ x)`, in closed form.
///
/// `P(X ≤ x) ≤ e^{tx}·E[e^{−tX}]` for every `t ≥ 0`. With `u = 1 + 2t` the
/// optimum solves `x·u² − k·u − λ = 0`. Returns 0 when `x` is at or above
/// the mean, where the bound is trivial.
pub fn nc_chi2_ln_cdf_bound<T: Real>(x: T, k: Dof, lambda: T) -> Result<T> {
    check_inputs("nc_chi2_ln_cdf_bound", x, lambda)?;
    if x == T::zero() {
        return Ok(T::neg_infinity());
    }
    let two = T::lit(2.0);
    let kf = two * k.half::<T>();
    let u = (kf + (kf * kf + T::lit(4.0) * x * lambda).sqrt()) / (two * x);
    if u <= T::one() {
        return Ok(T::zero());
    }
    let t = (u - T::one()) / two;
    Ok((t * x - kf / two * u.ln() - lambda * t / u).min(T::zero()))
}

/// `ln P(χ'²_k(λ) > x)`, the upper-tail counterpart of [`nc_chi2_ln_cdf`].
pub fn nc_chi2_ln_sf<T: Real>(x: T, k: Dof, lambda: T) -> Result<T> {
    check_inputs("nc_chi2_ln_sf", x, lambda)?;
    if x == T::zero() {
        return Ok(T::zero());
    }
    let direct = ln_mixture(x, k, lambda, ln_gamma_q, true)?;
    complement_if_dominant(direct, || ln_mixture(x, k, lambda, ln_gamma_p, false))
}

/// A tail above one half is a sum of terms near one whose log carries
/// `O(n·ε)` rounding. There `ln(1 − other)` is exact to working precision.
fn complement_if_dominant<T: Real>(direct: T, other: impl FnOnce() -> Result<T>) -> Result<T> {
    if direct <= -T::LN_2() {
        return Ok(direct);
    }
    Ok((-other()?.exp()).ln_1p())
}

/// `ln Σ_l Pois(l; λ/2)·central(k/2 + l, x/2)` where `central` is a log
/// regularized gamma tail that grows with `l` when `grows_with_l`.
fn ln_mixture<T: Real>(
    x: T,
    k: Dof,
    lambda: T,
    central: fn(T, T) -> Result<T>,
    grows_with_l: bool,
) -> Result<T> {
    let half = T::lit(0.5);
    let mean = lambda * half;
    let xh = x * half;
    let a0: T = k.half();
    let mode = mean.floor();
    let ln_cut = T::lit(WEIGHT_CUTOFF).ln();

    let first = ln_dpois_raw(mode, mean) + central(a0 + mode, xh)?;
    let mut logs = vec![first];
    let mut peak = first;
    // Walking away from the mode the weights shrink. If the central factor
    // shrinks too the term itself bounds the rest; otherwise the central
    // factor is at most 1 and the weight does.
    let mut walk = |l: T, central_shrinks: bool| -> Result<bool> {
        let lw = ln_dpois_raw(l, mean);
        let t = lw + central(a0 + l, xh)?;
        logs.push(t);
        peak = peak.max(t);
        let bound = if central_shrinks { t } else { lw };
        Ok(bound < peak + ln_cut)
    };
    let mut l = mode;
    for _ in 0..MAX_TERMS {
        l += T::one();
        if walk(l, !grows_with_l)? {
            break;
        }
    }
    let mut l = mode;
    while l > T::zero() {
        l -= T::one();
        if walk(l, grows_with_l)? {
            break;
        }
    }
    if peak == T::neg_infinity() {
        return Ok(peak);
    }
    let s: T = logs.iter().map(|&t| (t - peak).exp()).sum();
    Ok((peak + s.ln()).min(T::zero()))
}

/// Sankaran's cube-root normal approximation to the noncentral tail.
pub fn nc_chi2_sf_sankaran<T: Real>(x: T, k: Dof, lambda: T) -> Result<T> {
    check_inputs("nc_chi2_sf_sankaran", x, lambda)?;
    let kf = T::from_usize_lossy(k.get() as usize);
    let one = T::one();
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let kl = kf + lambda;
    let k2l = kf + two * lambda;
    let h = one - two / T::lit(3.0) * kl * (kf + T::lit(3.0) * lambda) / (k2l * k2l);
    let p = k2l / (kl * kl);
    let m = (h - one) * (one - T::lit(3.0) * h);
    let centre = one + h * p * (h - one - half * (two - h) * m * p);
    let spread = h * (two * p).sqrt() * (one + half * m * p);
    let z = ((x / kl).powf(h) - centre) / spread;
    Ok(normal_sf(z))
}
