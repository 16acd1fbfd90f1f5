//! Central chi-squared distribution.

use std::fmt;

use super::gamma::{dpois_raw, gamma_p, gamma_q, ln_gamma};
use super::normal::normal_quantile;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Degrees of freedom, `k ≥ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dof(u32);

impl Dof {
    pub fn new(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("Dof::new", "degrees of freedom must be at least 1"));
        }
        Ok(Dof(k))
    }

    /// `2·M_U·K`, the detector's degrees of freedom.
    pub fn detector(m_u: usize, slots: usize) -> Result<Self> {
        let k = 2usize
            .checked_mul(m_u)
            .and_then(|v| v.checked_mul(slots))
            .and_then(|v| u32::try_from(v).ok())
            .ok_or_else(|| Error::domain("Dof::detector", "2·M_U·K overflows"))?;
        Dof::new(k)
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// `k/2`, the incomplete-gamma shape.
    pub fn half<T: Real>(self) -> T {
        T::from_usize_lossy(self.0 as usize) * T::lit(0.5)
    }

    pub fn plus(self, extra: u32) -> Self {
        Dof(self.0 + extra)
    }
}

impl fmt::Display for Dof {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

fn check_x<T: Real>(func: &'static str, x: T) -> Result<()> {
    if x >= T::zero() {
        Ok(())
    } else {
        Err(Error::domain(func, format!("x = {x} must be non-negative")))
    }
}

/// Right-tail probability `Q(k/2, x/2)`.
pub fn chi2_sf<T: Real>(x: T, k: Dof) -> Result<T> {
    check_x("chi2_sf", x)?;
    gamma_q(k.half(), x * T::lit(0.5))
}

/// `P(k/2, x/2)`.
pub fn chi2_cdf<T: Real>(x: T, k: Dof) -> Result<T> {
    check_x("chi2_cdf", x)?;
    gamma_p(k.half(), x * T::lit(0.5))
}

pub fn chi2_pdf<T: Real>(x: T, k: Dof) -> Result<T> {
    check_x("chi2_pdf", x)?;
    let a: T = k.half();
    if x == T::zero() {
        return Ok(match k.get() {
            1 => T::infinity(),
            2 => T::lit(0.5),
            _ => T::zero(),
        });
    }
    // x^{a-1} e^{-x/2} / (2^a Γ(a)) = dpois_raw(a, x/2) · a / x
    Ok(dpois_raw(a, x * T::lit(0.5)) * a / x)
}

const INVERSE_MAX_ITER: usize = 200;

/// Threshold `x` with `chi2_sf(x, k) = alpha`.
///
/// Wilson–Hilferty start, then Newton on the regularized gamma with a
/// bracketing bisection fallback. Converges to `1e-13` relative in `x`.
pub fn chi2_sf_inv<T: Real>(alpha: T, k: Dof) -> Result<T> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::domain(
            "chi2_sf_inv",
            format!("alpha = {alpha} outside (0, 1)"),
        ));
    }
    let kf = T::from_usize_lossy(k.get() as usize);
    let z = T::lit(-normal_quantile(alpha.to_f64_lossy())?);
    let c = T::lit(2.0) / (T::lit(9.0) * kf);
    let wh = kf * (T::one() - c + z * c.sqrt()).powi(3);
    let mut x = if wh > T::zero() {
        wh
    } else {
        // Deep lower quantiles at tiny k: invert P(a, x/2) ≈ (x/2)^a / Γ(a+1).
        let a: T = k.half();
        let ln_x_half = ((T::one() - alpha).ln() + ln_gamma(a + T::one())) / a;
        T::lit(2.0) * ln_x_half.exp().min(kf)
    };

    let mut lo = T::zero();
    let mut hi = T::infinity();
    let tol = T::lit(1e-13).max(T::epsilon() * T::lit(8.0));
    for _ in 0..INVERSE_MAX_ITER {
        let f = chi2_sf(x, k)? - alpha;
        if f > T::zero() {
            lo = lo.max(x);
        } else {
            hi = hi.min(x);
        }
        let slope = chi2_pdf(x, k)?;
        let mut next = if slope > T::zero() && slope.is_finite() {
            x + f / slope
        } else {
            T::nan()
        };
        if !(next > lo && next < hi) {
            next = if hi.is_finite() {
                T::lit(0.5) * (lo + hi)
            } else {
                x * T::lit(2.0) + T::one()
            };
        }
        if (next - x).abs() <= tol * next.abs() || (hi.is_finite() && hi - lo <= tol * hi) {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::NoConvergence {
        func: "chi2_sf_inv",
        iterations: INVERSE_MAX_ITER,
    })
}

/// `(F(x; k+2) − F(x; k), −(x/2)^{k/2} e^{−x/2} / Γ(k/2+1))`.
///
/// The first entry comes from two CDF evaluations, the second from the
/// closed form. They agree to rounding; the difference is negative for x > 0.
pub fn cdf_step_identity<T: Real>(x: T, k: Dof) -> Result<(T, T)> {
    if !(x > T::zero()) {
        return Err(Error::domain("cdf_step_identity", "x must be positive"));
    }
    let difference = chi2_cdf(x, k.plus(2))? - chi2_cdf(x, k)?;
    let closed_form = -dpois_raw(k.half(), x * T::lit(0.5));
    Ok((difference, closed_form))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dof(k: u32) -> Dof {
        Dof::new(k).unwrap()
    }

    #[test]
    fn two_dof_closed_forms() {
        assert!((chi2_sf(2.0f64, dof(2)).unwrap() - 0.367_879_441_171_442_3).abs() < 1e-15);
        let x = chi2_sf_inv(0.001f64, dof(2)).unwrap();
        assert!((x - 13.815_510_557_964_274).abs() < 1e-11);
        let (diff, closed) = cdf_step_identity(2.0f64, dof(2)).unwrap();
        assert!((closed + 0.367_879_441_171_442_3).abs() < 1e-15);
        assert!((diff - closed).abs() < 1e-15);
    }

    #[test]
    fn sf_at_zero_is_one() {
        for k in [1, 2, 3, 50, 2880] {
            assert_eq!(chi2_sf(0.0f64, dof(k)).unwrap(), 1.0);
        }
        assert!(chi2_sf(-1.0f64, dof(2)).is_err());
    }

    #[test]
    fn one_dof_matches_normal_tail() {
        // χ²₁ > z² ⇔ |N| > z
        for &z in &[0.5f64, 1.0, 2.0, 3.0] {
            let two_sided = 2.0 * super::super::normal::normal_sf(z);
            assert!((chi2_sf(z * z, dof(1)).unwrap() - two_sided).abs() < 1e-15);
        }
    }

    #[test]
    fn pdf_integrates_step_identity() {
        // d/dx F(x; k) = pdf; compare against a central difference.
        let k = dof(7);
        let x = 5.3f64;
        let h = 1e-5;
        let fd = (chi2_cdf(x + h, k).unwrap() - chi2_cdf(x - h, k).unwrap()) / (2.0 * h);
        assert!((fd - chi2_pdf(x, k).unwrap()).abs() < 1e-9);
        assert_eq!(chi2_pdf(0.0f64, dof(2)).unwrap(), 0.5);
    }

    #[test]
    fn median_near_mean_for_large_k() {
        for k in [500u32, 2880, 10_000] {
            let m = chi2_sf_inv(0.5f64, dof(k)).unwrap();
            let kf = k as f64;
            // median ≈ k(1 − 2/(9k))³
            assert!((m / kf - 1.0).abs() < 2.0 / kf, "k={k}");
        }
    }

    #[test]
    fn inverse_rejects_bad_alpha() {
        assert!(chi2_sf_inv(0.0f64, dof(4)).is_err());
        assert!(chi2_sf_inv(1.0f64, dof(4)).is_err());
        assert!(chi2_sf_inv(f64::NAN, dof(4)).is_err());
    }

    #[test]
    fn detector_dof() {
        assert_eq!(Dof::detector(16, 90).unwrap().get(), 2880);
        assert!(Dof::new(0).is_err());
    }

    #[test]
    fn extreme_quantiles() {
        for &(alpha, k) in &[(1e-12f64, 1u32), (1.0 - 1e-9, 1), (1.0 - 1e-9, 3), (1e-15, 2880)] {
            let x = chi2_sf_inv(alpha, dof(k)).unwrap();
            let back = chi2_sf(x, dof(k)).unwrap();
            assert!(((back - alpha) / alpha).abs() < 1e-9, "alpha={alpha} k={k}");
        }
    }

    proptest! {
        #[test]
        fn inverse_round_trip(alpha in 1e-6..0.999_999f64, k in 1u32..4000) {
            let x = chi2_sf_inv(alpha, dof(k)).unwrap();
            prop_assert!((chi2_sf(x, dof(k)).unwrap() - alpha).abs() < 1e-9 * alpha.max(1e-3));
        }

        #[test]
        fn step_identity_holds(x in 0.01..6000.0f64, k in 1u32..3000) {
            let (diff, closed) = cdf_step_identity(x, dof(k)).unwrap();
            prop_assert!((diff - closed).abs() < 1e-12);
            prop_assert!(closed <= 0.0);
        }

        #[test]
        fn sf_nonincreasing(x in 0.0..5000.0f64, dx in 0.0..50.0f64, k in 1u32..3000) {
            prop_assert!(chi2_sf(x + dx, dof(k)).unwrap() <= chi2_sf(x, dof(k)).unwrap());
        }
    }
}
