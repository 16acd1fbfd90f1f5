//! Independent reference implementations shared by the integration tests.
//!
//! Nothing here calls into `risdet::specfun`.

#![allow(dead_code)]

use std::io::Write;

use twofloat::TwoFloat;

/// Writes a line straight to stderr so it shows even under captured output.
pub fn report(line: &str) {
    let mut err = std::io::stderr();
    let _ = err.write_all(line.as_bytes());
    let _ = err.write_all(b"\n");
}

/// Normalized Poisson pmf over `[lo, lo + len)` in double-double, built from
/// ratio recurrences anchored at the mode. No logarithms are involved.
struct PoissonTable {
    lo: usize,
    pmf: Vec<TwoFloat>,
}

impl PoissonTable {
    fn new(mean: f64, reach: usize) -> Self {
        if mean == 0.0 {
            return PoissonTable { lo: 0, pmf: vec![TwoFloat::from(1.0)] };
        }
        let mode = mean.floor() as usize;
        let spread = 40 * (mean.sqrt().ceil() as usize) + 60;
        let lo = mode.saturating_sub(spread);
        let hi = (mode + spread).max(reach);
        let m = TwoFloat::from(mean);
        let mut pmf = vec![TwoFloat::from(0.0); hi - lo + 1];
        pmf[mode - lo] = TwoFloat::from(1.0);
        for i in mode..hi {
            pmf[i + 1 - lo] = pmf[i - lo] * m / TwoFloat::from(i as f64 + 1.0);
        }
        for i in (lo + 1..=mode).rev() {
            pmf[i - 1 - lo] = pmf[i - lo] * TwoFloat::from(i as f64) / m;
        }
        let total = pmf.iter().fold(TwoFloat::from(0.0), |acc, &p| acc + p);
        for p in &mut pmf {
            *p /= total;
        }
        PoissonTable { lo, pmf }
    }

    /// Running CDF over the table's support.
    fn cdf(&self) -> Vec<TwoFloat> {
        let mut acc = TwoFloat::from(0.0);
        self.pmf
            .iter()
            .map(|&p| {
                acc += p;
                acc
            })
            .collect()
    }
}

/// Survival function of the noncentral chi-squared for even `k`:
/// `Σ_j Pois(j; λ/2) · P(Pois(x/2) ≤ k/2 + j − 1)`, all in double-double.
pub fn poisson_sum_sf(x: f64, k: u32, lambda: f64) -> f64 {
    assert!(k.is_multiple_of(2) && k > 0, "oracle needs even k");
    let weights = PoissonTable::new(lambda / 2.0, 0);
    let max_index = k as usize / 2 + weights.lo + weights.pmf.len();
    let counts = PoissonTable::new(x / 2.0, max_index);
    let cdf = counts.cdf();
    let count_cdf = |n: usize| -> TwoFloat {
        if n < counts.lo {
            TwoFloat::from(0.0)
        } else if n - counts.lo >= cdf.len() {
            TwoFloat::from(1.0)
        } else {
            cdf[n - counts.lo]
        }
    };
    let mut total = TwoFloat::from(0.0);
    for (offset, &w) in weights.pmf.iter().enumerate() {
        let j = weights.lo + offset;
        total += w * count_cdf(k as usize / 2 + j - 1);
    }
    f64::from(total)
}

/// `I_n(z)·e^{−s}` for integer order via `(1/π)∫_0^π e^{z cos θ − s} cos(nθ) dθ`.
/// The trapezoid rule is spectrally accurate on this periodic integrand.
fn scaled_bessel_i(n: u32, z: f64, shift: f64) -> f64 {
    let steps = 600;
    let h = std::f64::consts::PI / steps as f64;
    let mut acc = 0.0;
    for i in 0..=steps {
        let t = i as f64 * h;
        let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
        acc += w * (z * t.cos() - shift).exp() * (n as f64 * t).cos();
    }
    acc * h / std::f64::consts::PI
}

/// Noncentral chi-squared density for even `k`, via the Bessel form.
pub fn bessel_pdf(x: f64, k: u32, lambda: f64) -> f64 {
    assert!(k.is_multiple_of(2) && k > 0 && lambda > 0.0);
    if x <= 0.0 {
        return if k == 2 { 0.5 * (-lambda / 2.0).exp() } else { 0.0 };
    }
    let order = k / 2 - 1;
    let z = (lambda * x).sqrt();
    0.5 * (x / lambda).powf(order as f64 / 2.0) * scaled_bessel_i(order, z, (x + lambda) / 2.0)
}

/// `1 − ∫_0^x pdf` by composite Simpson.
pub fn quadrature_sf(x: f64, k: u32, lambda: f64) -> f64 {
    let n = 6000;
    let h = x / n as f64;
    let mut acc = bessel_pdf(0.0, k, lambda) + bessel_pdf(x, k, lambda);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * bessel_pdf(i as f64 * h, k, lambda);
    }
    1.0 - acc * h / 3.0
}

#[test]
fn oracle_closed_forms() {
    // Central two-dof tail is e^{−x/2}; four dof adds the (1 + x/2) factor.
    for &x in &[0.5, 2.0, 10.0, 30.0] {
        assert!((poisson_sum_sf(x, 2, 0.0) - (-x / 2.0).exp()).abs() < 1e-16);
        let four = (1.0 + x / 2.0) * (-x / 2.0).exp();
        assert!((poisson_sum_sf(x, 4, 0.0) - four).abs() < 1e-16);
    }
    // The two oracles agree with each other on a noncentral point.
    let a = poisson_sum_sf(6.0, 4, 3.0);
    let b = quadrature_sf(6.0, 4, 3.0);
    assert!((a - b).abs() < 1e-10, "{a} vs {b}");
}
