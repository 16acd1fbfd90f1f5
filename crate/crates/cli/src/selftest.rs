//! Golden values for the chi-squared routines.
//!
//! References are closed forms evaluated here, independent of the library's
//! incomplete-gamma code: for even `k`, `Q(x; k) = e^{−x/2} Σ_{j<k/2} (x/2)^j/j!`,
//! and the noncentral survival function is its Poisson mixture.

use std::fmt::Write;

use risdet::specfun::{cdf_step_identity, chi2_sf, chi2_sf_inv, nc_chi2_sf, Dof};

pub struct Row {
    pub name: &'static str,
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
    /// Compare relative to |reference| instead of absolutely.
    pub relative: bool,
}

impl Row {
    pub fn error(&self) -> f64 {
        let abs = (self.value - self.reference).abs();
        if self.relative {
            abs / self.reference.abs()
        } else {
            abs
        }
    }

    pub fn passed(&self) -> bool {
        self.error() <= self.tolerance
    }
}

/// Noncentral survival function for even `k` from the finite central sums.
fn even_dof_reference(x: f64, k: u32, lambda: f64) -> f64 {
    assert!(k.is_multiple_of(2));
    let half_x = x / 2.0;
    let half_l = lambda / 2.0;
    let first = (k / 2) as usize;
    let extra = if lambda == 0.0 { 0 } else { (half_l + 40.0 * half_l.sqrt() + 60.0) as usize };
    // Prefix sums of Poisson(x/2) weights give Q(x; 2m) for every m needed.
    let mut central = Vec::with_capacity(first + extra + 1);
    let mut ln_term = -half_x;
    let mut acc = 0.0;
    for j in 0..first + extra {
        if j > 0 {
            ln_term += half_x.ln() - (j as f64).ln();
        }
        acc += ln_term.exp();
        central.push(acc);
    }
    if lambda == 0.0 {
        return central[first - 1];
    }
    let mut total = 0.0;
    let mut ln_w = -half_l;
    for l in 0..extra {
        if l > 0 {
            ln_w += half_l.ln() - (l as f64).ln();
        }
        total += ln_w.exp() * central[first + l - 1];
    }
    total
}

fn dof(k: u32) -> Dof {
    Dof::new(k).expect("positive degrees of freedom")
}

pub fn run() -> Vec<Row> {
    let e_inv = (-1.0f64).exp();
    let q_inv = chi2_sf_inv(1e-3, dof(2880)).unwrap_or(f64::NAN);
    let (step_diff, step_closed) = cdf_step_identity(2.0, dof(2)).unwrap_or((f64::NAN, f64::NAN));
    let nc = |x: f64, k: u32, l: f64| nc_chi2_sf(x, dof(k), l).unwrap_or(f64::NAN);
    let central = |x: f64, k: u32| chi2_sf(x, dof(k)).unwrap_or(f64::NAN);
    vec![
        Row {
            name: "chi2_sf(2; 2)",
            value: central(2.0, 2),
            reference: e_inv,
            tolerance: 1e-12,
            relative: false,
        },
        Row {
            name: "chi2_sf(0; 32)",
            value: central(0.0, 32),
            reference: 1.0,
            tolerance: 0.0,
            relative: false,
        },
        Row {
            name: "chi2_sf(3000; 2880)",
            value: central(3000.0, 2880),
            reference: even_dof_reference(3000.0, 2880, 0.0),
            tolerance: 1e-10,
            relative: false,
        },
        Row {
            name: "chi2_sf_inv(1e-3; 2)",
            value: chi2_sf_inv(1e-3, dof(2)).unwrap_or(f64::NAN),
            reference: -2.0 * 1e-3f64.ln(),
            tolerance: 1e-10,
            relative: true,
        },
        Row {
            name: "chi2_sf(chi2_sf_inv(1e-3; 2880))",
            value: central(q_inv, 2880),
            reference: 1e-3,
            tolerance: 1e-9,
            relative: true,
        },
        Row {
            name: "nc_chi2_sf(2; 2, 1)",
            value: nc(2.0, 2, 1.0),
            reference: even_dof_reference(2.0, 2, 1.0),
            tolerance: 1e-12,
            relative: false,
        },
        Row {
            name: "nc_chi2_sf(3000; 2880, 100)",
            value: nc(3000.0, 2880, 100.0),
            reference: even_dof_reference(3000.0, 2880, 100.0),
            tolerance: 1e-10,
            relative: false,
        },
        Row {
            name: "nc_chi2_sf(10100; 32, 1e4)",
            value: nc(10_100.0, 32, 1e4),
            reference: even_dof_reference(10_100.0, 32, 1e4),
            tolerance: 1e-10,
            relative: false,
        },
        Row {
            name: "nc_chi2_sf(40; 32, 0) - chi2_sf",
            value: nc(40.0, 32, 0.0),
            reference: central(40.0, 32),
            tolerance: 1e-15,
            relative: false,
        },
        Row {
            name: "cdf step (2; 2) closed form",
            value: step_closed,
            reference: -e_inv,
            tolerance: 1e-12,
            relative: false,
        },
        Row {
            name: "cdf step (2; 2) difference",
            value: step_diff,
            reference: -e_inv,
            tolerance: 1e-12,
            relative: false,
        },
    ]
}

pub fn table(rows: &[Row]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<34} {:>22} {:>22} {:>9} {:>7}  status", "quantity", "value", "reference", "error", "tol");
    for r in rows {
        let _ = writeln!(
            s,
            "{:<34} {:>22.15e} {:>22.15e} {:>9.1e} {:>7.0e}  {}",
            r.name,
            r.value,
            r.reference,
            r.error(),
            r.tolerance,
            if r.passed() { "ok" } else { "FAIL" }
        );
    }
    s
}
