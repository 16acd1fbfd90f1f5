mod common;

use common::{poisson_sum_sf, quadrature_sf};
use risdet::specfun::{chi2_sf, chi2_sf_inv, nc_chi2_sf, Dof};

fn dof(k: u32) -> Dof {
    Dof::new(k).unwrap()
}

#[test]
fn two_dof_unit_lambda_point() {
    let got = nc_chi2_sf(2.0, dof(2), 1.0).unwrap();
    let oracle = poisson_sum_sf(2.0, 2, 1.0);
    assert!((got - oracle).abs() < 1e-12, "{got} vs {oracle}");
}

#[test]
fn bulk_grid_matches_double_double_sum() {
    let mut worst = 0.0f64;
    for &k in &[2u32, 32, 2880] {
        for &lam in &[0.0, 1.0, 1e2, 1e4] {
            let mean = k as f64 + lam;
            let sd = (2.0 * (k as f64 + 2.0 * lam)).sqrt();
            for c in [-3.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0] {
                let x = (mean + c * sd).max(0.01);
                let err = (nc_chi2_sf(x, dof(k), lam).unwrap() - poisson_sum_sf(x, k, lam)).abs();
                assert!(err < 1e-10, "k={k} lam={lam} x={x}: err {err:e}");
                worst = worst.max(err);
            }
        }
    }
    assert!(worst < 1e-10);
}

#[test]
fn central_tails_at_large_k_match_oracle() {
    for &k in &[100u32, 1000, 2880, 10_000] {
        for c in [-4.0, 0.0, 4.0, 8.0] {
            let x = k as f64 + c * (2.0 * k as f64).sqrt();
            let err = (chi2_sf(x, dof(k)).unwrap() - poisson_sum_sf(x, k, 0.0)).abs();
            assert!(err < 1e-12, "k={k} x={x}: {err:e}");
        }
    }
}

#[test]
fn median_threshold_checked_by_oracle() {
    for &k in &[32u32, 2880] {
        let x = chi2_sf_inv(0.5, dof(k)).unwrap();
        assert!((poisson_sum_sf(x, k, 0.0) - 0.5).abs() < 1e-10);
        assert!((x / k as f64 - 1.0).abs() < 0.05);
    }
}

#[test]
fn detector_threshold_checked_by_oracle() {
    // 2·M_U·K = 2880 at P_FA = 1e-3
    let x = chi2_sf_inv(1e-3, dof(2880)).unwrap();
    assert!((poisson_sum_sf(x, 2880, 0.0) - 1e-3).abs() < 1e-12);
}

#[test]
fn quadrature_grid() {
    let mut count = 0;
    for &k in &[2u32, 4] {
        for &lam in &[1.0, 5.0, 10.0, 20.0, 30.0] {
            let mean = k as f64 + lam;
            let sd = (2.0 * (k as f64 + 2.0 * lam)).sqrt();
            for c in [-1.0, 1.0] {
                let x = (mean + c * sd).max(0.1);
                let got = nc_chi2_sf(x, dof(k), lam).unwrap();
                let oracle = quadrature_sf(x, k, lam);
                assert!((got - oracle).abs() < 1e-8, "k={k} lam={lam} x={x}: {got} vs {oracle}");
                count += 1;
            }
        }
    }
    assert_eq!(count, 20);
}
