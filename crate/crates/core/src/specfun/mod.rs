//! Special functions: log-gamma, incomplete gamma, central and noncentral
//! chi-squared tails and their inverses. Everything is generic over [`Real`].
//!
//! [`Real`]: crate::scalar::Real

mod chi2;
mod gamma;
mod noncentral;
mod normal;

pub use chi2::{cdf_step_identity, chi2_cdf, chi2_pdf, chi2_sf, chi2_sf_inv, Dof};
pub use gamma::{bd0, dpois_raw, gamma_p, gamma_q, ln_dpois_raw, ln_gamma, ln_gamma_p, ln_gamma_q, stirlerr};
pub use noncentral::{
    nc_chi2_ln_cdf, nc_chi2_ln_cdf_bound, nc_chi2_ln_sf, nc_chi2_sf, nc_chi2_sf_sankaran, nc_chi2_sf_series, nc_chi2_sf_with, NcMethod,
    NcSeries,
};
pub use normal::{normal_cdf, normal_quantile, normal_sf};
