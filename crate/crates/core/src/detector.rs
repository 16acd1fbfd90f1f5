//! GLRT on whitened observations and its closed-form operating point.
//!
//! With `ỹ = R·vec(Y)` the log-likelihood ratio maximized over `h` is the
//! energy of `ỹ` inside `col(RΨ)`. Under H0 that energy is central χ² with
//! `2M_U K` degrees of freedom; under H1 it is noncentral with
//! `λ = 2‖RΨh‖²`.

use crate::error::{Error, Result};
use crate::linalg::{dot, kron_vec, norm_sqr, orthonormal_basis};
use crate::scalar::{Cx, Real};
use crate::sounding::{regressor, WhitenedModel};
use crate::specfun::{chi2_sf_inv, nc_chi2_ln_cdf, nc_chi2_sf, Dof};

/// One point on a detection curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticPoint<T> {
    pub lambda_nc: T,
    pub dof: Dof,
    pub gamma_prime: T,
    pub p_fa: T,
    pub p_d: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectorOutput<T> {
    pub statistic: T,
    pub threshold: T,
    /// `true` when H1 is declared.
    pub decision: bool,
}

/// `γ′` with `Q_{χ²_{2M_U K}}(γ′) = α`.
pub fn threshold_from_pfa<T: Real>(alpha: T, m_u: usize, slots: usize) -> Result<T> {
    chi2_sf_inv(alpha, Dof::detector(m_u, slots)?)
}

/// `P_D = Q_{χ′²_{2M_U K}(λ)}(γ′)`.
pub fn pd_analytic<T: Real>(lambda_nc: T, m_u: usize, slots: usize, gamma_prime: T) -> Result<T> {
    nc_chi2_sf(gamma_prime, Dof::detector(m_u, slots)?, lambda_nc)
}

/// `1 − P_D`, evaluated directly so it keeps full relative accuracy when
/// P_D rounds to one.
pub fn miss_probability<T: Real>(lambda_nc: T, m_u: usize, slots: usize, gamma_prime: T) -> Result<T> {
    Ok(nc_chi2_ln_cdf(gamma_prime, Dof::detector(m_u, slots)?, lambda_nc)?.exp())
}

/// `λ = 2hᴴΨᴴC⁻¹Ψh`.
pub fn noncentrality<T: Real>(model: &WhitenedModel<T>) -> T {
    model.noncentrality()
}

/// `λ̄` of the RIS-free baseline. Degrees of freedom stay at `2M_U K`.
pub fn noncentrality_ris_free<T: Real>(model: &WhitenedModel<T>) -> Result<T> {
    if model.has_ris() {
        return Err(Error::ModelKind { expected: "RIS-free" });
    }
    Ok(model.noncentrality())
}

pub fn analytic_point<T: Real>(model: &WhitenedModel<T>, p_fa: T) -> Result<AnalyticPoint<T>> {
    let dof = Dof::detector(model.m_u(), model.slots())?;
    let gamma_prime = chi2_sf_inv(p_fa, dof)?;
    let lambda_nc = model.noncentrality();
    Ok(AnalyticPoint {
        lambda_nc,
        dof,
        gamma_prime,
        p_fa,
        p_d: nc_chi2_sf(gamma_prime, dof, lambda_nc)?,
    })
}

/// Projector onto `col(RΨ)`, built once per model.
#[derive(Clone, Debug)]
pub struct Glrt<T> {
    dim: usize,
    /// Orthonormal basis of `col(RΨ)`; `None` when that is the whole space.
    basis: Option<Vec<Vec<Cx<T>>>>,
}

impl<T: Real> Glrt<T> {
    pub fn new(model: &WhitenedModel<T>) -> Result<Self> {
        let dim = model.dim();
        if model.full_row_rank() {
            return Ok(Glrt { dim, basis: None });
        }
        // col(Ψ) = col(A) ⊗ C^{M_U} with A = [Ω̃ᵀ Xᵀ].
        let a = regressor(model.frame());
        let slot_basis = orthonormal_basis(&a.columns(), T::lit(1e-10));
        let mut spanning = Vec::with_capacity(slot_basis.len() * model.m_u());
        let mut unit = vec![Cx::new(T::zero(), T::zero()); model.m_u()];
        for b in &slot_basis {
            for u in 0..model.m_u() {
                unit[u] = Cx::new(T::one(), T::zero());
                spanning.push(model.whiten(&kron_vec(b, &unit))?);
                unit[u] = Cx::new(T::zero(), T::zero());
            }
        }
        Ok(Glrt {
            dim,
            basis: Some(orthonormal_basis(&spanning, T::lit(1e-12))),
        })
    }

    /// Dimension of the signal subspace.
    pub fn rank(&self) -> usize {
        self.basis.as_ref().map_or(self.dim, Vec::len)
    }

    pub fn is_identity(&self) -> bool {
        self.basis.is_none()
    }

    /// `2‖Proj_{col(RΨ)} ỹ‖²`.
    pub fn statistic(&self, y_tilde: &[Cx<T>]) -> Result<T> {
        if y_tilde.len() != self.dim {
            return Err(Error::Dimension(format!(
                "whitened observation has {} entries, expected {}",
                y_tilde.len(),
                self.dim
            )));
        }
        let energy = match &self.basis {
            None => norm_sqr(y_tilde),
            Some(q) => q.iter().map(|v| dot(v, y_tilde).norm_sqr()).fold(T::zero(), |a, b| a + b),
        };
        Ok(T::lit(2.0) * energy)
    }

    pub fn decide(&self, y_tilde: &[Cx<T>], threshold: T) -> Result<DetectorOutput<T>> {
        let statistic = self.statistic(y_tilde)?;
        Ok(DetectorOutput {
            statistic,
            threshold,
            decision: statistic > threshold,
        })
    }
}

/// One-shot form of [`Glrt::statistic`].
pub fn glrt_statistic<T: Real>(y_tilde: &[Cx<T>], model: &WhitenedModel<T>) -> Result<T> {
    Glrt::new(model)?.statistic(y_tilde)
}
