//! One sounding frame and the whitened linear model built from it.
//!
//! Stacking the K received slots column-wise gives
//! `vec(Y) = μ + Ψh + n` with
//!
//! * `μ = vec(H5·X)`, the direct BS→UE interference,
//! * `Ψ = [Ω̃ᵀ⊗I, Xᵀ⊗I]` and `h = [vec(H̃); vec(Ĥ)]`, the drone echo,
//! * covariance `C = σ²I + μμᴴ`.
//!
//! `Ψh` is formed as `vec(H̃Ω̃ + ĤX)`; Ψ itself is only materialized by the
//! dense helpers used for cross-checks on small instances. `C⁻¹` is identity
//! plus rank one, so every whitener below is applied in O(KM_U).

use rand::Rng;
use serde::Serialize;

use crate::beams::{ris_profiles, BsBeamSet, DrawKey, RisProfileSet};
use crate::channels::{build_channels, channel_angles, ChannelSet, Link, LinkAngles};
use crate::error::{Error, Result};
use crate::linalg::{compensated_sum, dot, norm_sqr, CMat};
use crate::rng::complex_normal;
use crate::scalar::{Cx, Real};
use crate::scenario::{RisScheme, ScenarioConfig};

/// Dense helpers refuse to allocate more than this many entries.
pub const DENSE_ENTRY_LIMIT: usize = 1 << 22;

#[derive(Clone, Debug)]
pub struct SoundingFrame<T> {
    /// M_B × K, column `k` is `x_k = s_0·f0 + s_k·f_k`.
    pub x: CMat<T>,
    /// M_R × K, column `k` is `η_k·ω_k`. `None` for the RIS-free baseline.
    pub omega: Option<CMat<T>>,
    /// `η_k = a_B1ᴴ x_k`, the complex gain of slot `k` into the RIS.
    pub eta: Vec<Cx<T>>,
    /// `(|s_0|², |s_k|²)`.
    pub symbol_power: (T, T),
    pub power: T,
}

impl<T: Real> SoundingFrame<T> {
    pub fn slots(&self) -> usize {
        self.x.cols()
    }

    /// `Tr(XXᴴ)`.
    pub fn transmit_energy(&self) -> T {
        norm_sqr(self.x.as_slice())
    }

    /// `Tr(Ω̃Ω̃ᴴ)`, zero without a RIS.
    pub fn profile_energy(&self) -> T {
        self.omega.as_ref().map_or(T::zero(), |o| norm_sqr(o.as_slice()))
    }
}

/// Assembles `X` and `Ω̃` for transmit power `power` (linear, same unit as σ²).
///
/// Symbols split the power equally, `s_0 = s_k = √(P/2)`. Because `f0` is
/// the normalized BS response toward the RIS, `η_k = √M_B·f0ᴴx_k`.
pub fn build_frame<T: Real>(
    beams: &BsBeamSet<T>,
    profiles: Option<&RisProfileSet<T>>,
    power: T,
) -> Result<SoundingFrame<T>> {
    if !(power >= T::zero()) {
        return Err(Error::domain("build_frame", format!("power {power} must be non-negative")));
    }
    let m_b = beams.f0.len();
    let k = beams.pilots.len();
    let s = (power * T::lit(0.5)).sqrt();
    let mut x = CMat::zeros(m_b, k);
    for (slot, pilot) in beams.pilots.iter().enumerate() {
        if pilot.len() != m_b {
            return Err(Error::Dimension(format!("pilot {slot} has {} entries, expected {m_b}", pilot.len())));
        }
        for ((dst, f), p) in x.col_mut(slot).iter_mut().zip(&beams.f0).zip(pilot) {
            *dst = (f + p).scale(s);
        }
    }
    let gain = T::from_usize_lossy(m_b).sqrt();
    let eta: Vec<Cx<T>> = (0..k).map(|slot| dot(&beams.f0, x.col(slot)).scale(gain)).collect();
    let omega = match profiles {
        None => None,
        Some(p) => {
            if p.profiles.cols() != k {
                return Err(Error::Dimension(format!(
                    "{} RIS profiles for {k} slots",
                    p.profiles.cols()
                )));
            }
            let m_r = p.profiles.rows();
            Some(CMat::from_fn(m_r, k, |i, slot| p.profiles[(i, slot)] * eta[slot]))
        }
    };
    Ok(SoundingFrame {
        x,
        omega,
        eta,
        symbol_power: (s * s, s * s),
        power,
    })
}

#[derive(Clone, Debug)]
pub struct CascadedChannels<T> {
    /// M_U × M_R: `ζ·g₁·h4·(h3 ∘ a_R1)ᵀ`, the drone echo of the RIS path.
    pub h_tilde: CMat<T>,
    /// M_U × M_B: `ζ·h4·h2`, the direct drone echo.
    pub h_hat: CMat<T>,
    /// `ζ·g₂·g₄`, the scalar part of `Ĥ`.
    pub eps_hat: Cx<T>,
}

pub fn cascaded_channels<T: Real>(ch: &ChannelSet<T>, zeta: T) -> Result<CascadedChannels<T>> {
    if !(zeta >= T::zero()) {
        return Err(Error::domain("cascaded_channels", format!("zeta = {zeta} must be non-negative")));
    }
    let g1 = ch.info(Link::BsRis).gain;
    let ris_row: Vec<Cx<T>> = ch
        .h3
        .iter()
        .zip(&ch.ris_toward_bs)
        .map(|(a, b)| a * b * g1)
        .collect();
    let z = Cx::new(zeta, T::zero());
    Ok(CascadedChannels {
        h_tilde: CMat::outer(&ch.h4, &ris_row).scale(z),
        h_hat: CMat::outer(&ch.h4, &ch.h2).scale(z),
        eps_hat: ch.info(Link::BsDrone).gain * ch.info(Link::DroneUe).gain * z,
    })
}

/// Factorization used for `R` with `RᴴR = C⁻¹`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WhitenerKind {
    /// Upper-triangular `R` from the closed-form rank-one Cholesky factor.
    #[default]
    RankOneCholesky,
    /// Hermitian square root `C^{-1/2}`.
    HermitianSqrt,
    /// Dense Cholesky of the explicit `C⁻¹`. Small models only.
    DenseCholesky,
}

#[derive(Clone, Debug)]
enum Whitener<T> {
    /// `(Ry)_j = σ⁻¹(d_j·y_j + c_j·μ_j·Σ_{i>j} conj(μ_i)·y_i)`.
    RankOne { diag: Vec<T>, coupling: Vec<T> },
    /// `Ry = σ⁻¹(y − γ·μ(μᴴy)/‖μ‖²)`.
    Hermitian { gamma: T },
    Dense(CMat<T>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hypothesis {
    H0,
    H1,
}

/// How the interference term is drawn in simulation.
/// On the command line and in output files the stochastic mode is spelled
/// `paper`; `stochastic` is accepted as input too.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InterferenceMode {
    /// Interference plus noise `σw + ξμ ~ CN(0, C)`, the covariance the detector assumes.
    #[default]
    #[serde(rename = "paper")]
    Stochastic,
    /// `μ` is a known constant removed before whitening, leaving `σRw`.
    Deterministic,
}

impl Hypothesis {
    pub fn name(self) -> &'static str {
        match self {
            Hypothesis::H0 => "h0",
            Hypothesis::H1 => "h1",
        }
    }
}

impl InterferenceMode {
    pub fn name(self) -> &'static str {
        match self {
            InterferenceMode::Stochastic => "paper",
            InterferenceMode::Deterministic => "deterministic",
        }
    }
}

impl std::str::FromStr for InterferenceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "paper" | "stochastic" => Ok(InterferenceMode::Stochastic),
            "deterministic" => Ok(InterferenceMode::Deterministic),
            other => Err(Error::invalid("mode", format!("unknown interference mode `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct WhitenedModel<T> {
    m_u: usize,
    slots: usize,
    sigma2: T,
    frame: SoundingFrame<T>,
    cascades: CascadedChannels<T>,
    /// `Ψh = vec(H̃Ω̃ + ĤX)`.
    signal: Vec<Cx<T>>,
    /// `μ = vec(H5·X)`.
    mu: Vec<Cx<T>>,
    mu_norm2: T,
    whitener: Whitener<T>,
    kind: WhitenerKind,
    full_row_rank: bool,
    /// `RΨh`, cached for simulation.
    whitened_signal: Vec<Cx<T>>,
    /// `Rμ` in closed form; applying `R` to `μ` directly cancels badly.
    whitened_mu: Vec<Cx<T>>,
}

fn vec_product<T: Real>(a: &CMat<T>, b: &CMat<T>) -> Result<Vec<Cx<T>>> {
    Ok(a.matmul(b)?.into_vec())
}

pub fn build_whitened_model<T: Real>(
    frame: &SoundingFrame<T>,
    cascades: &CascadedChannels<T>,
    ch: &ChannelSet<T>,
    sigma2: T,
    kind: WhitenerKind,
) -> Result<WhitenedModel<T>> {
    if !(sigma2 > T::zero()) || !sigma2.is_finite() {
        return Err(Error::domain("build_whitened_model", format!("noise power {sigma2} must be positive")));
    }
    let m_u = ch.m_u();
    let slots = frame.slots();
    let mut signal = vec_product(&cascades.h_hat, &frame.x)?;
    if let Some(omega) = &frame.omega {
        let ris = vec_product(&cascades.h_tilde, omega)?;
        signal.iter_mut().zip(ris).for_each(|(s, r)| *s += r);
    }
    let mu = vec_product(&ch.h5, &frame.x)?;
    let mut model = WhitenedModel {
        m_u,
        slots,
        sigma2,
        frame: frame.clone(),
        cascades: cascades.clone(),
        signal,
        mu,
        mu_norm2: T::zero(),
        whitener: Whitener::Hermitian { gamma: T::zero() },
        kind,
        full_row_rank: regressor_rows_independent(frame),
        whitened_signal: Vec::new(),
        whitened_mu: Vec::new(),
    };
    model.refresh(kind)?;
    Ok(model)
}

/// Rank test on `A = [Ω̃ᵀ Xᵀ]`. The pilots make `X` alone full column rank in
/// every non-degenerate frame, so `Xᵀ` is checked first.
fn regressor_rows_independent<T: Real>(frame: &SoundingFrame<T>) -> bool {
    let k = frame.slots();
    let tol = T::lit(1e-10);
    if frame.x.rank(tol) == k {
        return true;
    }
    regressor(frame).transpose().rank(tol) == k
}

/// `[Ω̃ᵀ Xᵀ]`, K × (M_R + M_B), or `Xᵀ` without a RIS.
pub(crate) fn regressor<T: Real>(frame: &SoundingFrame<T>) -> CMat<T> {
    let xt = frame.x.transpose();
    match &frame.omega {
        None => xt,
        Some(o) => {
            let ot = o.transpose();
            let (k, m_r) = ot.shape();
            CMat::from_fn(k, m_r + xt.cols(), |i, j| if j < m_r { ot[(i, j)] } else { xt[(i, j - m_r)] })
        }
    }
}

fn make_whitener<T: Real>(mu: &[Cx<T>], mu_norm2: T, sigma2: T, kind: WhitenerKind) -> Result<Whitener<T>> {
    let n = mu.len();
    let denom = sigma2 + mu_norm2;
    Ok(match kind {
        WhitenerKind::RankOneCholesky => {
            // t_j = (σ² + Σ_{i>j}|μ_i|²)/(σ² + ‖μ‖²), with t_{-1} = 1.
            let mut tail = vec![T::zero(); n];
            let mut acc = T::zero();
            let mut carry = T::zero();
            for j in (0..n).rev() {
                tail[j] = acc + carry;
                let v = mu[j].norm_sqr();
                let t = acc + v;
                carry += (acc - t) + v;
                acc = t;
            }
            let alpha = -denom.recip();
            let mut diag = Vec::with_capacity(n);
            let mut coupling = Vec::with_capacity(n);
            let mut prev = T::one();
            for tail_j in tail {
                let t = (sigma2 + tail_j) / denom;
                diag.push((t / prev).sqrt());
                coupling.push(alpha / (t * prev).sqrt());
                prev = t;
            }
            Whitener::RankOne { diag, coupling }
        }
        WhitenerKind::HermitianSqrt => Whitener::Hermitian {
            gamma: T::one() - (sigma2 / denom).sqrt(),
        },
        WhitenerKind::DenseCholesky => {
            if n * n > DENSE_ENTRY_LIMIT {
                return Err(Error::Dimension(format!("dense whitener for n = {n} is too large")));
            }
            let inv_s2 = sigma2.recip();
            let alpha = -denom.recip();
            let c_inv = CMat::from_fn(n, n, |i, j| {
                let d = if i == j { T::one() } else { T::zero() };
                (Cx::new(d, T::zero()) + (mu[i] * mu[j].conj()).scale(alpha)).scale(inv_s2)
            });
            Whitener::Dense(c_inv.cholesky()?.adjoint())
        }
    })
}

impl<T: Real> WhitenedModel<T> {
    /// Length of the stacked observation, `K·M_U`.
    pub fn dim(&self) -> usize {
        self.m_u * self.slots
    }

    pub fn m_u(&self) -> usize {
        self.m_u
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn sigma2(&self) -> T {
        self.sigma2
    }

    pub fn frame(&self) -> &SoundingFrame<T> {
        &self.frame
    }

    pub fn cascades(&self) -> &CascadedChannels<T> {
        &self.cascades
    }

    pub fn has_ris(&self) -> bool {
        self.frame.omega.is_some()
    }

    /// `Ψh`.
    pub fn signal(&self) -> &[Cx<T>] {
        &self.signal
    }

    pub fn mu(&self) -> &[Cx<T>] {
        &self.mu
    }

    pub fn whitener_kind(&self) -> WhitenerKind {
        self.kind
    }

    /// Whether `RΨ` has full row rank, in which case its column space is
    /// the whole observation space.
    pub fn full_row_rank(&self) -> bool {
        self.full_row_rank
    }

    /// Recomputes everything derived from `μ` and the signal.
    fn refresh(&mut self, kind: WhitenerKind) -> Result<()> {
        self.mu_norm2 = norm_sqr(&self.mu);
        self.whitener = make_whitener(&self.mu, self.mu_norm2, self.sigma2, kind)?;
        self.kind = kind;
        let sigma = self.sigma2.sqrt();
        self.whitened_mu = match &self.whitener {
            // (Rμ)_j = −σ·c_j·μ_j once the rank-one terms are combined by hand.
            Whitener::RankOne { coupling, .. } => {
                self.mu.iter().zip(coupling).map(|(m, c)| m.scale(-sigma * *c)).collect()
            }
            Whitener::Hermitian { .. } => {
                let s = (self.sigma2 + self.mu_norm2).sqrt().recip();
                self.mu.iter().map(|m| m.scale(s)).collect()
            }
            Whitener::Dense(r) => r.mul_vec(&self.mu)?,
        };
        self.whitened_signal = self.whiten(&self.signal)?;
        Ok(())
    }

    /// Same model with a different factor of `C⁻¹`.
    pub fn with_whitener(&self, kind: WhitenerKind) -> Result<Self> {
        let mut out = self.clone();
        out.refresh(kind)?;
        Ok(out)
    }

    /// Same beams and profiles at another transmit power. Every transmitted
    /// quantity scales by `√(P/P₀)`.
    pub fn at_power(&self, power: T) -> Result<Self> {
        let p0 = self.frame.power;
        if !(p0 > T::zero()) || !(power > T::zero()) {
            return Err(Error::domain("at_power", "both powers must be positive"));
        }
        let s = (power / p0).sqrt();
        let c = Cx::new(s, T::zero());
        let mut out = self.clone();
        out.frame.x = self.frame.x.scale(c);
        out.frame.omega = self.frame.omega.as_ref().map(|o| o.scale(c));
        out.frame.eta.iter_mut().for_each(|e| *e = e.scale(s));
        out.frame.symbol_power = (self.frame.symbol_power.0 * s * s, self.frame.symbol_power.1 * s * s);
        out.frame.power = power;
        out.signal.iter_mut().for_each(|z| *z = z.scale(s));
        out.mu.iter_mut().for_each(|z| *z = z.scale(s));
        out.refresh(self.kind)?;
        Ok(out)
    }

    /// `Rμ`.
    pub fn whitened_mu(&self) -> &[Cx<T>] {
        &self.whitened_mu
    }

    /// `RΨh`.
    pub fn whitened_signal(&self) -> &[Cx<T>] {
        &self.whitened_signal
    }

    /// `‖μ‖²/σ²`, the interference-to-noise ratio over the whole frame.
    pub fn inr(&self) -> T {
        self.mu_norm2 / self.sigma2
    }

    /// `R·y`.
    pub fn whiten(&self, y: &[Cx<T>]) -> Result<Vec<Cx<T>>> {
        let n = self.dim();
        if y.len() != n {
            return Err(Error::Dimension(format!("observation has {} entries, expected {n}", y.len())));
        }
        let inv_sigma = self.sigma2.sqrt().recip();
        Ok(match &self.whitener {
            Whitener::RankOne { diag, coupling } => {
                let mut out = vec![Cx::new(T::zero(), T::zero()); n];
                let mut suffix = Cx::new(T::zero(), T::zero());
                for j in (0..n).rev() {
                    out[j] = (y[j].scale(diag[j]) + self.mu[j] * suffix.scale(coupling[j])).scale(inv_sigma);
                    suffix += self.mu[j].conj() * y[j];
                }
                out
            }
            Whitener::Hermitian { gamma } => {
                if self.mu_norm2 == T::zero() {
                    return Ok(y.iter().map(|z| z.scale(inv_sigma)).collect());
                }
                let c = dot(&self.mu, y).scale(*gamma / self.mu_norm2);
                y.iter()
                    .zip(&self.mu)
                    .map(|(yi, mi)| (yi - mi * c).scale(inv_sigma))
                    .collect()
            }
            Whitener::Dense(r) => r.mul_vec(y)?,
        })
    }

    /// `R` as a dense matrix.
    pub fn whitener_dense(&self) -> Result<CMat<T>> {
        let n = self.dim();
        if n * n > DENSE_ENTRY_LIMIT {
            return Err(Error::Dimension(format!("dense whitener for n = {n} is too large")));
        }
        if let Whitener::Dense(r) = &self.whitener {
            return Ok(r.clone());
        }
        let mut r = CMat::zeros(n, n);
        let mut e = vec![Cx::new(T::zero(), T::zero()); n];
        for j in 0..n {
            e[j] = Cx::new(T::one(), T::zero());
            let col = self.whiten(&e)?;
            r.col_mut(j).copy_from_slice(&col);
            e[j] = Cx::new(T::zero(), T::zero());
        }
        Ok(r)
    }

    /// `R·C·Rᴴ` evaluated as `σ²RRᴴ + (Rμ)(Rμ)ᴴ`. Forming `C` first loses
    /// roughly `‖μ‖²/σ²` ulps when the interference dominates the noise.
    pub fn whitened_covariance_dense(&self) -> Result<CMat<T>> {
        let r = self.whitener_dense()?;
        let r_mu = self.whiten(&self.mu)?;
        let rr = r.matmul(&r.adjoint())?;
        Ok(CMat::from_fn(rr.rows(), rr.cols(), |i, j| {
            rr[(i, j)].scale(self.sigma2) + r_mu[i] * r_mu[j].conj()
        }))
    }

    /// `C = σ²I + μμᴴ` as a dense matrix.
    pub fn covariance_dense(&self) -> Result<CMat<T>> {
        let n = self.dim();
        if n * n > DENSE_ENTRY_LIMIT {
            return Err(Error::Dimension(format!("dense covariance for n = {n} is too large")));
        }
        Ok(CMat::from_fn(n, n, |i, j| {
            let d = if i == j { self.sigma2 } else { T::zero() };
            Cx::new(d, T::zero()) + self.mu[i] * self.mu[j].conj()
        }))
    }

    /// `Ψ = [Ω̃ᵀ⊗I, Xᵀ⊗I]`, or `Xᵀ⊗I` without a RIS.
    pub fn psi_dense(&self) -> Result<CMat<T>> {
        let eye = CMat::identity(self.m_u);
        let rows = self.dim();
        let m_r = self.frame.omega.as_ref().map_or(0, |o| o.rows());
        let cols = self.m_u * (m_r + self.frame.x.rows());
        if rows * cols > DENSE_ENTRY_LIMIT {
            return Err(Error::Dimension(format!("dense Ψ of {rows}×{cols} is too large")));
        }
        let direct = self.frame.x.transpose().kron(&eye);
        Ok(match &self.frame.omega {
            None => direct,
            Some(o) => {
                let ris = o.transpose().kron(&eye);
                let split = ris.cols();
                CMat::from_fn(rows, cols, |i, j| if j < split { ris[(i, j)] } else { direct[(i, j - split)] })
            }
        })
    }

    /// `h = [vec(H̃); vec(Ĥ)]`, or `vec(Ĥ)` without a RIS.
    pub fn h_dense(&self) -> Vec<Cx<T>> {
        let mut h = Vec::new();
        if self.frame.omega.is_some() {
            h.extend_from_slice(self.cascades.h_tilde.as_slice());
        }
        h.extend_from_slice(self.cascades.h_hat.as_slice());
        h
    }

    /// `hᴴΨᴴC⁻¹Ψh`, split along and across `μ` so that no large terms cancel:
    /// `(‖s_⊥‖² + |μᴴs|²/‖μ‖² · σ²/(σ²+‖μ‖²)) / σ²`.
    pub fn quadratic_form(&self) -> T {
        let q = self.power_scaling();
        (q.across + q.along * self.sigma2 / (self.sigma2 + self.mu_norm2)) / self.sigma2
    }

    /// The textbook Sherman–Morrison expression `(‖s‖² − |μᴴs|²/(σ²+‖μ‖²))/σ²`.
    pub fn quadratic_form_sherman_morrison(&self) -> T {
        let s2 = norm_sqr(&self.signal);
        let c = dot(&self.mu, &self.signal).norm_sqr();
        (s2 - c / (self.sigma2 + self.mu_norm2)) / self.sigma2
    }

    /// Noncentrality `λ = 2‖RΨh‖²`.
    pub fn noncentrality(&self) -> T {
        T::lit(2.0) * self.quadratic_form()
    }

    /// `‖RΨh‖²` through the stored whitener.
    pub fn whitened_signal_energy(&self) -> Result<T> {
        Ok(norm_sqr(&self.whiten(&self.signal)?))
    }

    /// Signal energy across and along `μ` at this model's power.
    fn power_scaling(&self) -> SignalSplit<T> {
        if self.mu_norm2 == T::zero() {
            return SignalSplit {
                across: norm_sqr(&self.signal),
                along: T::zero(),
            };
        }
        let c = dot(&self.mu, &self.signal);
        let coef = c.unscale(self.mu_norm2);
        let mut perp: Vec<Cx<T>> = self
            .signal
            .iter()
            .zip(&self.mu)
            .map(|(s, m)| s - m * coef)
            .collect();
        let c2 = dot(&self.mu, &perp).unscale(self.mu_norm2);
        perp.iter_mut().zip(&self.mu).for_each(|(p, m)| *p -= m * c2);
        SignalSplit {
            across: norm_sqr(&perp),
            along: c.norm_sqr() / self.mu_norm2,
        }
    }

    /// Closed-form `λ(P)` for this frame's beams and profiles at any power.
    pub fn power_curve(&self) -> PowerCurve<T> {
        let p = self.frame.power;
        let split = self.power_scaling();
        let scale = if p > T::zero() { p.recip() } else { T::zero() };
        PowerCurve {
            across: split.across * scale,
            along: split.along * scale,
            mu_norm2: self.mu_norm2 * scale,
            sigma2: self.sigma2,
        }
    }

    /// One whitened observation `ỹ = R(σw + ξμ + Ψh)`.
    ///
    /// Stochastic mode draws `ξ ~ CN(0,1)`, so `ỹ` has identity covariance.
    /// Deterministic mode treats `μ` as known and subtracts it, which
    /// leaves `σRw`. `Rμ` and `RΨh` are added from their cached values.
    pub fn simulate_received<R: Rng + ?Sized>(
        &self,
        hypothesis: Hypothesis,
        mode: InterferenceMode,
        rng: &mut R,
    ) -> Result<Vec<Cx<T>>> {
        let n = self.dim();
        let sigma = self.sigma2.sqrt();
        let w: Vec<Cx<T>> = (0..n).map(|_| complex_normal::<T, R>(rng).scale(sigma)).collect();
        let mut y = self.whiten(&w)?;
        if mode == InterferenceMode::Stochastic {
            let xi: Cx<T> = complex_normal(rng);
            y.iter_mut().zip(&self.whitened_mu).for_each(|(yi, mi)| *yi += mi * xi);
        }
        if hypothesis == Hypothesis::H1 {
            y.iter_mut().zip(&self.whitened_signal).for_each(|(yi, si)| *yi += si);
        }
        Ok(y)
    }
}

struct SignalSplit<T> {
    across: T,
    along: T,
}

/// `λ(P) = 2P·(a + b·σ²/(σ² + P·m))/σ²` where `a`, `b`, `m` are the
/// across-μ energy, along-μ energy and `‖μ‖²` at unit power. Strictly
/// increasing in P whenever the signal is nonzero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerCurve<T> {
    pub across: T,
    pub along: T,
    pub mu_norm2: T,
    pub sigma2: T,
}

impl<T: Real> PowerCurve<T> {
    pub fn noncentrality(&self, power: T) -> T {
        let interference = self.sigma2 / (self.sigma2 + power * self.mu_norm2);
        T::lit(2.0) * power * (self.across + self.along * interference) / self.sigma2
    }

    /// Smallest power with `λ(P) ≥ target`, by bisection on `[lo, hi]`.
    pub fn power_for(&self, target: T, lo: T, hi: T) -> Option<T> {
        if self.noncentrality(hi) < target {
            return None;
        }
        if self.noncentrality(lo) >= target {
            return Some(lo);
        }
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let m = T::lit(0.5) * (a + b);
            if self.noncentrality(m) >= target {
                b = m;
            } else {
                a = m;
            }
            if b - a <= T::epsilon() * b {
                break;
            }
        }
        Some(b)
    }
}

/// Channels and cascades for one scenario, reused across frames.
#[derive(Clone, Debug)]
pub struct ModelBuilder<T> {
    cfg: ScenarioConfig,
    angles: [LinkAngles; 5],
    channels: ChannelSet<T>,
    cascades: CascadedChannels<T>,
}

impl<T: Real> ModelBuilder<T> {
    pub fn new(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let channels = build_channels(cfg)?;
        let cascades = cascaded_channels(&channels, T::lit(cfg.zeta))?;
        Ok(ModelBuilder {
            cfg: cfg.clone(),
            angles: channel_angles(cfg)?,
            channels,
            cascades,
        })
    }

    /// Same channels with another reflection coefficient. Zero is allowed
    /// here and yields an echo-free model.
    pub fn with_zeta(mut self, zeta: f64) -> Result<Self> {
        self.cascades = cascaded_channels(&self.channels, T::lit(zeta))?;
        self.cfg.zeta = zeta;
        Ok(self)
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn channels(&self) -> &ChannelSet<T> {
        &self.channels
    }

    pub fn angles(&self) -> &[LinkAngles; 5] {
        &self.angles
    }

    /// Beams for `slots` slots. Pilots and profiles share the draw key
    /// `(seed, realization)`, so every scheme sees the same pilots.
    pub fn beams(&self, slots: usize, realization: u64) -> Result<BsBeamSet<T>> {
        BsBeamSet::build(&self.cfg, &self.angles, slots, DrawKey::new(self.cfg.seed, realization))
    }

    /// Whitened model at the configured power. `RisScheme::None` gives the
    /// RIS-free baseline built on the same pilots.
    pub fn model(&self, scheme: RisScheme, slots: usize, realization: u64, kind: WhitenerKind) -> Result<WhitenedModel<T>> {
        let beams = self.beams(slots, realization)?;
        self.model_with_beams(&beams, scheme, realization, kind)
    }

    /// RIS training profiles for `realization`; `None` for the RIS-free scheme.
    pub fn profiles(&self, scheme: RisScheme, slots: usize, realization: u64) -> Result<Option<RisProfileSet<T>>> {
        match scheme {
            RisScheme::None => Ok(None),
            s => ris_profiles(s, self.cfg.m_r(), slots, DrawKey::new(self.cfg.seed, realization)).map(Some),
        }
    }

    pub fn model_with_beams(
        &self,
        beams: &BsBeamSet<T>,
        scheme: RisScheme,
        realization: u64,
        kind: WhitenerKind,
    ) -> Result<WhitenedModel<T>> {
        let profiles = self.profiles(scheme, beams.pilots.len(), realization)?;
        let frame = build_frame(beams, profiles.as_ref(), T::lit(self.cfg.tx_power_mw()))?;
        build_whitened_model(&frame, &self.cascades, &self.channels, T::lit(self.cfg.noise_power_mw()), kind)
    }
}

/// Sum of squared moduli, compensated.
pub fn energy<T: Real>(v: &[Cx<T>]) -> T {
    compensated_sum(v.iter().map(|z| z.norm_sqr()))
}
