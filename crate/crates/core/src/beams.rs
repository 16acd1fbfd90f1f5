//! BS sounding beams and RIS training profiles.
//!
//! The BS transmits `f0 + f_k` in slot `k`: `f0` is matched to the RIS, and the
//! pilot `f_k` lies in the null space of both `f0` and the UE reference beam
//! `g0`, so pilots carry no energy toward either the RIS or the UE.

use rand::Rng;

use crate::channels::{Direction, Link, LinkAngles};
use crate::error::{Error, Result};
use crate::linalg::{dot, orthonormal_basis, project_out, CMat};
use crate::rng::{complex_normal, stream, Purpose};
use crate::scalar::{cis, Cx, Real};
use crate::arrays::upa_response;
use crate::scenario::{RisScheme, ScenarioConfig};

/// Identifies one random draw: the user seed plus a realization index.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct DrawKey {
    pub seed: u64,
    pub realization: u64,
}

impl DrawKey {
    pub fn new(seed: u64, realization: u64) -> Self {
        DrawKey { seed, realization }
    }
}

impl From<u64> for DrawKey {
    fn from(seed: u64) -> Self {
        DrawKey::new(seed, 0)
    }
}

#[derive(Clone, Debug)]
pub struct BsBeamSet<T> {
    pub f0: Vec<Cx<T>>,
    pub g0: Vec<Cx<T>>,
    pub pilots: Vec<Vec<Cx<T>>>,
}

impl<T: Real> BsBeamSet<T> {
    pub fn build(cfg: &ScenarioConfig, angles: &[LinkAngles; 5], slots: usize, key: impl Into<DrawKey>) -> Result<Self> {
        let f0 = mrt_beam(cfg, angles);
        let g0 = ue_reference_beam(cfg, angles);
        let pilots = null_space_pilots(&f0, &g0, slots, key)?;
        Ok(BsBeamSet { f0, g0, pilots })
    }
}

fn normalized_bs_response<T: Real>(cfg: &ScenarioConfig, dir: Direction) -> Vec<Cx<T>> {
    // Responses are evaluated along the reversed link direction; see `channels`.
    let d = dir.reversed();
    let v = upa_response(&cfg.bs_array, T::lit(cfg.wavelength()), T::lit(d.azimuth), T::lit(d.elevation));
    let s = T::from_usize_lossy(v.len()).sqrt().recip();
    v.into_iter().map(|z| z.scale(s)).collect()
}

/// Unit-norm MRT beam toward the RIS.
pub fn mrt_beam<T: Real>(cfg: &ScenarioConfig, angles: &[LinkAngles; 5]) -> Vec<Cx<T>> {
    normalized_bs_response(cfg, angles[Link::BsRis as usize].departure)
}

/// Unit-norm beam toward the UE, used only to define the pilot null space.
pub fn ue_reference_beam<T: Real>(cfg: &ScenarioConfig, angles: &[LinkAngles; 5]) -> Vec<Cx<T>> {
    normalized_bs_response(cfg, angles[Link::BsUe as usize].departure)
}

/// `slots` orthonormal pilots orthogonal to `f0` and `g0`.
///
/// An orthonormal basis of the null space is mixed by a seeded Haar-random
/// isometry. Columns of the isometry are drawn one at a time, so the first
/// `k` pilots are identical for every `slots ≥ k` under the same key.
pub fn null_space_pilots<T: Real>(
    f0: &[Cx<T>],
    g0: &[Cx<T>],
    slots: usize,
    key: impl Into<DrawKey>,
) -> Result<Vec<Vec<Cx<T>>>> {
    let m = f0.len();
    if g0.len() != m {
        return Err(Error::Dimension(format!("f0 has {m} entries, g0 has {}", g0.len())));
    }
    let limit = m.saturating_sub(2);
    if slots > limit {
        return Err(Error::TooManySlots { k: slots, limit });
    }
    let key = key.into();
    let tol = T::lit(1e-10);

    let span = orthonormal_basis(&[f0.to_vec(), g0.to_vec()], tol);
    let mut candidates = span.clone();
    for i in 0..m {
        let mut e = vec![Cx::new(T::zero(), T::zero()); m];
        e[i] = Cx::new(T::one(), T::zero());
        candidates.push(e);
    }
    let null: Vec<Vec<Cx<T>>> = orthonormal_basis(&candidates, tol).split_off(span.len());

    let mut rng = stream(key.seed, Purpose::Pilots, key.realization);
    let mut mixing: Vec<Vec<Cx<T>>> = Vec::with_capacity(slots);
    let mut pilots: Vec<Vec<Cx<T>>> = Vec::with_capacity(slots);
    while pilots.len() < slots {
        let mut g: Vec<Cx<T>> = (0..null.len()).map(|_| complex_normal(&mut rng)).collect();
        project_out(&mut g, &mixing);
        let n = crate::linalg::norm(&g);
        if n < tol {
            continue;
        }
        g.iter_mut().for_each(|z| *z = z.unscale(n));
        let mut pilot = vec![Cx::new(T::zero(), T::zero()); m];
        for (c, basis) in g.iter().zip(&null) {
            for (p, b) in pilot.iter_mut().zip(basis) {
                *p += *c * *b;
            }
        }
        // Final clean-up pass against f0, g0 and earlier pilots.
        project_out(&mut pilot, &span);
        project_out(&mut pilot, &pilots);
        let pn = crate::linalg::norm(&pilot);
        pilot.iter_mut().for_each(|z| *z = z.unscale(pn));
        mixing.push(g);
        pilots.push(pilot);
    }
    Ok(pilots)
}

/// RIS phase profiles, one column per slot.
#[derive(Clone, Debug)]
pub struct RisProfileSet<T> {
    pub scheme: RisScheme,
    /// M_R × K, column `k` is `ω_k`.
    pub profiles: CMat<T>,
}

/// Training profiles for `slots` slots on an `m_r`-element RIS.
///
/// Random and one-bit phases are drawn column by column from a stream keyed
/// by `key`, so a shorter profile set is a prefix of a longer one.
pub fn ris_profiles<T: Real>(
    scheme: RisScheme,
    m_r: usize,
    slots: usize,
    key: impl Into<DrawKey>,
) -> Result<RisProfileSet<T>> {
    if slots == 0 {
        return Err(Error::invalid("slots_k", "must be at least 1"));
    }
    let key = key.into();
    let mut rng = stream(key.seed, Purpose::Profiles, key.realization);
    let profiles = match scheme {
        RisScheme::Random => {
            let data = (0..m_r * slots)
                .map(|_| cis(T::lit(rng.gen_range(0.0..std::f64::consts::TAU))))
                .collect();
            CMat::from_col_major(m_r, slots, data)?
        }
        RisScheme::OneBit => {
            let data = (0..m_r * slots)
                .map(|_| {
                    let s = if rng.gen::<bool>() { T::one() } else { -T::one() };
                    Cx::new(s, T::zero())
                })
                .collect();
            CMat::from_col_major(m_r, slots, data)?
        }
        RisScheme::Dft => {
            if slots > m_r {
                return Err(Error::invalid(
                    "slots_k",
                    format!("DFT subset needs K ≤ M_R = {m_r}, got {slots}"),
                ));
            }
            let n = T::from_usize_lossy(m_r);
            CMat::from_fn(m_r, slots, |i, k| {
                // Reduce the index product first so the angle stays small.
                let r = (i * k) % m_r;
                cis(-T::TAU() * T::from_usize_lossy(r) / n)
            })
        }
        RisScheme::None => return Err(Error::Scheme(scheme.name().to_string())),
    };
    Ok(RisProfileSet { scheme, profiles })
}

/// Largest deviation of `|f_k^H f0|` and `|f_k^H g0|` from zero.
pub fn pilot_leakage<T: Real>(beams: &BsBeamSet<T>) -> T {
    beams
        .pilots
        .iter()
        .flat_map(|p| [dot(p, &beams.f0).norm(), dot(p, &beams.g0).norm()])
        .fold(T::zero(), T::max)
}
