//! Deterministic line-of-sight channel blocks.
//!
//! Five links, each a single ray scaled by `e^{−j2πd/λ}/√ρ`:
//!
//! | link | tx → rx       | block | shape    |
//! |------|---------------|-------|----------|
//! | 1    | BS → RIS      | `H1`  | M_R×M_B  |
//! | 2    | BS → drone    | `h2`  | 1×M_B    |
//! | 3    | RIS → drone   | `h3`  | 1×M_R    |
//! | 4    | drone → UE    | `h4`  | M_U×1    |
//! | 5    | BS → UE       | `H5`  | M_U×M_B  |
//!
//! The angle table reports each link's direction from transmitter to
//! receiver. The array responses are evaluated along the opposite direction,
//! which is the one for which the planar-wave model reproduces the exact
//! element-to-element path phases (see `planar_model_matches_exact_phases`).

use crate::arrays::upa_response;
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::scalar::{cis, Cx, Real};
use crate::scenario::{link_geometry, path_loss_db, ArrayGeometry, Position3D, ScenarioConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Link {
    BsRis,
    BsDrone,
    RisDrone,
    DroneUe,
    BsUe,
}

impl Link {
    pub const ALL: [Link; 5] = [Link::BsRis, Link::BsDrone, Link::RisDrone, Link::DroneUe, Link::BsUe];

    /// 1-based link number.
    pub fn number(self) -> usize {
        self as usize + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Link::BsRis => "bs-ris",
            Link::BsDrone => "bs-drone",
            Link::RisDrone => "ris-drone",
            Link::DroneUe => "drone-ue",
            Link::BsUe => "bs-ue",
        }
    }

    fn endpoints(self, cfg: &ScenarioConfig) -> (Position3D, Position3D) {
        match self {
            Link::BsRis => (cfg.bs_position, cfg.ris_position),
            Link::BsDrone => (cfg.bs_position, cfg.drone_position),
            Link::RisDrone => (cfg.ris_position, cfg.drone_position),
            Link::DroneUe => (cfg.drone_position, cfg.ue_position),
            Link::BsUe => (cfg.bs_position, cfg.ue_position),
        }
    }
}

/// Azimuth/elevation pair in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Direction {
    pub azimuth: f64,
    pub elevation: f64,
}

impl Direction {
    /// The antipodal direction.
    pub fn reversed(self) -> Self {
        Direction {
            azimuth: self.azimuth + std::f64::consts::PI,
            elevation: std::f64::consts::PI - self.elevation,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkAngles {
    pub link: Link,
    pub departure: Direction,
    pub arrival: Direction,
}

/// Per-link distance and large-scale gain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkInfo<T> {
    pub link: Link,
    pub distance: f64,
    /// Linear path loss ρ.
    pub path_loss: f64,
    /// `e^{−j2πd/λ}/√ρ`.
    pub gain: Cx<T>,
}

#[derive(Clone, Debug)]
pub struct ChannelSet<T> {
    pub h1: CMat<T>,
    pub h2: Vec<Cx<T>>,
    pub h3: Vec<Cx<T>>,
    pub h4: Vec<Cx<T>>,
    pub h5: CMat<T>,
    pub links: [LinkInfo<T>; 5],
    /// BS response along link 1; `H1 = gain₁ · ris_toward_bs · bs_toward_ris^H`.
    pub bs_toward_ris: Vec<Cx<T>>,
    pub ris_toward_bs: Vec<Cx<T>>,
    /// BS response along link 5; `H5 = gain₅ · ue_toward_bs · bs_toward_ue^H`.
    pub bs_toward_ue: Vec<Cx<T>>,
    pub ue_toward_bs: Vec<Cx<T>>,
}

impl<T: Real> ChannelSet<T> {
    pub fn info(&self, link: Link) -> &LinkInfo<T> {
        &self.links[link as usize]
    }

    pub fn m_b(&self) -> usize {
        self.h1.cols()
    }

    pub fn m_r(&self) -> usize {
        self.h1.rows()
    }

    pub fn m_u(&self) -> usize {
        self.h5.rows()
    }
}

/// Departure and arrival angles of every link, both measured along the
/// transmitter-to-receiver direction (so they coincide for each link).
pub fn channel_angles(cfg: &ScenarioConfig) -> Result<[LinkAngles; 5]> {
    let mut out = [LinkAngles {
        link: Link::BsRis,
        departure: Direction {
            azimuth: 0.0,
            elevation: 0.0,
        },
        arrival: Direction {
            azimuth: 0.0,
            elevation: 0.0,
        },
    }; 5];
    for (slot, link) in out.iter_mut().zip(Link::ALL) {
        let (tx, rx) = link.endpoints(cfg);
        let g = link_geometry(tx, rx).map_err(|_| Error::CoincidentNodes(link.name()))?;
        let dir = Direction {
            azimuth: g.azimuth,
            elevation: g.elevation,
        };
        *slot = LinkAngles {
            link,
            departure: dir,
            arrival: dir,
        };
    }
    Ok(out)
}

fn response<T: Real>(geometry: &ArrayGeometry, wavelength: f64, dir: Direction) -> Vec<Cx<T>> {
    upa_response(geometry, T::lit(wavelength), T::lit(dir.azimuth), T::lit(dir.elevation))
}

pub fn build_channels<T: Real>(cfg: &ScenarioConfig) -> Result<ChannelSet<T>> {
    let angles = channel_angles(cfg)?;
    let wavelength = cfg.wavelength();
    let mut infos = Vec::with_capacity(5);
    for link in Link::ALL {
        let (tx, rx) = link.endpoints(cfg);
        let g = link_geometry(tx, rx).map_err(|_| Error::CoincidentNodes(link.name()))?;
        let loss_db = path_loss_db(g.distance, cfg.carrier_hz)?;
        let path_loss = 10f64.powf(loss_db / 10.0);
        let phase = -std::f64::consts::TAU * g.distance / wavelength;
        let gain = cis(T::lit(phase)).scale(T::lit(path_loss.sqrt().recip()));
        infos.push(LinkInfo {
            link,
            distance: g.distance,
            path_loss,
            gain,
        });
    }
    let links: [LinkInfo<T>; 5] = infos.try_into().expect("five links");
    let along = |link: Link| angles[link as usize].arrival.reversed();

    let bs_toward_ris = response(&cfg.bs_array, wavelength, along(Link::BsRis));
    let ris_toward_bs = response(&cfg.ris_array, wavelength, along(Link::BsRis));
    let bs_toward_drone: Vec<Cx<T>> = response(&cfg.bs_array, wavelength, along(Link::BsDrone));
    let ris_toward_drone: Vec<Cx<T>> = response(&cfg.ris_array, wavelength, along(Link::RisDrone));
    let ue_toward_drone: Vec<Cx<T>> = response(&cfg.ue_array, wavelength, along(Link::DroneUe));
    let bs_toward_ue = response(&cfg.bs_array, wavelength, along(Link::BsUe));
    let ue_toward_bs = response(&cfg.ue_array, wavelength, along(Link::BsUe));

    let g = |link: Link| links[link as usize].gain;
    let conj_row = |v: &[Cx<T>], s: Cx<T>| v.iter().map(|z| s * z.conj()).collect::<Vec<_>>();
    let bs_ris_conj: Vec<Cx<T>> = bs_toward_ris.iter().map(|z| z.conj()).collect();
    let h1 = CMat::outer(&ris_toward_bs, &bs_ris_conj).scale(g(Link::BsRis));
    let bs_ue_conj: Vec<Cx<T>> = bs_toward_ue.iter().map(|z| z.conj()).collect();
    let h5 = CMat::outer(&ue_toward_bs, &bs_ue_conj).scale(g(Link::BsUe));
    let h2 = conj_row(&bs_toward_drone, g(Link::BsDrone));
    let h3 = conj_row(&ris_toward_drone, g(Link::RisDrone));
    let h4 = ue_toward_drone.iter().map(|&z| g(Link::DroneUe) * z).collect();

    Ok(ChannelSet {
        h1,
        h2,
        h3,
        h4,
        h5,
        links,
        bs_toward_ris,
        ris_toward_bs,
        bs_toward_ue,
        ue_toward_bs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrays::element_offsets;
    use crate::scenario::{ArrayPlane, SPEED_OF_LIGHT};
    use std::f64::consts::{FRAC_PI_4, PI};

    fn small_config() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::rooftop_default();
        let half = SPEED_OF_LIGHT / cfg.carrier_hz / 2.0;
        let tiny = |plane| ArrayGeometry {
            count_a: 2,
            count_b: 2,
            spacing_a: half,
            spacing_b: half,
            plane,
        };
        cfg.bs_array = tiny(ArrayPlane::Yz);
        cfg.ris_array = tiny(ArrayPlane::Xy);
        cfg.ue_array = tiny(ArrayPlane::Xy);
        cfg
    }

    #[test]
    fn bs_ris_link_values() {
        let cfg = ScenarioConfig::rooftop_default();
        let ch: ChannelSet<f64> = build_channels(&cfg).unwrap();
        let l1 = ch.info(Link::BsRis);
        assert!((l1.distance - 0.173_205_08).abs() < 1e-8);
        let expected_rho = 10f64.powf(46.164 / 10.0);
        assert!((l1.path_loss / expected_rho - 1.0).abs() < 2e-4);
        assert_eq!(ch.h1.shape(), (1600, 100));
        assert_eq!(ch.h5.shape(), (16, 100));
        assert_eq!((ch.h2.len(), ch.h3.len(), ch.h4.len()), (100, 1600, 16));
    }

    #[test]
    fn link_one_angles() {
        let angles = channel_angles(&ScenarioConfig::rooftop_default()).unwrap();
        let a = angles[0];
        assert!((a.departure.azimuth - FRAC_PI_4).abs() < 1e-12);
        assert_eq!(a.departure, a.arrival);
    }

    #[test]
    fn drone_overhead_has_zero_azimuth() {
        let mut cfg = ScenarioConfig::rooftop_default();
        cfg.drone_position = Position3D::new(0.0, 0.0, 40.0);
        let angles = channel_angles(&cfg).unwrap();
        assert_eq!(angles[1].departure.azimuth, 0.0);
        assert_eq!(angles[1].departure.elevation, 0.0);
    }

    #[test]
    fn coincident_nodes_rejected() {
        let mut cfg = ScenarioConfig::rooftop_default();
        cfg.drone_position = cfg.ris_position;
        match build_channels::<f64>(&cfg) {
            Err(Error::CoincidentNodes(name)) => assert_eq!(name, "ris-drone"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn entry_moduli_and_ranks() {
        let cfg = ScenarioConfig::rooftop_default();
        let ch: ChannelSet<f64> = build_channels(&cfg).unwrap();
        let amp = |l: Link| ch.info(l).path_loss.sqrt().recip();
        let check = |v: &[Cx<f64>], a: f64| {
            for z in v {
                assert!((z.norm() / a - 1.0).abs() < 1e-12);
            }
        };
        check(ch.h1.as_slice(), amp(Link::BsRis));
        check(&ch.h2, amp(Link::BsDrone));
        check(&ch.h3, amp(Link::RisDrone));
        check(&ch.h4, amp(Link::DroneUe));
        check(ch.h5.as_slice(), amp(Link::BsUe));
        assert!((ch.h1.frobenius_norm() / (160_000f64.sqrt() * amp(Link::BsRis)) - 1.0).abs() < 1e-12);
        let h4_norm: f64 = ch.h4.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((h4_norm / (4.0 * amp(Link::DroneUe)) - 1.0).abs() < 1e-12);
        assert_eq!(ch.h5.rank(1e-10), 1);
        let small: ChannelSet<f64> = build_channels(&small_config()).unwrap();
        assert_eq!(small.h1.rank(1e-10), 1);
    }

    #[test]
    fn power_does_not_enter_channels() {
        let mut cfg = small_config();
        let a: ChannelSet<f64> = build_channels(&cfg).unwrap();
        cfg.tx_power_dbm += 17.0;
        let b: ChannelSet<f64> = build_channels(&cfg).unwrap();
        assert_eq!(a.h1.as_slice(), b.h1.as_slice());
        assert_eq!(a.h4, b.h4);
    }

    /// Entry (m, n) against a plane-wave phase written out element by element.
    #[test]
    fn blocks_match_elementwise_plane_wave() {
        let cfg = small_config();
        let ch: ChannelSet<f64> = build_channels(&cfg).unwrap();
        let k = 2.0 * PI / cfg.wavelength();
        let unit = |from: Position3D, to: Position3D| {
            let d = [to.x - from.x, to.y - from.y, to.z - from.z];
            let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            [d[0] / n, d[1] / n, d[2] / n]
        };
        let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let bs = element_offsets(&cfg.bs_array);
        let ris = element_offsets(&cfg.ris_array);
        let ue = element_offsets(&cfg.ue_array);

        // H1[m, n] = gain · exp(−jk·u·(p_m − q_n)), u from BS to RIS.
        let u1 = unit(cfg.bs_position, cfg.ris_position);
        let g1 = ch.info(Link::BsRis).gain;
        for (m, p) in ris.iter().enumerate() {
            for (n, q) in bs.iter().enumerate() {
                let want = g1 * cis(-k * (dot(u1, *p) - dot(u1, *q)));
                assert!((ch.h1[(m, n)] - want).norm() < 1e-12 * want.norm());
            }
        }
        let u2 = unit(cfg.bs_position, cfg.drone_position);
        for (n, q) in bs.iter().enumerate() {
            let want = ch.info(Link::BsDrone).gain * cis(k * dot(u2, *q));
            assert!((ch.h2[n] - want).norm() < 1e-12 * want.norm());
        }
        let u3 = unit(cfg.ris_position, cfg.drone_position);
        for (n, q) in ris.iter().enumerate() {
            let want = ch.info(Link::RisDrone).gain * cis(k * dot(u3, *q));
            assert!((ch.h3[n] - want).norm() < 1e-12 * want.norm());
        }
        let u4 = unit(cfg.drone_position, cfg.ue_position);
        for (m, p) in ue.iter().enumerate() {
            let want = ch.info(Link::DroneUe).gain * cis(-k * dot(u4, *p));
            assert!((ch.h4[m] - want).norm() < 1e-12 * want.norm());
        }
        let u5 = unit(cfg.bs_position, cfg.ue_position);
        for (m, p) in ue.iter().enumerate() {
            for (n, q) in bs.iter().enumerate() {
                let want = ch.info(Link::BsUe).gain * cis(-k * (dot(u5, *p) - dot(u5, *q)));
                assert!((ch.h5[(m, n)] - want).norm() < 1e-12 * want.norm());
            }
        }
    }

    /// The planar model is the far-field limit of the exact path phases
    /// `e^{−jk|r_m − t_n|}`; the conjugate convention would be off by ~π.
    #[test]
    fn planar_model_matches_exact_phases() {
        let cfg = small_config();
        let ch: ChannelSet<f64> = build_channels(&cfg).unwrap();
        let k = 2.0 * PI / cfg.wavelength();
        let bs = element_offsets(&cfg.bs_array);
        let ue = element_offsets(&cfg.ue_array);
        let mut worst = 0.0f64;
        for (m, p) in ue.iter().enumerate() {
            for (n, q) in bs.iter().enumerate() {
                let r = [cfg.ue_position.x + p[0], cfg.ue_position.y + p[1], cfg.ue_position.z + p[2]];
                let t = [cfg.bs_position.x + q[0], cfg.bs_position.y + q[1], cfg.bs_position.z + q[2]];
                let d = ((r[0] - t[0]).powi(2) + (r[1] - t[1]).powi(2) + (r[2] - t[2]).powi(2)).sqrt();
                let exact = cis(-k * d);
                let model = ch.h5[(m, n)] / ch.h5[(m, n)].norm();
                worst = worst.max((model * exact.conj()).arg().abs());
            }
        }
        assert!(worst < 0.01, "worst phase error {worst}");
    }

    #[test]
    fn factor_vectors_rebuild_blocks() {
        let cfg = small_config();
        let ch: ChannelSet<f64> = build_channels(&cfg).unwrap();
        let g1 = ch.info(Link::BsRis).gain;
        for m in 0..ch.m_r() {
            for n in 0..ch.m_b() {
                let z = g1 * ch.ris_toward_bs[m] * ch.bs_toward_ris[n].conj();
                assert!((z - ch.h1[(m, n)]).norm() < 1e-14);
            }
        }
    }
}
