//! Scenario configuration, link geometry and free-space path loss.
//!
//! All distances are meters, frequencies Hz and powers dBm on input. Linear
//! conversions live here so the rest of the crate never touches dB. Linear
//! powers are expressed in milliwatts.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Thermal noise floor, dBm/Hz.
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Position3D {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3D {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

// Written as `[x, y, z]`; `{"x": .., "y": .., "z": ..}` is accepted on input too.
impl Serialize for Position3D {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.x, self.y, self.z].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Position3D {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Array([f64; 3]),
            Object { x: f64, y: f64, z: f64 },
        }
        Ok(match Repr::deserialize(d)? {
            Repr::Array([x, y, z]) => Position3D { x, y, z },
            Repr::Object { x, y, z } => Position3D { x, y, z },
        })
    }
}

/// Which global plane a planar array is parallel to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArrayPlane {
    /// Axes (y, z). The BS array.
    Yz,
    /// Axes (x, y). The RIS and UE arrays.
    Xy,
}

/// Uniform planar array: `count_a × count_b` elements, `a` being the outer
/// (slower) Kronecker axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArrayGeometry {
    pub count_a: usize,
    pub count_b: usize,
    pub spacing_a: f64,
    pub spacing_b: f64,
    pub plane: ArrayPlane,
}

impl ArrayGeometry {
    pub fn len(&self) -> usize {
        self.count_a * self.count_b
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn validate(&self, field: &'static str) -> Result<()> {
        if self.count_a == 0 || self.count_b == 0 {
            return Err(Error::invalid(field, "element counts must be at least 1"));
        }
        for s in [self.spacing_a, self.spacing_b] {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::invalid(field, format!("spacing {s} must be positive")));
            }
        }
        Ok(())
    }
}

/// RIS training-profile design.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RisScheme {
    /// Phases i.i.d. uniform on [0, 2π).
    #[default]
    Random,
    /// Phases i.i.d. uniform on {0, π}.
    OneBit,
    /// First K columns of the M_R-point DFT matrix.
    Dft,
    /// RIS-free baseline.
    None,
}

impl RisScheme {
    pub fn name(self) -> &'static str {
        match self {
            RisScheme::Random => "random",
            RisScheme::OneBit => "onebit",
            RisScheme::Dft => "dft",
            RisScheme::None => "none",
        }
    }
}

impl fmt::Display for RisScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RisScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(RisScheme::Random),
            "onebit" | "one-bit" => Ok(RisScheme::OneBit),
            "dft" => Ok(RisScheme::Dft),
            "none" => Ok(RisScheme::None),
            other => Err(Error::Scheme(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub bs_position: Position3D,
    pub ris_position: Position3D,
    pub ue_position: Position3D,
    pub drone_position: Position3D,
    pub bs_array: ArrayGeometry,
    pub ris_array: ArrayGeometry,
    pub ue_array: ArrayGeometry,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_dbm: f64,
    pub tx_power_dbm: f64,
    pub slots_k: usize,
    pub zeta: f64,
    pub p_fa: f64,
    pub ris_scheme: RisScheme,
    pub seed: u64,
}

impl ScenarioConfig {
    /// Rooftop deployment: 10×10 BS, 40×40 RIS,
    /// 4×4 UE at 28 GHz with half-wavelength spacing, K = 90, ζ = 0.3,
    /// P_FA = 0.001 and a 30 dBm transmit power.
    pub fn rooftop_default() -> Self {
        let carrier_hz = 28e9;
        let bandwidth_hz = 10e6;
        let half = SPEED_OF_LIGHT / carrier_hz / 2.0;
        Self {
            bs_position: Position3D::new(0.0, 0.0, 28.0),
            ris_position: Position3D::new(0.1, 0.1, 27.9),
            ue_position: Position3D::new(2.0, 2.0, 27.0),
            drone_position: Position3D::new(1.0, 1.0, 29.5),
            bs_array: ArrayGeometry {
                count_a: 10,
                count_b: 10,
                spacing_a: half,
                spacing_b: half,
                plane: ArrayPlane::Yz,
            },
            ris_array: ArrayGeometry {
                count_a: 40,
                count_b: 40,
                spacing_a: half,
                spacing_b: half,
                plane: ArrayPlane::Xy,
            },
            ue_array: ArrayGeometry {
                count_a: 4,
                count_b: 4,
                spacing_a: half,
                spacing_b: half,
                plane: ArrayPlane::Xy,
            },
            carrier_hz,
            bandwidth_hz,
            noise_dbm: thermal_noise_dbm(bandwidth_hz),
            tx_power_dbm: 30.0,
            slots_k: 90,
            zeta: 0.3,
            p_fa: 1e-3,
            ris_scheme: RisScheme::Random,
            seed: 0,
        }
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    pub fn noise_power_mw(&self) -> f64 {
        dbm_to_mw(self.noise_dbm)
    }

    pub fn tx_power_mw(&self) -> f64 {
        dbm_to_mw(self.tx_power_dbm)
    }

    pub fn m_b(&self) -> usize {
        self.bs_array.len()
    }

    pub fn m_r(&self) -> usize {
        self.ris_array.len()
    }

    pub fn m_u(&self) -> usize {
        self.ue_array.len()
    }

    pub fn validate(&self) -> Result<()> {
        for (field, p) in [
            ("bs_position", self.bs_position),
            ("ris_position", self.ris_position),
            ("ue_position", self.ue_position),
            ("drone_position", self.drone_position),
        ] {
            if !p.is_finite() {
                return Err(Error::invalid(field, "coordinates must be finite"));
            }
        }
        self.bs_array.validate("bs_array")?;
        self.ris_array.validate("ris_array")?;
        self.ue_array.validate("ue_array")?;
        positive("carrier_hz", self.carrier_hz)?;
        positive("bandwidth_hz", self.bandwidth_hz)?;
        if !self.noise_dbm.is_finite() {
            return Err(Error::invalid("noise_dbm", "must be finite"));
        }
        if !self.tx_power_dbm.is_finite() {
            return Err(Error::invalid("tx_power_dbm", "must be finite"));
        }
        if self.slots_k == 0 {
            return Err(Error::invalid("slots_k", "must be at least 1"));
        }
        positive("zeta", self.zeta)?;
        if !(self.p_fa > 0.0 && self.p_fa < 1.0) {
            return Err(Error::invalid(
                "p_fa",
                format!("{} is not a probability in (0, 1)", self.p_fa),
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&RawScenario::from(self)).expect("config serializes")
    }
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("{v} must be positive")))
    }
}

/// Parses and validates a JSON scenario.
///
/// Optional fields: array spacings (λ/2), `noise_dbm` (thermal floor over the
/// bandwidth), `ris_scheme` (random) and `seed` (0).
pub fn load_scenario(source: &str) -> Result<ScenarioConfig> {
    let raw: RawScenario = serde_json::from_str(source).map_err(|e| Error::Parse(e.to_string()))?;
    let cfg = raw.into_config()?;
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    bs_position: Position3D,
    ris_position: Position3D,
    ue_position: Position3D,
    drone_position: Position3D,
    bs_array: RawYzArray,
    ris_array: RawXyArray,
    ue_array: RawXyArray,
    carrier_hz: f64,
    bandwidth_hz: f64,
    #[serde(default)]
    noise_dbm: Option<f64>,
    tx_power_dbm: f64,
    slots_k: usize,
    zeta: f64,
    p_fa: f64,
    #[serde(default)]
    ris_scheme: RisScheme,
    #[serde(default)]
    seed: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawYzArray {
    ny: usize,
    nz: usize,
    #[serde(default)]
    dy: Option<f64>,
    #[serde(default)]
    dz: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawXyArray {
    nx: usize,
    ny: usize,
    #[serde(default)]
    dx: Option<f64>,
    #[serde(default)]
    dy: Option<f64>,
}

impl RawScenario {
    fn into_config(self) -> Result<ScenarioConfig> {
        positive("carrier_hz", self.carrier_hz)?;
        positive("bandwidth_hz", self.bandwidth_hz)?;
        let half = SPEED_OF_LIGHT / self.carrier_hz / 2.0;
        let xy = |a: RawXyArray| ArrayGeometry {
            count_a: a.nx,
            count_b: a.ny,
            spacing_a: a.dx.unwrap_or(half),
            spacing_b: a.dy.unwrap_or(half),
            plane: ArrayPlane::Xy,
        };
        Ok(ScenarioConfig {
            bs_position: self.bs_position,
            ris_position: self.ris_position,
            ue_position: self.ue_position,
            drone_position: self.drone_position,
            bs_array: ArrayGeometry {
                count_a: self.bs_array.ny,
                count_b: self.bs_array.nz,
                spacing_a: self.bs_array.dy.unwrap_or(half),
                spacing_b: self.bs_array.dz.unwrap_or(half),
                plane: ArrayPlane::Yz,
            },
            ris_array: xy(self.ris_array),
            ue_array: xy(self.ue_array),
            carrier_hz: self.carrier_hz,
            bandwidth_hz: self.bandwidth_hz,
            noise_dbm: self
                .noise_dbm
                .unwrap_or_else(|| thermal_noise_dbm(self.bandwidth_hz)),
            tx_power_dbm: self.tx_power_dbm,
            slots_k: self.slots_k,
            zeta: self.zeta,
            p_fa: self.p_fa,
            ris_scheme: self.ris_scheme,
            seed: self.seed,
        })
    }
}

impl From<&ScenarioConfig> for RawScenario {
    fn from(c: &ScenarioConfig) -> Self {
        let xy = |g: &ArrayGeometry| RawXyArray {
            nx: g.count_a,
            ny: g.count_b,
            dx: Some(g.spacing_a),
            dy: Some(g.spacing_b),
        };
        RawScenario {
            bs_position: c.bs_position,
            ris_position: c.ris_position,
            ue_position: c.ue_position,
            drone_position: c.drone_position,
            bs_array: RawYzArray {
                ny: c.bs_array.count_a,
                nz: c.bs_array.count_b,
                dy: Some(c.bs_array.spacing_a),
                dz: Some(c.bs_array.spacing_b),
            },
            ris_array: xy(&c.ris_array),
            ue_array: xy(&c.ue_array),
            carrier_hz: c.carrier_hz,
            bandwidth_hz: c.bandwidth_hz,
            noise_dbm: Some(c.noise_dbm),
            tx_power_dbm: c.tx_power_dbm,
            slots_k: c.slots_k,
            zeta: c.zeta,
            p_fa: c.p_fa,
            ris_scheme: c.ris_scheme,
            seed: c.seed,
        }
    }
}

/// Distance and direction of `to − from`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkGeometry {
    pub distance: f64,
    /// Angle of (Δx, Δy) from +x toward +y, in (−π, π]. Zero when Δx = Δy = 0.
    pub azimuth: f64,
    /// Polar angle from +z, in [0, π].
    pub elevation: f64,
}

impl LinkGeometry {
    /// Unit direction vector.
    pub fn direction(&self) -> [f64; 3] {
        let (se, ce) = self.elevation.sin_cos();
        let (sa, ca) = self.azimuth.sin_cos();
        [ca * se, sa * se, ce]
    }
}

pub fn link_geometry(from: Position3D, to: Position3D) -> Result<LinkGeometry> {
    let (dx, dy, dz) = (to.x - from.x, to.y - from.y, to.z - from.z);
    let distance = (dx * dx + dy * dy + dz * dz).sqrt();
    if !(distance > 0.0) {
        return Err(Error::domain("link_geometry", "endpoints coincide"));
    }
    let planar = dx.hypot(dy);
    let azimuth = if planar <= 1e-12 * distance {
        0.0
    } else {
        dy.atan2(dx)
    };
    let elevation = (dz / distance).clamp(-1.0, 1.0).acos();
    Ok(LinkGeometry {
        distance,
        azimuth,
        elevation,
    })
}

/// Free-space path loss in dB: `20·log10(d) − 87.55 + 20·log10(f_kHz)`.
pub fn path_loss_db(distance_m: f64, carrier_hz: f64) -> Result<f64> {
    if !(distance_m > 0.0) || !(carrier_hz > 0.0) {
        return Err(Error::domain(
            "path_loss_db",
            format!("distance {distance_m} and carrier {carrier_hz} must be positive"),
        ));
    }
    Ok(20.0 * distance_m.log10() - 87.55 + 20.0 * (carrier_hz / 1e3).log10())
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    db_to_linear(dbm)
}

/// Amplitude factor `1/√ρ` for a path loss given in dB.
pub fn path_amplitude(loss_db: f64) -> f64 {
    db_to_linear(loss_db).sqrt().recip()
}

/// `−174 dBm/Hz + 10·log10(B)`.
pub fn thermal_noise_dbm(bandwidth_hz: f64) -> f64 {
    THERMAL_NOISE_DBM_PER_HZ + 10.0 * bandwidth_hz.log10()
}
