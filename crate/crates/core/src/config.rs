//! Link description in engineering units (TOML) and its conversion to and
//! from the SI [`Link`].
//!
//! ```toml
//! cut = "center"
//!
//! [[spans]]
//! length_km = 100
//! alpha_db_km = 0.22
//! gamma_1_w_km = 1.3
//! d_ps_nm_km = 16.7
//! slope_ps_nm2_km = 0.057
//! fc_thz = 193.41
//! edfa_gain_db = "transparent"
//! nf_db = 5.5
//!
//! [[comb]]
//! center_thz = 193.41
//! baud_gbaud = 64
//! rolloff = 0.1
//! format = "16qam"
//! power_dbm = 0
//! ```

use std::f64::consts::{LN_10, PI};

use serde::{Deserialize, Serialize};

use crate::error::{NliError, Result};
use crate::model::{Channel, EdfaGain, Link, ModulationFormat, Profile, Span};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

const THZ: f64 = 1e12;
const GHZ: f64 = 1e9;
const KM: f64 = 1e3;
const PS: f64 = 1e-12;
const NM: f64 = 1e-9;

/// dB/km of power loss to Np/m of field attenuation.
#[inline]
pub fn db_km_to_field_np_m(db_km: f64) -> f64 {
    db_km * LN_10 / 20.0 / KM
}

#[inline]
pub fn field_np_m_to_db_km(np_m: f64) -> f64 {
    np_m * 20.0 * KM / LN_10
}

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Dispersion parameter D (s/m²) at wavelength `lambda` to β₂ (s²/m).
#[inline]
pub fn beta2_from_d(d: f64, lambda: f64) -> f64 {
    -d * lambda * lambda / (2.0 * PI * SPEED_OF_LIGHT)
}

/// β₃ (s³/m) from D (s/m²) and its slope S (s/m³) at `lambda`.
#[inline]
pub fn beta3_from_slope(d: f64, slope: f64, lambda: f64) -> f64 {
    let k = lambda * lambda / (2.0 * PI * SPEED_OF_LIGHT);
    k * k * (slope + 2.0 * d / lambda)
}

/// A scalar, or a table of `(frequency THz, value)` nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileSpec {
    Scalar(f64),
    Table { thz: Vec<f64>, values: Vec<f64> },
}

impl ProfileSpec {
    fn to_profile(&self, scale: impl Fn(f64) -> f64) -> Result<Profile> {
        match self {
            ProfileSpec::Scalar(v) => Ok(Profile::Constant(scale(*v))),
            ProfileSpec::Table { thz, values } => {
                Profile::table(thz.iter().map(|f| f * THZ).collect(), values.iter().map(|v| scale(*v)).collect())
            }
        }
    }

    fn from_profile(p: &Profile, scale: impl Fn(f64) -> f64) -> Self {
        match p {
            Profile::Constant(v) => ProfileSpec::Scalar(scale(*v)),
            Profile::Table { freqs, values } => ProfileSpec::Table {
                thz: freqs.iter().map(|f| f / THZ).collect(),
                values: values.iter().map(|v| scale(*v)).collect(),
            },
        }
    }
}

/// Amplifier gain: a dB value, a dB table, or `"transparent"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GainSpec {
    Db(ProfileSpec),
    Keyword(String),
}

/// Channel under test: an index into `comb`, or `"center"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CutSpec {
    Index(usize),
    Keyword(String),
}

impl Default for CutSpec {
    fn default() -> Self {
        CutSpec::Keyword("center".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpanConfig {
    pub length_km: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_db_km: Option<f64>,
    /// Frequency-dependent loss in dB/km.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_profile: Option<ProfileSpec>,
    /// Raman-like exponential loss term in dB/km at z = 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha1_db_km: Option<ProfileSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_1_km: Option<ProfileSpec>,
    pub gamma_1_w_km: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta2_ps2_km: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_ps_nm_km: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope_ps_nm2_km: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta3_ps3_km: Option<f64>,
    pub fc_thz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta0_1_km: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta1_ps_km: Option<f64>,
    pub edfa_gain_db: GainSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edfa_phase_rad: Option<ProfileSpec>,
    #[serde(default)]
    pub nf_db: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dcu_ps2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub center_thz: f64,
    pub baud_gbaud: f64,
    #[serde(default)]
    pub rolloff: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psd_w_hz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    #[serde(default)]
    pub cut: CutSpec,
    pub spans: Vec<SpanConfig>,
    pub comb: Vec<ChannelConfig>,
}

impl LinkConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| NliError::Config(e.message().to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| NliError::Config(e.to_string()))
    }
}

/// Parses a TOML document and converts it to SI units.
pub fn ingest_link_config(document: &str) -> Result<Link> {
    LinkConfig::from_toml(document)?.to_link()
}

fn require_positive(what: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(NliError::NonPositive { what, value })
    }
}

impl SpanConfig {
    fn to_span(&self, index: usize) -> Result<Span> {
        let length = require_positive("span length", self.length_km)? * KM;
        let fc = require_positive("expansion center", self.fc_thz)? * THZ;
        let alpha0 = match (&self.alpha_db_km, &self.alpha_profile) {
            (Some(a), None) => Profile::Constant(db_km_to_field_np_m(*a)),
            (None, Some(p)) => p.to_profile(db_km_to_field_np_m)?,
            (Some(_), Some(_)) => return Err(span_err(index, "give alpha_db_km or alpha_profile, not both")),
            (None, None) => return Err(span_err(index, "missing alpha_db_km")),
        };
        let alpha1 = match &self.alpha1_db_km {
            Some(p) => p.to_profile(db_km_to_field_np_m)?,
            None => Profile::Constant(0.0),
        };
        let sigma = match &self.sigma_1_km {
            Some(p) => p.to_profile(|v| v / KM)?,
            None if alpha1.is_zero() => Profile::Constant(0.0),
            None => return Err(span_err(index, "alpha1_db_km needs sigma_1_km")),
        };
        let lambda = SPEED_OF_LIGHT / fc;
        let ps_nm_km = PS / (NM * KM);
        let (beta2, beta3_from_d) = match (self.beta2_ps2_km, self.d_ps_nm_km) {
            (Some(b2), None) => {
                if self.slope_ps_nm2_km.is_some() {
                    return Err(span_err(index, "slope_ps_nm2_km requires d_ps_nm_km"));
                }
                (b2 * PS * PS / KM, None)
            }
            (None, Some(d)) => {
                let d_si = d * ps_nm_km;
                let b3 = self.slope_ps_nm2_km.map(|s| beta3_from_slope(d_si, s * ps_nm_km / NM, lambda));
                (beta2_from_d(d_si, lambda), b3)
            }
            (Some(_), Some(_)) => return Err(span_err(index, "give beta2_ps2_km or d_ps_nm_km, not both")),
            (None, None) => return Err(span_err(index, "missing beta2_ps2_km or d_ps_nm_km")),
        };
        let beta3 = match (self.beta3_ps3_km, beta3_from_d) {
            (Some(_), Some(_)) => return Err(span_err(index, "give beta3_ps3_km or slope_ps_nm2_km, not both")),
            (Some(b3), None) => b3 * PS * PS * PS / KM,
            (None, Some(b3)) => b3,
            (None, None) => 0.0,
        };
        let gain = match &self.edfa_gain_db {
            GainSpec::Keyword(k) if k.eq_ignore_ascii_case("transparent") => EdfaGain::Transparent,
            GainSpec::Keyword(k) => return Err(span_err(index, &format!("unknown gain keyword `{k}`"))),
            GainSpec::Db(p) => EdfaGain::Profile(p.to_profile(db_to_linear)?),
        };
        let span = Span {
            length,
            gamma: self.gamma_1_w_km / KM,
            alpha0,
            alpha1,
            sigma,
            beta2,
            beta3,
            fc,
            beta0: self.beta0_1_km.unwrap_or(0.0) / KM,
            beta1: self.beta1_ps_km.unwrap_or(0.0) * PS / KM,
            gain,
            edfa_phase: match &self.edfa_phase_rad {
                Some(p) => p.to_profile(|v| v)?,
                None => Profile::Constant(0.0),
            },
            dcu_beta2: self.dcu_ps2.unwrap_or(0.0) * PS * PS,
            noise_figure_db: self.nf_db,
        };
        span.validate(index)?;
        Ok(span)
    }

    /// Re-emits a span; dispersion always as β₂/β₃, loss as dB/km.
    pub fn from_span(span: &Span) -> Self {
        let (alpha_db_km, alpha_profile) = match &span.alpha0 {
            Profile::Constant(a) => (Some(field_np_m_to_db_km(*a)), None),
            p => (None, Some(ProfileSpec::from_profile(p, field_np_m_to_db_km))),
        };
        let raman = !span.alpha1.is_zero();
        SpanConfig {
            length_km: span.length / KM,
            alpha_db_km,
            alpha_profile,
            alpha1_db_km: raman.then(|| ProfileSpec::from_profile(&span.alpha1, field_np_m_to_db_km)),
            sigma_1_km: raman.then(|| ProfileSpec::from_profile(&span.sigma, |v| v * KM)),
            gamma_1_w_km: span.gamma * KM,
            beta2_ps2_km: Some(span.beta2 * KM / (PS * PS)),
            d_ps_nm_km: None,
            slope_ps_nm2_km: None,
            beta3_ps3_km: Some(span.beta3 * KM / (PS * PS * PS)),
            fc_thz: span.fc / THZ,
            beta0_1_km: (span.beta0 != 0.0).then_some(span.beta0 * KM),
            beta1_ps_km: (span.beta1 != 0.0).then_some(span.beta1 * KM / PS),
            edfa_gain_db: match &span.gain {
                EdfaGain::Transparent => GainSpec::Keyword("transparent".into()),
                EdfaGain::Profile(p) => GainSpec::Db(ProfileSpec::from_profile(p, linear_to_db)),
            },
            edfa_phase_rad: (!span.edfa_phase.is_zero()).then(|| ProfileSpec::from_profile(&span.edfa_phase, |v| v)),
            nf_db: span.noise_figure_db,
            dcu_ps2: (span.dcu_beta2 != 0.0).then_some(span.dcu_beta2 / (PS * PS)),
        }
    }
}

fn span_err(index: usize, msg: &str) -> NliError {
    NliError::InvalidSpan(format!("span {index}: {msg}"))
}

impl ChannelConfig {
    fn to_channel(&self, index: usize) -> Result<Channel> {
        let label = self.label.clone().unwrap_or_else(|| format!("ch{index}"));
        let err = |msg: &str| NliError::InvalidChannel(format!("channel `{label}`: {msg}"));
        let center = require_positive("channel center", self.center_thz)? * THZ;
        let baud = require_positive("symbol rate", self.baud_gbaud)? * GHZ;
        let psd = match (self.power_dbm, self.psd_w_hz) {
            (Some(p), None) => 1e-3 * db_to_linear(p) / baud,
            (None, Some(g)) => g,
            (Some(_), Some(_)) => return Err(err("give power_dbm or psd_w_hz, not both")),
            (None, None) => return Err(err("missing power_dbm or psd_w_hz")),
        };
        let phi = match (self.phi, &self.format) {
            (Some(phi), _) => phi,
            (None, Some(name)) => ModulationFormat::parse(name)?.phi(),
            (None, None) => return Err(err("missing format or phi")),
        };
        let ch = Channel::new(center - 0.5 * baud, center + 0.5 * baud, psd)
            .map_err(|e| match e {
                NliError::InvalidChannel(m) => err(&m),
                other => other,
            })?
            .with_format(self.rolloff, phi)
            .with_label(label);
        ch.validate()?;
        Ok(ch)
    }

    pub fn from_channel(ch: &Channel) -> Self {
        ChannelConfig {
            label: (!ch.label.is_empty()).then(|| ch.label.clone()),
            center_thz: ch.center() / THZ,
            baud_gbaud: ch.bandwidth() / GHZ,
            rolloff: ch.rolloff,
            format: None,
            phi: Some(ch.phi),
            power_dbm: None,
            psd_w_hz: Some(ch.psd),
        }
    }
}

impl LinkConfig {
    pub fn to_link(&self) -> Result<Link> {
        let spans = self.spans.iter().enumerate().map(|(i, s)| s.to_span(i)).collect::<Result<Vec<_>>>()?;
        let comb = self.comb.iter().enumerate().map(|(i, c)| c.to_channel(i)).collect::<Result<Vec<_>>>()?;
        let cut = match &self.cut {
            CutSpec::Index(i) => *i,
            CutSpec::Keyword(k) if k == "center" => {
                if comb.is_empty() {
                    0
                } else {
                    crate::model::nearest_to_midpoint(&comb)
                }
            }
            CutSpec::Keyword(k) => return Err(NliError::Config(format!("unknown cut `{k}` (expected an index or \"center\")"))),
        };
        Link::new(spans, comb, cut)
    }

    pub fn from_link(link: &Link) -> Self {
        LinkConfig {
            cut: CutSpec::Index(link.cut_index),
            spans: link.spans.iter().map(SpanConfig::from_span).collect(),
            comb: link.comb.iter().map(ChannelConfig::from_channel).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEMO: &str = r#"
cut = "center"

[[spans]]
length_km = 100
alpha_db_km = 0.22
gamma_1_w_km = 1.3
d_ps_nm_km = 16.7
fc_thz = 193.41
edfa_gain_db = "transparent"
nf_db = 5.5

[[comb]]
center_thz = 193.41
baud_gbaud = 64
rolloff = 0.1
format = "qpsk"
power_dbm = 0

[[comb]]
center_thz = 193.5
baud_gbaud = 32
format = "16qam"
psd_w_hz = 1e-14
"#;

    #[test]
    fn converts_units() {
        let link = ingest_link_config(DEMO).unwrap();
        let s = &link.spans[0];
        assert!((s.alpha0.eval(0.0) - 2.532_843_602_293_45e-5).abs() < 1e-18);
        assert_eq!(s.length, 1e5);
        let ch = &link.comb[0];
        assert_eq!(ch.f_start, 193.41e12 - 32e9);
        assert_eq!(ch.f_end, 193.41e12 + 32e9);
        assert!((ch.psd - 1e-3 / 64e9).abs() < 1e-30);
        assert!((link.comb[1].phi - 0.68).abs() < 1e-15);
    }

    #[test]
    fn beta2_from_dispersion_at_1550() {
        let lambda = 1550e-9;
        let b2 = beta2_from_d(16.7e-6, lambda);
        // ps²/km
        assert!((b2 * 1e3 / 1e-24 - (-21.299_984_931_566_4)).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_documents() {
        let overlap = DEMO.replace("center_thz = 193.5", "center_thz = 193.43");
        assert!(matches!(ingest_link_config(&overlap), Err(NliError::OverlappingChannels { .. })));
        let bad_len = DEMO.replace("length_km = 100", "length_km = -1");
        assert!(matches!(ingest_link_config(&bad_len), Err(NliError::NonPositive { .. })));
        let missing = DEMO.replace("gamma_1_w_km = 1.3\n", "");
        assert!(matches!(ingest_link_config(&missing), Err(NliError::Config(_))));
        let unknown = DEMO.replace("\"16qam\"", "\"ook\"");
        assert!(matches!(ingest_link_config(&unknown), Err(NliError::UnknownFormat(_))));
    }

    #[test]
    fn round_trip_preserves_quantities() {
        let link = ingest_link_config(DEMO).unwrap();
        let text = LinkConfig::from_link(&link).to_toml().unwrap();
        let back = ingest_link_config(&text).unwrap();
        let rel = |a: f64, b: f64| if b == 0.0 { a.abs() } else { ((a - b) / b).abs() };
        for (a, b) in back.spans.iter().zip(&link.spans) {
            assert!(rel(a.beta2, b.beta2) < 1e-12);
            assert!(rel(a.alpha0.eval(0.0), b.alpha0.eval(0.0)) < 1e-12);
            assert!(rel(a.gamma, b.gamma) < 1e-12);
        }
        for (a, b) in back.comb.iter().zip(&link.comb) {
            assert!(rel(a.f_start, b.f_start) < 1e-12);
            assert!(rel(a.f_end, b.f_end) < 1e-12);
            assert!(rel(a.psd, b.psd) < 1e-12);
        }
        assert_eq!(back.cut_index, link.cut_index);
    }
}
