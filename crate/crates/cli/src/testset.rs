//! Randomized full-band test systems.
//!
//! Every system draws from its own ChaCha8 stream: the generator is seeded
//! with `seed` and switched to stream number `index`, so any system can be
//! regenerated alone. Draw order within a system:
//!
//! 1. span count, then per span: length, noise figure, zero-dispersion
//!    wavelength;
//! 2. channels left to right from the lower band edge: symbol rate, roll-off,
//!    guard gap to the next channel, format; filling stops when the next
//!    channel would cross the upper edge or the channel cap is reached;
//! 3. the channel under test, when the policy is random.
//!
//! Dispersion follows a linear slope through the drawn zero-dispersion
//! wavelength, `D(λ) = S₀(λ − λ₀)`, with `S₀` fixed by `β₃` at the nominal
//! band wavelength; `β₂` is reported at the band center.

use std::f64::consts::PI;
use std::path::Path;
use std::str::FromStr;

use nli_core::config::{beta2_from_d, ChannelConfig, CutSpec, GainSpec, LinkConfig, SpanConfig, SPEED_OF_LIGHT};
use nli_core::ModulationFormat;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::output::{sha256_hex, write_all, TOOL_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Band {
    pub center_thz: f64,
    pub width_thz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberSpec {
    pub alpha_db_km: f64,
    pub gamma_1_w_km: f64,
    pub beta3_ps3_km: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lambda0Distribution {
    pub mean_nm: f64,
    pub std_nm: f64,
}

/// Which channel becomes the channel under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutPolicy {
    /// Nearest to the band center.
    Center,
    LeftOfCenter,
    RightOfCenter,
    Lowest,
    Highest,
    /// Uniform over the distinct channels the five positions name.
    #[default]
    Random,
}

impl FromStr for CutPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "center" => Ok(CutPolicy::Center),
            "left-of-center" => Ok(CutPolicy::LeftOfCenter),
            "right-of-center" => Ok(CutPolicy::RightOfCenter),
            "lowest" => Ok(CutPolicy::Lowest),
            "highest" => Ok(CutPolicy::Highest),
            "random" => Ok(CutPolicy::Random),
            _ => Err(format!("unknown CUT policy `{s}`")),
        }
    }
}

/// Parameters of the generator. `Default` is the full-band campaign;
/// [`TestSystemSpec::desk`] is a reduced variant the quadrature reference can
/// handle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TestSystemSpec {
    pub seed: u64,
    pub band: Band,
    pub symbol_rates_gbaud: Vec<f64>,
    pub rolloff_range: [f64; 2],
    /// Edge-to-edge gap between adjacent channels.
    pub guard_gap_range_ghz: [f64; 2],
    pub formats: Vec<String>,
    pub fiber: FiberSpec,
    pub lambda0_distribution: Lambda0Distribution,
    /// Wavelength at which the band center sits for the `λ₀ → β₂` mapping.
    pub nominal_wavelength_nm: f64,
    pub span_length_range_km: [f64; 2],
    pub nf_range_db: [f64; 2],
    /// Inclusive.
    pub span_count_range: [usize; 2],
    pub max_channels: Option<usize>,
    /// Every channel gets the PSD of this power spread over the reference rate.
    pub launch_dbm_per_channel: f64,
    pub launch_reference_gbaud: f64,
    pub cut_policy: CutPolicy,
}

impl Default for TestSystemSpec {
    fn default() -> Self {
        TestSystemSpec {
            seed: 0,
            band: Band { center_thz: 193.41, width_thz: 5.0 },
            symbol_rates_gbaud: vec![32.0, 64.0, 96.0, 128.0],
            rolloff_range: [0.05, 0.25],
            guard_gap_range_ghz: [5.0, 20.0],
            formats: ["qpsk", "8qam", "16qam", "32qam", "64qam"].map(String::from).to_vec(),
            fiber: FiberSpec { alpha_db_km: 0.22, gamma_1_w_km: 1.77, beta3_ps3_km: 0.121 },
            lambda0_distribution: Lambda0Distribution { mean_nm: 1550.0, std_nm: 5.0 },
            nominal_wavelength_nm: 1550.0,
            span_length_range_km: [80.0, 120.0],
            nf_range_db: [6.0, 7.0],
            span_count_range: [1, 16],
            max_channels: None,
            launch_dbm_per_channel: 0.0,
            launch_reference_gbaud: 32.0,
            cut_policy: CutPolicy::Random,
        }
    }
}

impl TestSystemSpec {
    /// At most 7 channels in 0.6 THz and at most 5 spans.
    pub fn desk() -> Self {
        TestSystemSpec {
            band: Band { center_thz: 193.41, width_thz: 0.6 },
            span_count_range: [1, 5],
            max_channels: Some(7),
            ..Self::default()
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let spec: TestSystemSpec = toml::from_str(text).map_err(|e| CliError::Config(format!("test-set spec: {}", e.message())))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: &str| Err(CliError::Config(format!("test-set spec: {msg}")));
        let range_ok = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] <= r[1];
        if !(self.band.width_thz > 0.0 && self.band.center_thz > self.band.width_thz / 2.0) {
            return bad("band width must be positive and the band above 0 Hz");
        }
        if self.symbol_rates_gbaud.is_empty() || self.symbol_rates_gbaud.iter().any(|r| !(*r > 0.0)) {
            return bad("symbol rates must be a non-empty list of positive values");
        }
        if !range_ok(self.rolloff_range) || self.rolloff_range[0] < 0.0 || self.rolloff_range[1] > 1.0 {
            return bad("roll-off range must lie in [0, 1]");
        }
        if !range_ok(self.guard_gap_range_ghz) || self.guard_gap_range_ghz[0] < 0.0 {
            return bad("guard gap range must be non-negative");
        }
        if self.formats.is_empty() {
            return bad("format list is empty");
        }
        for f in &self.formats {
            ModulationFormat::parse(f).map_err(|e| CliError::Config(format!("test-set spec: {e}")))?;
        }
        if !range_ok(self.span_length_range_km) || !(self.span_length_range_km[0] > 0.0) {
            return bad("span lengths must be positive");
        }
        if !range_ok(self.nf_range_db) {
            return bad("noise figure range is invalid");
        }
        if self.span_count_range[0] == 0 || self.span_count_range[0] > self.span_count_range[1] {
            return bad("span count range must start at 1 or more");
        }
        if self.max_channels == Some(0) {
            return bad("max_channels must be at least 1");
        }
        if !(self.lambda0_distribution.std_nm >= 0.0) || !(self.nominal_wavelength_nm > 0.0) || !(self.launch_reference_gbaud > 0.0) {
            return bad("wavelengths and reference rate must be positive");
        }
        if !(self.fiber.alpha_db_km > 0.0 && self.fiber.gamma_1_w_km >= 0.0 && self.fiber.beta3_ps3_km.is_finite()) {
            return bad("fiber parameters are invalid");
        }
        Ok(())
    }
}

/// One generated system and the bookkeeping the manifest records.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedSystem {
    pub index: usize,
    pub config: LinkConfig,
    /// The distinct channels the five CUT positions name, in policy order.
    pub cut_candidates: Vec<usize>,
    pub cut: usize,
    pub lambda0_nm: Vec<f64>,
}

/// `β₂` in ps²/km at the nominal wavelength for a span whose dispersion
/// vanishes at `lambda0_nm`.
pub fn beta2_for_zero_dispersion(beta3_ps3_km: f64, nominal_nm: f64, lambda0_nm: f64) -> f64 {
    let lambda = nominal_nm * 1e-9;
    let beta3 = beta3_ps3_km * 1e-36 / 1e3;
    let k = 2.0 * PI * SPEED_OF_LIGHT / (lambda * lambda);
    let slope = beta3 * k * k;
    let d = slope * (lambda - lambda0_nm * 1e-9);
    beta2_from_d(d, lambda) * 1e3 / 1e-24
}

fn uniform(rng: &mut ChaCha8Rng, r: [f64; 2]) -> f64 {
    if r[0] == r[1] {
        r[0]
    } else {
        rng.random_range(r[0]..r[1])
    }
}

/// Center, left and right of center, lowest, highest; duplicates dropped.
pub fn cut_candidates(centers_thz: &[f64], band_center_thz: f64) -> Vec<usize> {
    let n = centers_thz.len();
    let mut center = 0;
    for (i, c) in centers_thz.iter().enumerate() {
        if (c - band_center_thz).abs() < (centers_thz[center] - band_center_thz).abs() {
            center = i;
        }
    }
    let mut out = Vec::with_capacity(5);
    for i in [center, center.saturating_sub(1), (center + 1).min(n - 1), 0, n - 1] {
        if !out.contains(&i) {
            out.push(i);
        }
    }
    out
}

fn pick_cut(policy: CutPolicy, candidates: &[usize], n: usize, rng: &mut ChaCha8Rng) -> usize {
    let center = candidates[0];
    match policy {
        CutPolicy::Center => center,
        CutPolicy::LeftOfCenter => center.saturating_sub(1),
        CutPolicy::RightOfCenter => (center + 1).min(n - 1),
        CutPolicy::Lowest => 0,
        CutPolicy::Highest => n - 1,
        CutPolicy::Random => *candidates.choose(rng).expect("at least one channel"),
    }
}

fn generate_one(spec: &TestSystemSpec, index: usize) -> Result<GeneratedSystem, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64);

    let n_spans = rng.random_range(spec.span_count_range[0]..=spec.span_count_range[1]);
    let lambda0 = Normal::new(spec.lambda0_distribution.mean_nm, spec.lambda0_distribution.std_nm)
        .map_err(|e| CliError::Config(format!("test-set spec: {e}")))?;
    let mut spans = Vec::with_capacity(n_spans);
    let mut lambda0_nm = Vec::with_capacity(n_spans);
    for _ in 0..n_spans {
        let length_km = uniform(&mut rng, spec.span_length_range_km);
        let nf_db = uniform(&mut rng, spec.nf_range_db);
        let l0 = lambda0.sample(&mut rng);
        lambda0_nm.push(l0);
        spans.push(SpanConfig {
            length_km,
            alpha_db_km: Some(spec.fiber.alpha_db_km),
            alpha_profile: None,
            alpha1_db_km: None,
            sigma_1_km: None,
            gamma_1_w_km: spec.fiber.gamma_1_w_km,
            beta2_ps2_km: Some(beta2_for_zero_dispersion(spec.fiber.beta3_ps3_km, spec.nominal_wavelength_nm, l0)),
            d_ps_nm_km: None,
            slope_ps_nm2_km: None,
            beta3_ps3_km: Some(spec.fiber.beta3_ps3_km),
            fc_thz: spec.band.center_thz,
            beta0_1_km: None,
            beta1_ps_km: None,
            edfa_gain_db: GainSpec::Keyword("transparent".into()),
            edfa_phase_rad: None,
            nf_db,
            dcu_ps2: None,
        });
    }

    let lo = (spec.band.center_thz - 0.5 * spec.band.width_thz) * 1e3;
    let hi = (spec.band.center_thz + 0.5 * spec.band.width_thz) * 1e3;
    let psd_dbm_per_hz = spec.launch_dbm_per_channel - 10.0 * (spec.launch_reference_gbaud * 1e9).log10();
    let psd = 1e-3 * 10f64.powf(psd_dbm_per_hz / 10.0);
    let cap = spec.max_channels.unwrap_or(usize::MAX);
    let mut comb = Vec::new();
    let mut edge_ghz = lo;
    while comb.len() < cap {
        let baud = *spec.symbol_rates_gbaud.choose(&mut rng).expect("validated non-empty");
        let rolloff = uniform(&mut rng, spec.rolloff_range);
        let gap = uniform(&mut rng, spec.guard_gap_range_ghz);
        let format = spec.formats.choose(&mut rng).expect("validated non-empty").clone();
        if edge_ghz + baud > hi {
            break;
        }
        let center_ghz = edge_ghz + 0.5 * baud;
        comb.push(ChannelConfig {
            label: Some(format!("ch{}", comb.len())),
            center_thz: center_ghz / 1e3,
            baud_gbaud: baud,
            rolloff,
            format: Some(format),
            phi: None,
            power_dbm: None,
            psd_w_hz: Some(psd),
        });
        edge_ghz += baud + gap;
    }
    if comb.is_empty() {
        return Err(CliError::Config("test-set spec: the band cannot hold a single channel".into()));
    }

    let centers: Vec<f64> = comb.iter().map(|c| c.center_thz).collect();
    let candidates = cut_candidates(&centers, spec.band.center_thz);
    let cut = pick_cut(spec.cut_policy, &candidates, centers.len(), &mut rng);
    let config = LinkConfig { cut: CutSpec::Index(cut), spans, comb };
    config.to_link().map_err(|e| CliError::Config(format!("generated system {index} is invalid: {e}")))?;
    Ok(GeneratedSystem { index, config, cut_candidates: candidates, cut, lambda0_nm })
}

/// Systems `0..count` of `spec`.
pub fn generate_testset(spec: &TestSystemSpec, count: usize) -> Result<Vec<GeneratedSystem>, CliError> {
    spec.validate()?;
    (0..count).map(|i| generate_one(spec, i)).collect()
}

pub fn system_file_name(index: usize) -> String {
    format!("system_{index:04}.toml")
}

pub const TESTSET_MANIFEST: &str = "testset.json";

#[derive(Serialize)]
struct SystemEntry {
    file: String,
    sha256: String,
    channels: usize,
    spans: usize,
    cut: usize,
    /// De-duplicated when the comb has fewer than five channels.
    cut_candidates: Vec<usize>,
}

#[derive(Serialize)]
struct TestsetManifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: u64,
    count: usize,
    rng: &'static str,
    spec_sha256: String,
    spec: &'a TestSystemSpec,
    systems: Vec<SystemEntry>,
}

/// Generates and writes the systems plus `testset.json` into `out`.
pub fn write_testset(spec: &TestSystemSpec, count: usize, out: &Path) -> Result<Vec<GeneratedSystem>, CliError> {
    let systems = generate_testset(spec, count)?;
    let mut files = Vec::with_capacity(systems.len() + 1);
    let mut entries = Vec::with_capacity(systems.len());
    for s in &systems {
        let text = s.config.to_toml()?;
        let name = system_file_name(s.index);
        entries.push(SystemEntry {
            file: name.clone(),
            sha256: sha256_hex(text.as_bytes()),
            channels: s.config.comb.len(),
            spans: s.config.spans.len(),
            cut: s.cut,
            cut_candidates: s.cut_candidates.clone(),
        });
        files.push((name, text.into_bytes()));
    }
    let manifest = TestsetManifest {
        tool: "nli",
        version: TOOL_VERSION,
        command: "gen-testset",
        seed: spec.seed,
        count,
        rng: "ChaCha8, seeded from the 64-bit seed, stream = system index",
        spec_sha256: sha256_hex(spec.to_toml().as_bytes()),
        spec,
        systems: entries,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    files.push((TESTSET_MANIFEST.to_string(), json.into_bytes()));
    write_all(out, &files)?;
    Ok(systems)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_dispersion_at_nominal_wavelength() {
        assert_eq!(beta2_for_zero_dispersion(0.121, 1550.0, 1550.0), 0.0);
        // shorter λ₀ puts the band in the anomalous regime
        let b = beta2_for_zero_dispersion(0.121, 1550.0, 1545.0);
        assert!(b < 0.0 && b > -1.0, "{b}");
    }

    #[test]
    fn candidates_collapse_for_small_combs() {
        assert_eq!(cut_candidates(&[193.41], 193.41), vec![0]);
        assert_eq!(cut_candidates(&[193.3, 193.4], 193.41), vec![1, 0]);
        assert_eq!(cut_candidates(&[193.2, 193.3, 193.4, 193.5, 193.6, 193.7], 193.41), vec![2, 1, 3, 0, 5]);
    }

    #[test]
    fn spec_round_trips_through_toml() {
        let spec = TestSystemSpec::desk();
        assert_eq!(TestSystemSpec::from_toml(&spec.to_toml()).unwrap(), spec);
        assert_eq!(TestSystemSpec::from_toml("").unwrap(), TestSystemSpec::default());
        assert!(TestSystemSpec::from_toml("band = { center_thz = 193.41, width_thz = -1.0 }").is_err());
    }
}
