//! Domain types in internal SI units.
//!
//! Frequencies are Hz, lengths m, powers W, PSDs W/Hz. Attenuation is a
//! field coefficient in Np/m; dispersion coefficients are s²/m and s³/m.

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{NliError, Result};

/// A frequency profile: a constant, or a piecewise-linear table with flat
/// extrapolation beyond its end points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Profile {
    Constant(f64),
    Table { freqs: Vec<f64>, values: Vec<f64> },
}

impl Profile {
    /// Builds a table profile; nodes must be strictly increasing.
    pub fn table(freqs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if freqs.is_empty() || freqs.len() != values.len() {
            return Err(NliError::InvalidProfile("table needs equal, non-zero numbers of nodes and values".into()));
        }
        if freqs.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(NliError::InvalidProfile("non-finite table entry".into()));
        }
        if freqs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(NliError::InvalidProfile("table frequencies must be strictly increasing".into()));
        }
        if freqs.len() == 1 {
            return Ok(Profile::Constant(values[0]));
        }
        Ok(Profile::Table { freqs, values })
    }

    pub fn eval(&self, f: f64) -> f64 {
        match self {
            Profile::Constant(v) => *v,
            Profile::Table { freqs, values } => {
                let last = freqs.len() - 1;
                if f <= freqs[0] {
                    return values[0];
                }
                if f >= freqs[last] {
                    return values[last];
                }
                let i = freqs.partition_point(|&x| x <= f) - 1;
                let t = (f - freqs[i]) / (freqs[i + 1] - freqs[i]);
                values[i] + t * (values[i + 1] - values[i])
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Profile::Constant(v) => *v == 0.0,
            Profile::Table { values, .. } => values.iter().all(|v| *v == 0.0),
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Profile::Constant(v) => Some(*v),
            Profile::Table { values, .. } => {
                let first = values[0];
                values.iter().all(|v| *v == first).then_some(first)
            }
        }
    }

    /// Applies `op` to every value, keeping the nodes.
    pub fn map(&self, op: impl Fn(f64) -> f64) -> Profile {
        match self {
            Profile::Constant(v) => Profile::Constant(op(*v)),
            Profile::Table { freqs, values } => Profile::Table {
                freqs: freqs.clone(),
                values: values.iter().map(|v| op(*v)).collect(),
            },
        }
    }

    fn all_finite(&self) -> bool {
        match self {
            Profile::Constant(v) => v.is_finite(),
            Profile::Table { values, .. } => values.iter().all(|v| v.is_finite()),
        }
    }
}

/// Amplifier at the end of a span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EdfaGain {
    /// Exactly compensates the span's intrinsic loss: Γ(f) = exp(2·α₀(f)·L).
    Transparent,
    /// Linear power gain versus frequency.
    Profile(Profile),
}

/// One WDM carrier replaced by its rectangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub f_start: f64,
    pub f_end: f64,
    /// Launch PSD, constant over the rectangle.
    pub psd: f64,
    pub rolloff: f64,
    /// Excess-kurtosis constant of the modulation format.
    pub phi: f64,
    pub label: String,
}

impl Channel {
    pub fn new(f_start: f64, f_end: f64, psd: f64) -> Result<Self> {
        let ch = Channel { f_start, f_end, psd, rolloff: 0.0, phi: 1.0, label: String::new() };
        ch.validate()?;
        Ok(ch)
    }

    /// Rectangle of width `baud` centred at `center`, height `power / baud`.
    pub fn from_center(center: f64, baud: f64, power: f64) -> Result<Self> {
        if !(baud > 0.0) {
            return Err(NliError::NonPositive { what: "symbol rate", value: baud });
        }
        Channel::new(center - 0.5 * baud, center + 0.5 * baud, power / baud)
    }

    pub fn with_format(mut self, rolloff: f64, phi: f64) -> Self {
        self.rolloff = rolloff;
        self.phi = phi;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    #[inline]
    pub fn bandwidth(&self) -> f64 {
        self.f_end - self.f_start
    }

    #[inline]
    pub fn center(&self) -> f64 {
        0.5 * (self.f_start + self.f_end)
    }

    pub fn power(&self) -> f64 {
        self.psd * self.bandwidth()
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.f_start, self.f_end, self.psd, self.rolloff, self.phi].iter().all(|v| v.is_finite());
        if !finite {
            return Err(NliError::InvalidChannel(format!("non-finite field in channel `{}`", self.label)));
        }
        if !(self.f_end > self.f_start) {
            return Err(NliError::InvalidChannel(format!(
                "channel `{}` has end {} Hz not above start {} Hz",
                self.label, self.f_end, self.f_start
            )));
        }
        if self.psd < 0.0 {
            return Err(NliError::InvalidChannel(format!("channel `{}` has negative PSD", self.label)));
        }
        if !(0.0..=1.0).contains(&self.rolloff) {
            return Err(NliError::InvalidChannel(format!("channel `{}` roll-off outside [0, 1]", self.label)));
        }
        Ok(())
    }
}

/// One fiber span and the amplifier that follows it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Span {
    pub length: f64,
    pub gamma: f64,
    pub alpha0: Profile,
    pub alpha1: Profile,
    pub sigma: Profile,
    pub beta2: f64,
    pub beta3: f64,
    /// Expansion center of the dispersion Taylor series.
    pub fc: f64,
    /// Stored for round trips; phase terms drop out of the incoherent model.
    pub beta0: f64,
    pub beta1: f64,
    pub gain: EdfaGain,
    pub edfa_phase: Profile,
    /// Lumped accumulated dispersion of a compensating unit, s².
    pub dcu_beta2: f64,
    pub noise_figure_db: f64,
}

impl Span {
    /// Flat-loss span with a transparent amplifier and no Raman term.
    pub fn flat(length: f64, alpha0: f64, gamma: f64, beta2: f64, beta3: f64, fc: f64) -> Self {
        Span {
            length,
            gamma,
            alpha0: Profile::Constant(alpha0),
            alpha1: Profile::Constant(0.0),
            sigma: Profile::Constant(0.0),
            beta2,
            beta3,
            fc,
            beta0: 0.0,
            beta1: 0.0,
            gain: EdfaGain::Transparent,
            edfa_phase: Profile::Constant(0.0),
            dcu_beta2: 0.0,
            noise_figure_db: 0.0,
        }
    }

    /// Linear power gain of the trailing amplifier at `f`.
    pub fn gain_at(&self, f: f64) -> f64 {
        match &self.gain {
            EdfaGain::Transparent => (2.0 * self.alpha0.eval(f) * self.length).exp(),
            EdfaGain::Profile(p) => p.eval(f),
        }
    }

    /// Natural log of the amplifier gain at `f`.
    pub fn ln_gain_at(&self, f: f64) -> f64 {
        match &self.gain {
            EdfaGain::Transparent => 2.0 * self.alpha0.eval(f) * self.length,
            EdfaGain::Profile(p) => p.eval(f).ln(),
        }
    }

    /// Frequency-independent intrinsic loss without a Raman term.
    pub fn flat_alpha0(&self) -> Option<f64> {
        if self.alpha1.is_zero() {
            self.alpha0.as_constant()
        } else {
            None
        }
    }

    /// Residual group-velocity dispersion for the frequency pair `(fa, fb)`.
    #[inline]
    pub fn beta2_bar(&self, fa: f64, fb: f64) -> f64 {
        self.beta2 + std::f64::consts::PI * self.beta3 * ((fa - self.fc) + (fb - self.fc))
    }

    pub fn validate(&self, index: usize) -> Result<()> {
        let scalars = [self.length, self.gamma, self.beta2, self.beta3, self.fc, self.beta0, self.beta1, self.dcu_beta2, self.noise_figure_db];
        if !scalars.iter().all(|v| v.is_finite()) {
            return Err(NliError::InvalidSpan(format!("span {index}: non-finite parameter")));
        }
        let profiles = [&self.alpha0, &self.alpha1, &self.sigma, &self.edfa_phase];
        if !profiles.iter().all(|p| p.all_finite()) {
            return Err(NliError::InvalidSpan(format!("span {index}: non-finite profile value")));
        }
        if !(self.length > 0.0) {
            return Err(NliError::NonPositive { what: "span length", value: self.length });
        }
        if self.gamma < 0.0 {
            return Err(NliError::InvalidSpan(format!("span {index}: negative nonlinearity coefficient")));
        }
        if let EdfaGain::Profile(p) = &self.gain {
            if !p.all_finite() || !profile_positive(p) {
                return Err(NliError::InvalidSpan(format!("span {index}: amplifier gain must be positive")));
            }
        }
        if !raman_consistent(&self.alpha1, &self.sigma) {
            return Err(NliError::InvalidSpan(format!(
                "span {index}: Raman decay rate must be positive wherever the Raman coefficient is non-zero"
            )));
        }
        Ok(())
    }
}

fn profile_positive(p: &Profile) -> bool {
    match p {
        Profile::Constant(v) => *v > 0.0,
        Profile::Table { values, .. } => values.iter().all(|v| *v > 0.0),
    }
}

/// Checks σ > 0 wherever α₁ ≠ 0, at every node of either profile.
fn raman_consistent(alpha1: &Profile, sigma: &Profile) -> bool {
    let mut probes: Vec<f64> = Vec::new();
    for p in [alpha1, sigma] {
        if let Profile::Table { freqs, .. } = p {
            probes.extend(freqs);
        }
    }
    if probes.is_empty() {
        probes.push(0.0);
    }
    // between nodes both profiles are linear, so nodes and midpoints suffice
    probes.sort_by(f64::total_cmp);
    let mids: Vec<f64> = probes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    probes.extend(mids);
    probes.iter().all(|&f| alpha1.eval(f) == 0.0 || sigma.eval(f) > 0.0)
}

/// Spans in propagation order, the channel comb sorted by frequency, and the
/// channel under test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub spans: Vec<Span>,
    pub comb: Vec<Channel>,
    pub cut_index: usize,
}

impl Link {
    /// Validates and sorts the comb; `cut_index` refers to the input order.
    pub fn new(spans: Vec<Span>, comb: Vec<Channel>, cut_index: usize) -> Result<Self> {
        if spans.is_empty() {
            return Err(NliError::Config("link needs at least one span".into()));
        }
        if comb.is_empty() {
            return Err(NliError::Config("link needs at least one channel".into()));
        }
        if cut_index >= comb.len() {
            return Err(NliError::CutOutOfRange { index: cut_index, channels: comb.len() });
        }
        for (i, s) in spans.iter().enumerate() {
            s.validate(i)?;
        }
        for ch in &comb {
            ch.validate()?;
        }
        let mut order: Vec<usize> = (0..comb.len()).collect();
        order.sort_by(|&a, &b| comb[a].f_start.total_cmp(&comb[b].f_start));
        let cut = order.iter().position(|&i| i == cut_index).expect("cut index is in range");
        let sorted: Vec<Channel> = order.iter().map(|&i| comb[i].clone()).collect();
        for w in sorted.windows(2) {
            if w[1].f_start < w[0].f_end {
                return Err(NliError::OverlappingChannels { first: w[0].label.clone(), second: w[1].label.clone() });
            }
        }
        Ok(Link { spans, comb: sorted, cut_index: cut })
    }

    pub fn with_cut(&self, cut_index: usize) -> Result<Self> {
        if cut_index >= self.comb.len() {
            return Err(NliError::CutOutOfRange { index: cut_index, channels: self.comb.len() });
        }
        let mut link = self.clone();
        link.cut_index = cut_index;
        Ok(link)
    }

    pub fn cut(&self) -> &Channel {
        &self.comb[self.cut_index]
    }

    pub fn n_spans(&self) -> usize {
        self.spans.len()
    }

    pub fn n_channels(&self) -> usize {
        self.comb.len()
    }

    /// Index of the channel whose center is nearest the comb midpoint; ties
    /// go to the lower index.
    pub fn center_channel(&self) -> usize {
        nearest_to_midpoint(&self.comb)
    }

    /// Every span has frequency-independent loss and no Raman term.
    pub fn is_flat_loss(&self) -> bool {
        self.spans.iter().all(|s| s.flat_alpha0().is_some())
    }

    /// Multiplies every launch PSD by `factor`.
    pub fn scaled_psd(&self, factor: f64) -> Link {
        let mut link = self.clone();
        for ch in &mut link.comb {
            ch.psd *= factor;
        }
        link
    }
}

pub(crate) fn nearest_to_midpoint(comb: &[Channel]) -> usize {
    let lo = comb.iter().map(|c| c.f_start).fold(f64::INFINITY, f64::min);
    let hi = comb.iter().map(|c| c.f_end).fold(f64::NEG_INFINITY, f64::max);
    let mid = 0.5 * (lo + hi);
    let mut best = 0;
    for (i, c) in comb.iter().enumerate() {
        if (c.center() - mid).abs() < (comb[best].center() - mid).abs() {
            best = i;
        }
    }
    best
}

/// NLI of one channel under test, split by contribution.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NliRow {
    pub channel: usize,
    pub f_cut: f64,
    pub g_sci: f64,
    pub g_xci: f64,
    pub g_mci: f64,
    /// Coherent-accumulation correction; may be negative.
    pub g_coherence: f64,
    pub g_total: f64,
    pub osnr_nl_db: Option<f64>,
}

impl NliRow {
    pub fn new(channel: usize, f_cut: f64, g_sci: f64, g_xci: f64, g_mci: f64, g_coherence: f64) -> Self {
        NliRow { channel, f_cut, g_sci, g_xci, g_mci, g_coherence, g_total: g_sci + g_xci + g_mci + g_coherence, osnr_nl_db: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NliReport {
    pub rows: Vec<NliRow>,
    pub warnings: Vec<String>,
}

/// Ideal constellations with built-in format constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModulationFormat {
    Qpsk,
    Qam8,
    Qam16,
    Qam32,
    Qam64,
    Qam256,
    Gaussian,
}

impl ModulationFormat {
    pub const ALL: [ModulationFormat; 7] = [
        ModulationFormat::Qpsk,
        ModulationFormat::Qam8,
        ModulationFormat::Qam16,
        ModulationFormat::Qam32,
        ModulationFormat::Qam64,
        ModulationFormat::Qam256,
        ModulationFormat::Gaussian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModulationFormat::Qpsk => "qpsk",
            ModulationFormat::Qam8 => "8qam",
            ModulationFormat::Qam16 => "16qam",
            ModulationFormat::Qam32 => "32qam",
            ModulationFormat::Qam64 => "64qam",
            ModulationFormat::Qam256 => "256qam",
            ModulationFormat::Gaussian => "gaussian",
        }
    }

    /// Accepts names such as `QPSK`, `pm-16qam` or `16-QAM`.
    pub fn parse(name: &str) -> Result<Self> {
        let key: String = name
            .to_ascii_lowercase()
            .trim_start_matches("pm-")
            .trim_start_matches("dp-")
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect();
        let format = match key.as_str() {
            "qpsk" | "4qam" => ModulationFormat::Qpsk,
            "8qam" => ModulationFormat::Qam8,
            "16qam" => ModulationFormat::Qam16,
            "32qam" => ModulationFormat::Qam32,
            "64qam" => ModulationFormat::Qam64,
            "256qam" => ModulationFormat::Qam256,
            "gaussian" | "gauss" => ModulationFormat::Gaussian,
            _ => return Err(NliError::UnknownFormat(name.to_string())),
        };
        Ok(format)
    }

    /// Equiprobable constellation points; `None` for the Gaussian ensemble.
    pub fn constellation(self) -> Option<Vec<Complex64>> {
        let square = |side: i32| -> Vec<Complex64> {
            let levels: Vec<f64> = (0..side).map(|i| f64::from(2 * i - side + 1)).collect();
            levels.iter().flat_map(|&re| levels.iter().map(move |&im| Complex64::new(re, im))).collect()
        };
        let points = match self {
            ModulationFormat::Qpsk => square(2),
            // rectangular 4 × 2 grid
            ModulationFormat::Qam8 => {
                let re = [-3.0, -1.0, 1.0, 3.0];
                re.iter().flat_map(|&r| [-1.0, 1.0].map(|i| Complex64::new(r, i))).collect()
            }
            ModulationFormat::Qam16 => square(4),
            // 6 × 6 grid without its four corners
            ModulationFormat::Qam32 => square(6).into_iter().filter(|p| !(p.re.abs() == 5.0 && p.im.abs() == 5.0)).collect(),
            ModulationFormat::Qam64 => square(8),
            ModulationFormat::Qam256 => square(16),
            ModulationFormat::Gaussian => return None,
        };
        Some(points)
    }

    /// Format constant from the built-in table.
    pub fn phi(self) -> f64 {
        static TABLE: OnceLock<[f64; 7]> = OnceLock::new();
        let table = TABLE.get_or_init(|| {
            ModulationFormat::ALL.map(|fmt| match fmt.constellation() {
                Some(points) => {
                    let weighted: Vec<(Complex64, f64)> = points.into_iter().map(|p| (p, 1.0)).collect();
                    compute_phi(&weighted).expect("built-in constellations are non-degenerate")
                }
                None => 0.0,
            })
        });
        let idx = ModulationFormat::ALL.iter().position(|f| *f == self).expect("listed");
        table[idx]
    }
}

/// `Φ = 2 − E|a|⁴ / (E|a|²)²` over weighted points; weights need not sum to one.
pub fn compute_phi(points: &[(Complex64, f64)]) -> Result<f64> {
    if points.is_empty() {
        return Err(NliError::EmptyConstellation);
    }
    let mut w_sum = 0.0;
    let mut m2 = 0.0;
    let mut m4 = 0.0;
    for &(a, w) in points {
        if !(w >= 0.0) || !w.is_finite() || !a.re.is_finite() || !a.im.is_finite() {
            return Err(NliError::DegenerateConstellation);
        }
        let p = a.norm_sqr();
        w_sum += w;
        m2 += w * p;
        m4 += w * p * p;
    }
    if !(w_sum > 0.0) || !(m2 > 0.0) {
        return Err(NliError::DegenerateConstellation);
    }
    m2 /= w_sum;
    m4 /= w_sum;
    Ok(2.0 - m4 / (m2 * m2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_interpolates_and_extrapolates_flat() {
        let p = Profile::table(vec![1.0, 3.0], vec![10.0, 30.0]).unwrap();
        assert_eq!(p.eval(0.0), 10.0);
        assert_eq!(p.eval(2.0), 20.0);
        assert_eq!(p.eval(5.0), 30.0);
        assert!(Profile::table(vec![3.0, 1.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn phi_of_reference_formats() {
        assert!((ModulationFormat::Qpsk.phi() - 1.0).abs() < 1e-15);
        assert!((ModulationFormat::Qam16.phi() - 0.68).abs() < 1e-15);
        assert_eq!(ModulationFormat::Gaussian.phi(), 0.0);
        // E|a|² = 6, E|a|⁴ = 52 on the 4 × 2 grid
        assert!((ModulationFormat::Qam8.phi() - (2.0 - 52.0 / 36.0)).abs() < 1e-15);
        assert!((ModulationFormat::Qam32.phi() - 0.69).abs() < 1e-12);
        assert!(ModulationFormat::Qam64.phi() > 0.61 && ModulationFormat::Qam64.phi() < 0.62);
    }

    #[test]
    fn phi_rejects_empty_and_zero_energy() {
        assert_eq!(compute_phi(&[]), Err(NliError::EmptyConstellation));
        assert_eq!(compute_phi(&[(Complex64::new(0.0, 0.0), 1.0)]), Err(NliError::DegenerateConstellation));
    }

    #[test]
    fn format_names() {
        assert_eq!(ModulationFormat::parse("PM-16QAM").unwrap(), ModulationFormat::Qam16);
        assert_eq!(ModulationFormat::parse("qpsk").unwrap(), ModulationFormat::Qpsk);
        assert!(ModulationFormat::parse("ook").is_err());
    }

    #[test]
    fn link_sorts_and_remaps_cut() {
        let span = Span::flat(1e5, 2.5e-5, 1.3e-3, -2.1e-26, 0.0, 193.4e12);
        let a = Channel::new(193.5e12, 193.55e12, 1e-14).unwrap().with_label("a");
        let b = Channel::new(193.3e12, 193.35e12, 1e-14).unwrap().with_label("b");
        let link = Link::new(vec![span.clone()], vec![a.clone(), b.clone()], 0).unwrap();
        assert_eq!(link.comb[0].label, "b");
        assert_eq!(link.cut().label, "a");
        let again = Link::new(link.spans.clone(), link.comb.clone(), link.cut_index).unwrap();
        assert_eq!(again, link);
        let c = Channel::new(193.34e12, 193.4e12, 1e-14).unwrap().with_label("c");
        assert!(matches!(Link::new(vec![span], vec![a, b, c], 0), Err(NliError::OverlappingChannels { .. })));
    }
}
