//! NLI power spectral density of a channel under test.
//!
//! Every contribution reduces to rectangle integrals of the two-Lorentzian
//! span kernel, evaluated with [`kernel_box_integral`]; the SCI/XCI terms use
//! the per-channel rectangle `[fs_m, fe_m] × [fs_CUT, fe_CUT]` and the MCI
//! terms the equal-area island squares. The corrected total adds the
//! coherent-accumulation term and the fitted factors.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{NliError, Result};
use crate::island::{classify_triple, island_descriptor, TripleClass};
use crate::model::{Link, NliReport, NliRow};
use crate::special::{harmonic_number, kernel_box_integral, si_ratio, FintMode};
use crate::span::{g0_all, g0_flat_all, G0Convention, LorentzianCoefficients, SpanKey, SpanParamCache};
use crate::sum::CompensatedSum;

/// The 16/27 prefactor of the dual-polarization GN integral.
pub const GN_PREFACTOR: f64 = 16.0 / 27.0;

/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RhoMode {
    Unity,
    #[default]
    Fitted,
}

impl std::str::FromStr for RhoMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "unity" => Ok(RhoMode::Unity),
            "fitted" => Ok(RhoMode::Fitted),
            other => Err(format!("unknown correction mode `{other}` (expected unity or fitted)")),
        }
    }
}

impl std::fmt::Display for RhoMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RhoMode::Unity => "unity",
            RhoMode::Fitted => "fitted",
        })
    }
}

/// How span loss enters the closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossMode {
    /// Frequency-dependent loss with the fitted Raman term.
    General,
    /// Scalar loss per span; rejected if any span is not flat.
    Flat,
}

/// Switches of the corrected total. The default is the fully corrected form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EngineSwitches {
    pub rho_coh: bool,
    pub rho_mci: bool,
    pub rho_sci: RhoMode,
    pub rho_xci: RhoMode,
    pub fint: FintMode,
    /// `None` picks the flat form when every span allows it.
    pub loss: Option<LossMode>,
    pub g0_convention: G0Convention,
}

impl Default for EngineSwitches {
    fn default() -> Self {
        EngineSwitches {
            rho_coh: true,
            rho_mci: true,
            rho_sci: RhoMode::Fitted,
            rho_xci: RhoMode::Fitted,
            fint: FintMode::Asinh,
            loss: None,
            g0_convention: G0Convention::IncludeCurrentSpan,
        }
    }
}

impl EngineSwitches {
    /// Plain SCI + XCI: no coherence, no MCI, unit factors.
    pub fn uncorrected(fint: FintMode) -> Self {
        EngineSwitches { rho_coh: false, rho_mci: false, rho_sci: RhoMode::Unity, rho_xci: RhoMode::Unity, fint, ..Self::default() }
    }

    fn needs_coefficients(&self) -> bool {
        self.rho_sci == RhoMode::Fitted || self.rho_xci == RhoMode::Fitted
    }
}

/// Fitted correction coefficients `a1…a23`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectionCoefficients(pub [f64; 23]);

impl Default for CorrectionCoefficients {
    fn default() -> Self {
        CorrectionCoefficients([
            -0.8509, 1.0923, 0.9305, -0.4097, 0.1652, -15.5857, -0.9648, -0.9826, 0.008273, -0.014253, 253.6104, 0.5174,
            0.1695, 0.6250, -1.1281, 0.1591, 0.9497, 0.8592, 0.2265, 0.9047, 0.027842, 0.005731, 1.2457e-41,
        ])
    }
}

impl CorrectionCoefficients {
    /// Parses 23 whitespace-separated decimals; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = Vec::with_capacity(23);
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("");
            for tok in line.split_whitespace() {
                let v: f64 = tok.parse().map_err(|_| NliError::Coefficients(format!("not a number: `{tok}`")))?;
                if !v.is_finite() {
                    return Err(NliError::Coefficients(format!("non-finite value `{tok}`")));
                }
                values.push(v);
            }
        }
        let arr: [f64; 23] = values
            .as_slice()
            .try_into()
            .map_err(|_| NliError::Coefficients(format!("expected 23 values, found {}", values.len())))?;
        Ok(CorrectionCoefficients(arr))
    }

    /// `a_i` with one-based `i`.
    #[inline]
    pub fn a(&self, i: usize) -> f64 {
        self.0[i - 1]
    }

    pub fn to_text(&self) -> String {
        self.0.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join("\n") + "\n"
    }
}

/// Contributions of the triple sum, split by class.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClassSums {
    pub sci: f64,
    pub xci: f64,
    pub mci: f64,
    pub warnings: Vec<String>,
}

impl ClassSums {
    pub fn total(&self) -> f64 {
        self.sci + self.xci + self.mci
    }
}

/// SCI and XCI parts of the per-channel closed form.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SciXci {
    pub sci: f64,
    pub xci: f64,
    pub warnings: Vec<String>,
}

fn resolve_loss(link: &Link, requested: Option<LossMode>) -> Result<LossMode> {
    match requested {
        Some(LossMode::Flat) => {
            if let Some(p) = link.spans.iter().position(|s| s.flat_alpha0().is_none()) {
                return Err(NliError::NotFlatLoss(p));
            }
            Ok(LossMode::Flat)
        }
        Some(LossMode::General) => Ok(LossMode::General),
        None if link.is_flat_loss() => Ok(LossMode::Flat),
        None => Ok(LossMode::General),
    }
}

/// Span-by-span kernel data at one island centroid.
struct SpanKernels {
    /// `γ² g0²` per span.
    weight: Vec<f64>,
    coeffs: Vec<LorentzianCoefficients>,
}

fn flat_coefficients(alpha0: f64, beta2_bar: f64) -> Result<LorentzianCoefficients> {
    if !(alpha0 > 0.0) {
        return Err(NliError::NonPhysicalLoss(alpha0));
    }
    Ok(LorentzianCoefficients {
        j1: 0.0,
        j2: 1.0 / (4.0 * alpha0 * alpha0),
        d1: 4.0 * PI * PI * beta2_bar / (2.0 * alpha0),
        d2: 2.0 * PI * PI * beta2_bar / alpha0,
    })
}

struct Evaluator<'a> {
    link: &'a Link,
    loss: LossMode,
    fint: FintMode,
    convention: G0Convention,
}

impl Evaluator<'_> {
    fn kernels(
        &self,
        f1s: f64,
        f2s: f64,
        f: f64,
        cache: &mut SpanParamCache,
        warnings: &mut Vec<String>,
    ) -> Result<SpanKernels> {
        let spans = &self.link.spans;
        let g0 = match self.loss {
            LossMode::Flat => g0_flat_all(self.link, f1s, f2s, f, self.convention)?,
            LossMode::General => g0_all(self.link, f1s, f2s, f, self.convention),
        };
        let mut weight = Vec::with_capacity(spans.len());
        let mut coeffs = Vec::with_capacity(spans.len());
        for (s, span) in spans.iter().enumerate() {
            weight.push(span.gamma * span.gamma * g0[s] * g0[s]);
            let c = match self.loss {
                LossMode::Flat => flat_coefficients(span.flat_alpha0().ok_or(NliError::NotFlatLoss(s))?, span.beta2_bar(f1s, f2s))?,
                LossMode::General => {
                    let (c, sign_change) = cache.get(self.link, SpanKey::new(s, f1s, f2s, f), f1s, f2s, f)?;
                    if sign_change {
                        push_unique(
                            warnings,
                            format!("span {s}: combined Raman profile changes sign; single-exponential fit is approximate"),
                        );
                    }
                    c
                }
            };
            coeffs.push(c);
        }
        Ok(SpanKernels { weight, coeffs })
    }

    /// `Σ_s γ² g0² ∫∫_box |ξ|²` with per-span factors `rho[s]`.
    fn box_sum(&self, k: &SpanKernels, rho: Option<&[f64]>, x: (f64, f64), y: (f64, f64)) -> f64 {
        let mut acc = 0.0;
        for (s, c) in k.coeffs.iter().enumerate() {
            let mut v = kernel_box_integral(self.fint, c.d2, c.j2, x.0, x.1, y.0, y.1);
            if c.j1 != 0.0 {
                v += kernel_box_integral(self.fint, c.d1, c.j1, x.0, x.1, y.0, y.1);
            }
            let r = rho.map_or(1.0, |r| r[s]);
            acc += k.weight[s] * r * v;
        }
        acc
    }

    /// Triple sum at frequency `f` over the classes accepted by `keep`.
    fn triple_sum(&self, f: f64, cut: usize, keep: impl Fn(TripleClass) -> bool + Sync) -> Result<ClassSums> {
        let comb = &self.link.comb;
        let nc = comb.len();
        let per_m: Vec<Result<([CompensatedSum; 3], Vec<String>)>> = (0..nc)
            .into_par_iter()
            .map(|m| {
                let mut sums = [CompensatedSum::new(); 3];
                let mut warnings = Vec::new();
                let mut cache = SpanParamCache::new();
                for n in 0..nc {
                    for k in 0..nc {
                        let class = classify_triple(m, n, k, cut);
                        if !keep(class) {
                            continue;
                        }
                        let psd = comb[m].psd * comb[n].psd * comb[k].psd;
                        if psd == 0.0 {
                            continue;
                        }
                        let island = island_descriptor(comb, m, n, k, f);
                        let Some((c1, c2, l1, l2)) = island.square() else { continue };
                        let kernels = self.kernels(c1, c2, f, &mut cache, &mut warnings)?;
                        let x = (c1 - f - 0.5 * l1, c1 - f + 0.5 * l1);
                        let y = (c2 - f - 0.5 * l2, c2 - f + 0.5 * l2);
                        let v = GN_PREFACTOR * psd * self.box_sum(&kernels, None, x, y);
                        let slot = match class {
                            TripleClass::Sci => 0,
                            TripleClass::Mci => 2,
                            _ => 1,
                        };
                        sums[slot].add(v);
                    }
                }
                Ok((sums, warnings))
            })
            .collect();
        let mut totals = [CompensatedSum::new(); 3];
        let mut warnings = Vec::new();
        for r in per_m {
            let (sums, w) = r?;
            for (t, s) in totals.iter_mut().zip(sums.iter()) {
                t.merge(s);
            }
            for msg in w {
                push_unique(&mut warnings, msg);
            }
        }
        Ok(ClassSums { sci: totals[0].value(), xci: totals[1].value(), mci: totals[2].value(), warnings })
    }

    /// SCI and XCI with the per-channel rectangle; `rho_cut[s]` and
    /// `rho_m(m)[s]` scale the two parts.
    fn sci_xci_terms(
        &self,
        rho_cut: Option<&[f64]>,
        rho_m: &dyn Fn(usize) -> Result<Option<Vec<f64>>>,
    ) -> Result<SciXci> {
        let link = self.link;
        let cut = link.cut();
        let f_cut = cut.center();
        let y = (cut.f_start - f_cut, cut.f_end - f_cut);
        let g_cut = cut.psd;
        let mut cache = SpanParamCache::new();
        let mut warnings = Vec::new();
        let mut sci = 0.0;
        let mut xci = CompensatedSum::new();
        for (m, ch) in link.comb.iter().enumerate() {
            let psd = ch.psd * ch.psd * g_cut;
            if psd == 0.0 {
                continue;
            }
            let mid = ch.center();
            let kernels = self.kernels(mid, f_cut, f_cut, &mut cache, &mut warnings)?;
            let x = (ch.f_start - f_cut, ch.f_end - f_cut);
            if m == link.cut_index {
                sci = GN_PREFACTOR * psd * self.box_sum(&kernels, rho_cut, x, y);
            } else {
                let rho = rho_m(m)?;
                xci.add(2.0 * GN_PREFACTOR * psd * self.box_sum(&kernels, rho.as_deref(), x, y));
            }
        }
        Ok(SciXci { sci, xci: xci.value(), warnings })
    }
}

fn push_unique(list: &mut Vec<String>, msg: String) {
    if !list.contains(&msg) {
        list.push(msg);
    }
}

/// Full triple sum with equal-area squares at frequency `f`, general loss
/// model, split by class relative to the link's channel under test.
pub fn g_nli_generic(link: &Link, f: f64, fint: FintMode, convention: G0Convention) -> Result<ClassSums> {
    if !f.is_finite() {
        return Err(NliError::NonFinite("evaluation frequency"));
    }
    let ev = Evaluator { link, loss: LossMode::General, fint, convention };
    ev.triple_sum(f, link.cut_index, |_| true)
}

/// SCI and XCI parts of the per-channel closed form at the CUT center.
pub fn sci_xci(link: &Link, loss: Option<LossMode>, fint: FintMode, convention: G0Convention) -> Result<SciXci> {
    let ev = Evaluator { link, loss: resolve_loss(link, loss)?, fint, convention };
    ev.sci_xci_terms(None, &|_| Ok(None))
}

/// MCI triple sum at the CUT center.
pub fn mci(link: &Link, loss: Option<LossMode>, fint: FintMode, convention: G0Convention) -> Result<(f64, Vec<String>)> {
    let ev = Evaluator { link, loss: resolve_loss(link, loss)?, fint, convention };
    let sums = ev.triple_sum(link.cut().center(), link.cut_index, |c| c == TripleClass::Mci)?;
    Ok((sums.mci, sums.warnings))
}

/// Effective loss used by the coherence term of span `s`.
fn coherence_alpha0(link: &Link, s: usize, loss: LossMode) -> Result<f64> {
    let span = &link.spans[s];
    let a = match loss {
        LossMode::Flat => span.flat_alpha0().ok_or(NliError::NotFlatLoss(s))?,
        LossMode::General => span.alpha0.eval(link.cut().center()),
    };
    if !(a > 0.0) {
        return Err(NliError::NonPhysicalLoss(a));
    }
    Ok(a)
}

/// Coherent-accumulation correction added to the SCI term.
fn coherence_term(link: &Link, loss: LossMode, convention: G0Convention, rho_cut: Option<&[f64]>) -> Result<f64> {
    let ns = link.n_spans();
    let bracket = harmonic_number(ns - 1) + (1.0 - ns as f64) / ns as f64;
    if bracket == 0.0 {
        return Ok(0.0);
    }
    let cut = link.cut();
    let f_cut = cut.center();
    let bw = cut.bandwidth();
    let g0 = match loss {
        LossMode::Flat => g0_flat_all(link, f_cut, f_cut, f_cut, convention)?,
        LossMode::General => g0_all(link, f_cut, f_cut, f_cut, convention),
    };
    let mut acc = 0.0;
    for (s, span) in link.spans.iter().enumerate() {
        let alpha0 = coherence_alpha0(link, s, loss)?;
        let beta = span.beta2_bar(f_cut, f_cut).abs();
        let len = span.length;
        // 2 Si(π²|β|L·BW²)/(π L α0) / (4π α0 |β|)
        let si_over_beta = si_ratio(PI * PI * len * bw * bw, beta);
        let term = 2.0 * si_over_beta / (PI * len * alpha0) / (4.0 * PI * alpha0);
        let r = rho_cut.map_or(1.0, |r| r[s]);
        acc += span.gamma * span.gamma * g0[s] * g0[s] * r * term;
    }
    Ok(GN_PREFACTOR * cut.psd * cut.psd * cut.psd * bracket * acc)
}

/// Accumulated residual dispersion before span `s` for the pair `(fa, fb)`, s².
fn accumulated_beta2(link: &Link, s: usize, fa: f64, fb: f64) -> f64 {
    link.spans[..s].iter().map(|sp| sp.beta2_bar(fa, fb) * sp.length).sum()
}

const S2_TO_PS2: f64 = 1e24;
const HZ_TO_GHZ: f64 = 1e-9;

/// Format constants below this magnitude count as Gaussian.
pub const GAUSSIAN_PHI_TOLERANCE: f64 = 1e-9;

fn kronecker_phi(phi: f64) -> f64 {
    if phi.abs() < GAUSSIAN_PHI_TOLERANCE {
        1.0
    } else {
        0.0
    }
}

fn check_finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(NliError::Coefficients(format!("{what} correction factor is not finite")))
    }
}

/// SCI correction factor of span `s` (zero-based). Bandwidth enters in GHz,
/// accumulated dispersion in ps².
pub fn rho_cut(link: &Link, s: usize, coeffs: &CorrectionCoefficients) -> Result<f64> {
    if s >= link.n_spans() {
        return Err(NliError::SpanOutOfRange { index: s, spans: link.n_spans() });
    }
    let a = |i| coeffs.a(i);
    let cut = link.cut();
    let f_cut = cut.center();
    let acc = accumulated_beta2(link, s, f_cut, f_cut).abs() * S2_TO_PS2;
    let bw = cut.bandwidth() * HZ_TO_GHZ;
    let phi = cut.phi;
    let v = (1.0 + a(1) * cut.rolloff.powf(a(2)))
        * (a(3)
            + a(4) * phi.powf(a(5))
            + a(6) * (1.0 + a(7) * kronecker_phi(phi)) * (1.0 + a(8) * bw.powf(a(9)) + a(10) * (acc + a(11)).log10()));
    check_finite(v, "SCI")
}

/// XCI correction factor of span `s` for interferer `m`.
pub fn rho_mch(link: &Link, s: usize, m: usize, coeffs: &CorrectionCoefficients) -> Result<f64> {
    if s >= link.n_spans() {
        return Err(NliError::SpanOutOfRange { index: s, spans: link.n_spans() });
    }
    if m == link.cut_index {
        return Err(NliError::InterfererIsCut(m));
    }
    let ch = link.comb.get(m).ok_or(NliError::CutOutOfRange { index: m, channels: link.n_channels() })?;
    let a = |i| coeffs.a(i);
    let cut = link.cut();
    let acc = accumulated_beta2(link, s, ch.center(), cut.center()).abs() * S2_TO_PS2;
    let phi = ch.phi;
    let v = (1.0 + a(12) * cut.rolloff.powf(a(13)))
        * (a(14)
            + a(15) * (phi + a(16)).powf(a(17))
            + a(18) * (phi + a(19)).powf(a(20)) * (1.0 + a(21) * kronecker_phi(phi)) * (1.0 + a(22) * (acc + a(23)).log10()));
    check_finite(v, "XCI")
}

/// Corrected NLI PSD at the center of the link's channel under test.
pub fn g_nli_total(link: &Link, switches: &EngineSwitches, coeffs: Option<&CorrectionCoefficients>) -> Result<(NliRow, Vec<String>)> {
    let coeffs = if switches.needs_coefficients() { Some(coeffs.ok_or(NliError::MissingCoefficients)?) } else { None };
    let loss = resolve_loss(link, switches.loss)?;
    let ev = Evaluator { link, loss, fint: switches.fint, convention: switches.g0_convention };
    let ns = link.n_spans();

    let rho_cut_values = match (switches.rho_sci, coeffs) {
        (RhoMode::Fitted, Some(c)) => Some((0..ns).map(|s| rho_cut(link, s, c)).collect::<Result<Vec<_>>>()?),
        _ => None,
    };
    let rho_m = |m: usize| -> Result<Option<Vec<f64>>> {
        match (switches.rho_xci, coeffs) {
            (RhoMode::Fitted, Some(c)) => Ok(Some((0..ns).map(|s| rho_mch(link, s, m, c)).collect::<Result<Vec<_>>>()?)),
            _ => Ok(None),
        }
    };
    let parts = ev.sci_xci_terms(rho_cut_values.as_deref(), &rho_m)?;
    let mut warnings = parts.warnings;

    let g_coh = if switches.rho_coh { coherence_term(link, loss, switches.g0_convention, rho_cut_values.as_deref())? } else { 0.0 };
    let g_mci = if switches.rho_mci {
        let sums = ev.triple_sum(link.cut().center(), link.cut_index, |c| c == TripleClass::Mci)?;
        for w in sums.warnings {
            push_unique(&mut warnings, w);
        }
        sums.mci
    } else {
        0.0
    };
    let cut = link.cut();
    Ok((NliRow::new(link.cut_index, cut.center(), parts.sci, parts.xci, g_mci, g_coh), warnings))
}

/// Evaluates every channel as CUT in turn and attaches OSNR figures.
pub fn analyze_all(link: &Link, switches: &EngineSwitches, coeffs: Option<&CorrectionCoefficients>) -> Result<NliReport> {
    let mut report = NliReport::default();
    for cut in 0..link.n_channels() {
        let l = link.with_cut(cut)?;
        let (mut row, warnings) = g_nli_total(&l, switches, coeffs)?;
        row.osnr_nl_db = osnr_nl(&l, None, row.g_total).ok();
        report.rows.push(row);
        for w in warnings {
            push_unique(&mut report.warnings, w);
        }
    }
    Ok(report)
}

/// ASE power in the CUT band at the link output: each amplifier adds
/// `NF·hν·(Γ − 1)·BW`, carried by the net gain of the spans after it.
pub fn ase_power(link: &Link) -> f64 {
    let cut = link.cut();
    let f = cut.center();
    let bw = cut.bandwidth();
    let mut total = 0.0;
    for span in &link.spans {
        // propagate what is already there through this span
        let net = span.ln_gain_at(f) - 2.0 * span.alpha0.eval(f) * span.length - 2.0 * raman_field_loss(span, f);
        total *= net.exp();
        let nf = 10f64.powf(span.noise_figure_db / 10.0);
        total += nf * PLANCK * f * (span.gain_at(f) - 1.0) * bw;
    }
    total
}

fn raman_field_loss(span: &crate::model::Span, f: f64) -> f64 {
    let a1 = span.alpha1.eval(f);
    if a1 == 0.0 {
        0.0
    } else {
        a1 * span.length * crate::span::one_minus_exp_over(span.sigma.eval(f) * span.length)
    }
}

/// `10 log10(P_ch / (P_ASE + P_NLI))` with flat-PSD band powers over the CUT.
pub fn osnr_nl(link: &Link, ase: Option<f64>, g_nli: f64) -> Result<f64> {
    let cut = link.cut();
    let bw = cut.bandwidth();
    let p_ch = cut.psd * bw;
    let p_nli = g_nli * bw;
    let p_ase = ase.unwrap_or_else(|| ase_power(link));
    if !(p_ch > 0.0) {
        return Err(NliError::DegenerateOsnr("channel power is not positive"));
    }
    if !(p_ase >= 0.0) || !(p_nli >= 0.0) {
        return Err(NliError::DegenerateOsnr("noise power is negative"));
    }
    let noise = p_ase + p_nli;
    if !(noise > 0.0) || !noise.is_finite() {
        return Err(NliError::DegenerateOsnr("total noise power is zero"));
    }
    Ok(10.0 * (p_ch / noise).log10())
}
