//! Per-span effective parameters and the incoherent link function.
//!
//! For an island with centroid `(f1*, f2*)` at evaluation frequency `f`, each
//! span contributes `γ² g0² |ξ|²`, where `g0` collects the power evolution of
//! the three pump fields up to the span and of the probe after it, and `|ξ|²`
//! is the span's FWM efficiency. `|ξ|²` splits exactly into two Lorentzians
//! in the detuning product `(f1 − f)(f2 − f)`.
//!
//! Span indices are zero-based throughout.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{NliError, Result};
use crate::model::{Link, Span};

/// Which spans the probe-loss product of `g0` runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum G0Convention {
    /// The span itself and every later one.
    #[default]
    IncludeCurrentSpan,
    /// Only the spans after it.
    ExcludeCurrentSpan,
}

/// Loss, Raman and dispersion parameters of one span at one evaluation point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveSpanParams {
    pub alpha0_bar: f64,
    pub alpha1_bar: f64,
    pub sigma_bar: f64,
    pub beta2_bar: f64,
}

/// `|ξ|² = J1 / (1 + x²D1²) + J2 / (1 + x²D2²)` with `x = (f1 − f)(f2 − f)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzianCoefficients {
    pub j1: f64,
    pub j2: f64,
    pub d1: f64,
    pub d2: f64,
}

impl LorentzianCoefficients {
    /// `|ξ|²` at detuning product `x`.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let a = x * self.d1;
        let b = x * self.d2;
        self.j1 / (1.0 + a * a) + self.j2 / (1.0 + b * b)
    }
}

/// Single-exponential fit of the Raman term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RamanFit {
    pub alpha1_bar: f64,
    pub sigma_bar: f64,
    /// The combined profile changes sign inside the span; the fit used its
    /// magnitude and is only indicative.
    pub sign_change: bool,
}

#[inline]
fn f3_star(f1s: f64, f2s: f64, f: f64) -> f64 {
    f1s + f2s - f
}

/// `(α₀(f1*) + α₀(f2*) + α₀(f3*) − α₀(f)) / 2`.
pub fn effective_alpha0(span: &Span, f1s: f64, f2s: f64, f: f64) -> f64 {
    let a = &span.alpha0;
    if let Some(c) = a.as_constant() {
        return c;
    }
    0.5 * (a.eval(f1s) + a.eval(f2s) + a.eval(f3_star(f1s, f2s, f)) - a.eval(f))
}

/// `(1 − e^{−x}) / x`, equal to 1 at `x = 0`.
#[inline]
pub(crate) fn one_minus_exp_over(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - 0.5 * x
    } else {
        -(-x).exp_m1() / x
    }
}

/// Terms `(weight·α₁, σ)` of the combined Raman profile at the four frequencies.
fn raman_terms(span: &Span, f1s: f64, f2s: f64, f: f64) -> [(f64, f64); 4] {
    let f3s = f3_star(f1s, f2s, f);
    let term = |fr: f64, w: f64| (0.5 * w * span.alpha1.eval(fr), span.sigma.eval(fr));
    [term(f1s, 1.0), term(f2s, 1.0), term(f, -1.0), term(f3s, 1.0)]
}

fn combined(terms: &[(f64, f64); 4], z: f64) -> f64 {
    terms.iter().map(|&(a, s)| a * (-s * z).exp()).sum()
}

/// `∫_a^b Σ a_i e^{−σ_i z} dz`.
fn combined_integral(terms: &[(f64, f64); 4], a: f64, b: f64) -> f64 {
    let w = b - a;
    terms.iter().map(|&(c, s)| c * (-s * a).exp() * w * one_minus_exp_over(s * w)).sum()
}

const SIGN_SCAN_POINTS: usize = 2048;

/// Effective Raman coefficient and decay rate.
///
/// `ᾱ₁` is the combined profile at `z = 0`; `σ̄` makes `ᾱ₁ e^{−σ̄z}` carry the
/// same integral over the span. Equal decay rates are returned unchanged.
pub fn fit_effective_raman(span: &Span, f1s: f64, f2s: f64, f: f64) -> Result<RamanFit> {
    let terms = raman_terms(span, f1s, f2s, f);
    let live: Vec<(f64, f64)> = terms.iter().copied().filter(|&(a, _)| a != 0.0).collect();
    if live.is_empty() {
        return Ok(RamanFit { alpha1_bar: 0.0, sigma_bar: 0.0, sign_change: false });
    }
    let length = span.length;
    let at_zero: f64 = combined(&terms, 0.0);
    if live.iter().all(|&(_, s)| s == live[0].1) {
        if at_zero == 0.0 {
            return Ok(RamanFit { alpha1_bar: 0.0, sigma_bar: 0.0, sign_change: false });
        }
        return Ok(RamanFit { alpha1_bar: at_zero, sigma_bar: live[0].1, sign_change: false });
    }

    // locate sign changes on a grid, refine each by bisection
    let mut roots = Vec::new();
    let mut prev_z = 0.0;
    let mut prev_v = at_zero;
    for i in 1..=SIGN_SCAN_POINTS {
        let z = length * i as f64 / SIGN_SCAN_POINTS as f64;
        let v = combined(&terms, z);
        if (prev_v < 0.0 && v > 0.0) || (prev_v > 0.0 && v < 0.0) {
            let (mut lo, mut hi) = (prev_z, z);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let vm = combined(&terms, mid);
                if (vm < 0.0) == (prev_v < 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        if v != 0.0 {
            prev_v = v;
        }
        prev_z = z;
    }
    let sign_change = !roots.is_empty();
    let (peak, area) = if sign_change {
        let mut edges = vec![0.0];
        edges.extend(&roots);
        edges.push(length);
        let area: f64 = edges.windows(2).map(|w| combined_integral(&terms, w[0], w[1]).abs()).sum();
        (at_zero.abs(), area)
    } else {
        (at_zero, combined_integral(&terms, 0.0, length))
    };
    if peak == 0.0 || area == 0.0 || (peak > 0.0) != (area > 0.0) {
        return Err(NliError::DegenerateRamanFit { alpha1_bar: at_zero, sigma_bar: f64::NAN });
    }
    // solve φ(x) = target with φ(x) = (1 − e^{−x})/x, x = σ̄L, φ decreasing
    let target = area / (peak * length);
    let (mut lo, mut hi) = if target < 1.0 {
        (0.0, 1.0 / target)
    } else {
        let mut lo = -1.0;
        while one_minus_exp_over(lo) < target {
            lo *= 2.0;
            if lo < -1e4 {
                return Err(NliError::DegenerateRamanFit { alpha1_bar: at_zero, sigma_bar: f64::NEG_INFINITY });
            }
        }
        (lo, 0.0)
    };
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if one_minus_exp_over(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let sigma_bar = 0.5 * (lo + hi) / length;
    Ok(RamanFit { alpha1_bar: at_zero, sigma_bar, sign_change })
}

/// Residual dispersion for the frequency pair `(fa, fb)`.
#[inline]
pub fn beta2_bar(span: &Span, fa: f64, fb: f64) -> f64 {
    span.beta2_bar(fa, fb)
}

/// All effective parameters of a span at the island `(f1*, f2*)`, frequency `f`.
pub fn effective_params(span: &Span, f1s: f64, f2s: f64, f: f64) -> Result<(EffectiveSpanParams, RamanFit)> {
    let fit = fit_effective_raman(span, f1s, f2s, f)?;
    let params = EffectiveSpanParams {
        alpha0_bar: effective_alpha0(span, f1s, f2s, f),
        alpha1_bar: fit.alpha1_bar,
        sigma_bar: fit.sigma_bar,
        beta2_bar: span.beta2_bar(f1s, f2s),
    };
    Ok((params, fit))
}

/// Two-Lorentzian weights and widths of `|ξ|²`.
pub fn lorentzian_coefficients(p: &EffectiveSpanParams) -> Result<LorentzianCoefficients> {
    let a0 = p.alpha0_bar;
    if !(a0 > 0.0) {
        return Err(NliError::NonPhysicalLoss(a0));
    }
    let a1 = p.alpha1_bar;
    let s = p.sigma_bar;
    let pi2 = PI * PI;
    let d2 = 2.0 * pi2 * p.beta2_bar / a0;
    let d1 = 4.0 * pi2 * p.beta2_bar / (2.0 * a0 + s);
    if a1 == 0.0 {
        return Ok(LorentzianCoefficients { j1: 0.0, j2: 1.0 / (4.0 * a0 * a0), d1, d2 });
    }
    if s == 0.0 || !(2.0 * a0 + s != 0.0) || !(4.0 * a0 + s != 0.0) {
        return Err(NliError::DegenerateRamanFit { alpha1_bar: a1, sigma_bar: s });
    }
    let t = 2.0 * a0 + s;
    let j1 = 4.0 * a1 * (2.0 * a0 - a1 + s) / (s * t * t * (4.0 * a0 + s));
    let j2 = (s - 2.0 * a1) * (4.0 * a0 - 2.0 * a1 + s) / (4.0 * s * a0 * a0 * (4.0 * a0 + s));
    Ok(LorentzianCoefficients { j1, j2, d1, d2 })
}

/// `|ξ|²` by direct complex arithmetic at the point `(f1, f2)`.
pub fn xi_squared_direct(p: &EffectiveSpanParams, f1: f64, f2: f64, f: f64) -> f64 {
    xi_squared_at_detuning(p, (f1 - f) * (f2 - f))
}

/// `|ξ|²` by direct complex arithmetic at detuning product `x`.
pub fn xi_squared_at_detuning(p: &EffectiveSpanParams, x: f64) -> f64 {
    let d = Complex64::new(2.0 * p.alpha0_bar, -4.0 * PI * PI * x * p.beta2_bar);
    let xi = d.inv() - 2.0 * p.alpha1_bar / (d * (d + p.sigma_bar));
    xi.norm_sqr()
}

/// `α₁(1 − e^{−σL})/σ`: integrated Raman loss of one field over a span.
#[inline]
fn raman_loss(span: &Span, fr: f64) -> f64 {
    let a1 = span.alpha1.eval(fr);
    if a1 == 0.0 {
        return 0.0;
    }
    a1 * span.length * one_minus_exp_over(span.sigma.eval(fr) * span.length)
}

/// Log of the field growth of one pump at `fr` over span `p` and its amplifier.
#[inline]
fn ln_pump_factor(span: &Span, fr: f64) -> f64 {
    0.5 * span.ln_gain_at(fr) - span.alpha0.eval(fr) * span.length - raman_loss(span, fr)
}

/// Log of the probe factor at `f` for span `p`.
#[inline]
fn ln_probe_factor(span: &Span, f: f64) -> f64 {
    -0.5 * span.ln_gain_at(f) - span.alpha0.eval(f) * span.length - raman_loss(span, f)
}

/// `g0` for every span, in one pass.
pub fn g0_all(link: &Link, f1s: f64, f2s: f64, f: f64, convention: G0Convention) -> Vec<f64> {
    let f3s = f3_star(f1s, f2s, f);
    let n = link.spans.len();
    let probe: Vec<f64> = link.spans.iter().map(|s| ln_probe_factor(s, f)).collect();
    // suffix sums of the probe product
    let mut tail = vec![0.0; n + 1];
    for p in (0..n).rev() {
        tail[p] = tail[p + 1] + probe[p];
    }
    let mut out = Vec::with_capacity(n);
    let mut head = 0.0;
    for (s, span) in link.spans.iter().enumerate() {
        let after = match convention {
            G0Convention::IncludeCurrentSpan => tail[s],
            G0Convention::ExcludeCurrentSpan => tail[s + 1],
        };
        out.push((head + after).exp());
        head += ln_pump_factor(span, f1s) + ln_pump_factor(span, f2s) + ln_pump_factor(span, f3s);
    }
    out
}

/// `g0` of span `s`.
pub fn g0(link: &Link, s: usize, f1s: f64, f2s: f64, f: f64, convention: G0Convention) -> Result<f64> {
    if s >= link.spans.len() {
        return Err(NliError::SpanOutOfRange { index: s, spans: link.spans.len() });
    }
    Ok(g0_all(link, f1s, f2s, f, convention)[s])
}

/// `g0` of every span for a link whose spans all have flat loss.
pub fn g0_flat_all(link: &Link, f1s: f64, f2s: f64, f: f64, convention: G0Convention) -> Result<Vec<f64>> {
    let f3s = f3_star(f1s, f2s, f);
    let n = link.spans.len();
    let mut pump = Vec::with_capacity(n);
    let mut probe = Vec::with_capacity(n);
    for (p, span) in link.spans.iter().enumerate() {
        let alpha = span.flat_alpha0().ok_or(NliError::NotFlatLoss(p))?;
        let decay = (-alpha * span.length).exp();
        pump.push((span.gain_at(f1s) * span.gain_at(f2s) * span.gain_at(f3s)).sqrt() * decay * decay * decay);
        probe.push(decay / span.gain_at(f).sqrt());
    }
    let mut tail = vec![1.0; n + 1];
    for p in (0..n).rev() {
        tail[p] = tail[p + 1] * probe[p];
    }
    let mut out = Vec::with_capacity(n);
    let mut head = 1.0;
    for s in 0..n {
        let after = match convention {
            G0Convention::IncludeCurrentSpan => tail[s],
            G0Convention::ExcludeCurrentSpan => tail[s + 1],
        };
        out.push(head * after);
        head *= pump[s];
    }
    Ok(out)
}

/// `g0` of span `s` for a link whose spans all have flat loss.
pub fn g0_flat(link: &Link, s: usize, f1s: f64, f2s: f64, f: f64, convention: G0Convention) -> Result<f64> {
    if s >= link.spans.len() {
        return Err(NliError::SpanOutOfRange { index: s, spans: link.spans.len() });
    }
    Ok(g0_flat_all(link, f1s, f2s, f, convention)?[s])
}

/// Launch PSD of `channel` scaled to the input of span `s`, evaluated at `f_eval`.
pub fn psd_at_span(link: &Link, channel: usize, s: usize, f_eval: f64) -> Result<f64> {
    if s >= link.spans.len() {
        return Err(NliError::SpanOutOfRange { index: s, spans: link.spans.len() });
    }
    let ch = link.comb.get(channel).ok_or(NliError::CutOutOfRange { index: channel, channels: link.comb.len() })?;
    let ln: f64 = link.spans[..s]
        .iter()
        .map(|span| span.ln_gain_at(f_eval) - 2.0 * span.alpha0.eval(f_eval) * span.length - 2.0 * raman_loss(span, f_eval))
        .sum();
    Ok(ch.psd * ln.exp())
}

/// Evaluation point identifying cached span parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpanKey {
    pub span: usize,
    f1s: u64,
    f2s: u64,
    f: u64,
}

impl SpanKey {
    pub fn new(span: usize, f1s: f64, f2s: f64, f: f64) -> Self {
        SpanKey { span, f1s: f1s.to_bits(), f2s: f2s.to_bits(), f: f.to_bits() }
    }
}

/// Memo of span parameters. Meant to be owned by one worker; results are
/// identical to the uncached path.
#[derive(Debug, Default)]
pub struct SpanParamCache {
    map: HashMap<SpanKey, (LorentzianCoefficients, bool)>,
}

impl SpanParamCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Lorentzian coefficients and the sign-change flag for one evaluation point.
    pub fn get(&mut self, link: &Link, key: SpanKey, f1s: f64, f2s: f64, f: f64) -> Result<(LorentzianCoefficients, bool)> {
        if let Some(v) = self.map.get(&key) {
            return Ok(*v);
        }
        let (params, fit) = effective_params(&link.spans[key.span], f1s, f2s, f)?;
        let v = (lorentzian_coefficients(&params)?, fit.sign_change);
        self.map.insert(key, v);
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}
