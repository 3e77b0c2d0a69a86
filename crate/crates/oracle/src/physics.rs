//! Link-function ingredients, evaluated the plain way: products instead of
//! log sums, grid integrals instead of closed forms, complex arithmetic for
//! the span efficiency.

use std::f64::consts::PI;

use nli_core::model::{EdfaGain, Link, Span};
use num_complex::Complex64;

/// Amplifier power gain of `span` at `f`.
pub fn gain(span: &Span, f: f64) -> f64 {
    match &span.gain {
        EdfaGain::Transparent => (2.0 * span.alpha0.eval(f) * span.length).exp(),
        EdfaGain::Profile(p) => p.eval(f),
    }
}

/// Integrated Raman loss `∫₀ᴸ α₁ e^{−σz} dz` of one field.
fn raman_integral(span: &Span, f: f64) -> f64 {
    let a1 = span.alpha1.eval(f);
    if a1 == 0.0 {
        return 0.0;
    }
    let s = span.sigma.eval(f);
    a1 / s - a1 / s * (-s * span.length).exp()
}

/// Power profile factor of span `s` at the island `(f1s, f2s)`, frequency
/// `f`. With `include_current` the probe product starts at span `s` itself.
pub fn g0_direct(link: &Link, s: usize, f1s: f64, f2s: f64, f: f64, include_current: bool) -> f64 {
    let f3s = f1s + f2s - f;
    let mut g = 1.0;
    for span in &link.spans[..s] {
        let l = span.length;
        let mut factor = (gain(span, f1s) * gain(span, f2s) * gain(span, f3s)).sqrt();
        factor *= (-l * (span.alpha0.eval(f1s) + span.alpha0.eval(f2s) + span.alpha0.eval(f3s))).exp();
        factor *= (-(raman_integral(span, f1s) + raman_integral(span, f2s) + raman_integral(span, f3s))).exp();
        g *= factor;
    }
    let start = if include_current { s } else { s + 1 };
    for span in &link.spans[start..] {
        let factor = gain(span, f).powf(-0.5) * (-(span.alpha0.eval(f) * span.length + raman_integral(span, f))).exp();
        g *= factor;
    }
    g
}

/// Flat-loss power profile factor with scalar losses.
pub fn g0_flat_direct(link: &Link, s: usize, f1s: f64, f2s: f64, f: f64) -> f64 {
    let f3s = f1s + f2s - f;
    let mut g = 1.0;
    for span in &link.spans[..s] {
        let a = span.alpha0.eval(f);
        g *= (gain(span, f1s) * gain(span, f2s) * gain(span, f3s)).sqrt() * (-3.0 * a * span.length).exp();
    }
    for span in &link.spans[s..] {
        let a = span.alpha0.eval(f);
        g *= (-a * span.length).exp() / gain(span, f).sqrt();
    }
    g
}

/// `ᾱ₀`, `ᾱ₁`, `σ̄`, `β̄₂` of one span at one island.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpanPoint {
    pub alpha0: f64,
    pub alpha1: f64,
    pub sigma: f64,
    pub beta2: f64,
}

/// Grid resolution of the Raman integral.
pub const RAMAN_GRID: usize = 10_000;

/// Combined Raman profile `½(Σ α₁ e^{−σz})` with the probe term negated.
pub fn raman_rhs(span: &Span, f1s: f64, f2s: f64, f: f64, z: f64) -> f64 {
    let f3s = f1s + f2s - f;
    let t = |fr: f64| span.alpha1.eval(fr) * (-span.sigma.eval(fr) * z).exp();
    0.5 * (t(f1s) + t(f2s) - t(f) + t(f3s))
}

/// Composite Simpson integral of `|RHS|` over the span on [`RAMAN_GRID`] panels.
pub fn raman_rhs_integral(span: &Span, f1s: f64, f2s: f64, f: f64) -> f64 {
    let n = RAMAN_GRID;
    let h = span.length / n as f64;
    let mut sum = 0.0;
    for i in 0..=n {
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += w * raman_rhs(span, f1s, f2s, f, i as f64 * h).abs();
    }
    sum * h / 3.0
}

/// `ᾱ₁` at `z = 0` and `σ̄` giving the same span integral, by regula falsi.
pub fn raman_fit(span: &Span, f1s: f64, f2s: f64, f: f64) -> (f64, f64) {
    let a1 = raman_rhs(span, f1s, f2s, f, 0.0);
    if a1 == 0.0 {
        return (0.0, 0.0);
    }
    let area = raman_rhs_integral(span, f1s, f2s, f);
    let l = span.length;
    // ∫ |a1| e^{−σz} = area, solved for σ
    let h = |sigma: f64| {
        let x = sigma * l;
        let phi = if x.abs() < 1e-9 { 1.0 - 0.5 * x } else { (1.0 - (-x).exp()) / x };
        a1.abs() * l * phi - area
    };
    let (mut lo, mut hi) = (-1.0 / l, 1.0 / l);
    while h(lo) < 0.0 {
        lo *= 2.0;
    }
    while h(hi) > 0.0 {
        hi *= 2.0;
    }
    let (mut flo, mut fhi) = (h(lo), h(hi));
    let mut side = 0;
    for _ in 0..500 {
        let mid = (lo * fhi - hi * flo) / (fhi - flo);
        let fm = h(mid);
        if fm == 0.0 || (hi - lo).abs() <= 1e-15 * mid.abs() {
            return (a1, mid);
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = mid;
            fhi = fm;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    (a1, 0.5 * (lo + hi))
}

/// Effective span parameters at the island `(f1s, f2s)` and frequency `f`.
pub fn span_point(span: &Span, f1s: f64, f2s: f64, f: f64) -> SpanPoint {
    let f3s = f1s + f2s - f;
    let a = &span.alpha0;
    let alpha0 = 0.5 * (a.eval(f1s) + a.eval(f2s) + a.eval(f3s) - a.eval(f));
    let (alpha1, sigma) = raman_fit(span, f1s, f2s, f);
    let beta2 = span.beta2 + PI * span.beta3 * (f1s + f2s - 2.0 * span.fc);
    SpanPoint { alpha0, alpha1, sigma, beta2 }
}

/// `|ξ|²` at detuning product `p = (f1 − f)(f2 − f)`.
pub fn xi_squared(sp: &SpanPoint, p: f64) -> f64 {
    let phase = Complex64::new(0.0, 4.0 * PI * PI * p * sp.beta2);
    let first = Complex64::new(2.0 * sp.alpha0, 0.0) - phase;
    let second = Complex64::new(2.0 * sp.alpha0 + sp.sigma, 0.0) - phase;
    let xi = 1.0 / first - 2.0 * sp.alpha1 / (first * second);
    xi.norm_sqr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nli_core::model::{Channel, Profile};

    #[test]
    fn transparent_g0() {
        let spans: Vec<Span> = (0..3).map(|_| Span::flat(1e5, 2.5e-5, 1e-3, -2e-26, 0.0, 193e12)).collect();
        let link = Link::new(spans, vec![Channel::from_center(193e12, 32e9, 1e-3).unwrap()], 0).unwrap();
        for s in 0..3 {
            let expect = (-2.0 * 2.5e-5 * 1e5 * (3 - s) as f64).exp();
            assert!((g0_direct(&link, s, 193e12, 193e12, 193e12, true) - expect).abs() < 1e-14 * expect);
        }
    }

    #[test]
    fn equal_raman_profiles_fit_exactly() {
        let mut span = Span::flat(1e5, 2.5e-5, 1e-3, -2e-26, 0.0, 193e12);
        span.alpha1 = Profile::Constant(4e-6);
        span.sigma = Profile::Constant(5e-5);
        let (a1, s) = raman_fit(&span, 193.1e12, 193.2e12, 193.0e12);
        assert!((a1 - 4e-6).abs() < 1e-20);
        assert!((s - 5e-5).abs() < 1e-12 * 5e-5, "{s}");
    }

    #[test]
    fn zero_detuning_efficiency() {
        let sp = SpanPoint { alpha0: 2e-5, alpha1: 3e-6, sigma: 4e-5, beta2: -2e-26 };
        let expect = (1.0 / (2.0 * sp.alpha0) - 2.0 * sp.alpha1 / ((2.0 * sp.alpha0) * (2.0 * sp.alpha0 + sp.sigma))).powi(2);
        assert!((xi_squared(&sp, 0.0) - expect).abs() < 1e-14 * expect);
    }
}
