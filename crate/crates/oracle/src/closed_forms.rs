//! The printed flat-loss formulas, term by term, as an independent check on
//! the library's generic rectangle evaluation.
//!
//! Scalar loss per span is assumed throughout; dispersion at the CUT must not
//! vanish (the printed forms divide by it).

use std::f64::consts::PI;

use nli_core::model::Link;

use crate::dilog::{asinh_kernel, dilog_series};
use crate::physics::g0_flat_direct;

const PREFACTOR: f64 = 16.0 / 27.0;

fn alpha(link: &Link, s: usize) -> f64 {
    link.spans[s].alpha0.eval(0.0)
}

/// Residual dispersion of span `s` for the frequency pair `(fa, fb)`.
pub fn beta2_pair(link: &Link, s: usize, fa: f64, fb: f64) -> f64 {
    let span = &link.spans[s];
    span.beta2 + PI * span.beta3 * (fa + fb - 2.0 * span.fc)
}

/// SCI + XCI with the exact kernel: channel sum with multiplicity `2 − δ`,
/// prefactor `1/(8π²α₀β̄₂)` and the two-term kernel difference.
pub fn sci_xci_flat_dilog(link: &Link) -> f64 {
    let cut = &link.comb[link.cut_index];
    let f_cut = 0.5 * (cut.f_start + cut.f_end);
    let bw_cut = cut.f_end - cut.f_start;
    let mut total = 0.0;
    for (m, ch) in link.comb.iter().enumerate() {
        let mid = 0.5 * (ch.f_start + ch.f_end);
        let bw = ch.f_end - ch.f_start;
        let mult = if m == link.cut_index { 1.0 } else { 2.0 };
        let mut spans = 0.0;
        for s in 0..link.spans.len() {
            let a0 = alpha(link, s);
            let b = beta2_pair(link, s, mid, f_cut);
            let g0 = g0_flat_direct(link, s, mid, f_cut, f_cut);
            let gamma = link.spans[s].gamma;
            let arg = |j: i32| PI * PI * b / a0 * bw_cut * (mid - f_cut + f64::from(j) * 0.5 * bw);
            let j_sum = -dilog_series(arg(-1)) + dilog_series(arg(1));
            spans += gamma * gamma * g0 * g0 / (8.0 * PI * PI * a0 * b) * j_sum;
        }
        total += PREFACTOR * ch.psd * ch.psd * cut.psd * mult * spans;
    }
    total
}

/// The same with the logarithmic kernel: SCI through
/// `asinh(π²|β̄₂|BW²/(4α₀))/(4πα₀|β̄₂|)`, XCI through the two-term asinh
/// difference over `4πα₀|β̄₂|`.
pub fn sci_xci_flat_asinh(link: &Link) -> (f64, f64) {
    let cut = &link.comb[link.cut_index];
    let f_cut = 0.5 * (cut.f_start + cut.f_end);
    let bw_cut = cut.f_end - cut.f_start;
    let mut sci = 0.0;
    for s in 0..link.spans.len() {
        let a0 = alpha(link, s);
        let b = beta2_pair(link, s, f_cut, f_cut).abs();
        let g0 = g0_flat_direct(link, s, f_cut, f_cut, f_cut);
        let gamma = link.spans[s].gamma;
        sci += gamma * gamma * g0 * g0 * (PI * PI * b / (4.0 * a0) * bw_cut * bw_cut).asinh() / (4.0 * PI * a0 * b);
    }
    sci *= PREFACTOR * cut.psd.powi(3);

    let mut xci = 0.0;
    for (m, ch) in link.comb.iter().enumerate() {
        if m == link.cut_index {
            continue;
        }
        let mid = 0.5 * (ch.f_start + ch.f_end);
        let bw = ch.f_end - ch.f_start;
        let mut spans = 0.0;
        for s in 0..link.spans.len() {
            let a0 = alpha(link, s);
            let b = beta2_pair(link, s, mid, f_cut).abs();
            let g0 = g0_flat_direct(link, s, mid, f_cut, f_cut);
            let gamma = link.spans[s].gamma;
            let arg = |j: f64| PI * PI * b / (2.0 * a0) * bw_cut * (mid - f_cut + j * 0.5 * bw);
            let j_sum = -arg(-1.0).asinh() + arg(1.0).asinh();
            spans += gamma * gamma * g0 * g0 / (4.0 * PI * a0 * b) * j_sum;
        }
        xci += PREFACTOR * ch.psd * ch.psd * cut.psd * spans;
    }
    (sci, xci)
}

/// Regrouped form: SCI through `F(π²β̄₂BW²/(2α₀))/(4π²α₀β̄₂)` and XCI through
/// the kernel difference over `4π²α₀β̄₂`, with `kernel` either the exact
/// function or `π asinh(x/2)`.
pub fn sci_xci_flat_regrouped(link: &Link, kernel: fn(f64) -> f64) -> (f64, f64) {
    let cut = &link.comb[link.cut_index];
    let f_cut = 0.5 * (cut.f_start + cut.f_end);
    let bw_cut = cut.f_end - cut.f_start;
    let mut sci = 0.0;
    for s in 0..link.spans.len() {
        let a0 = alpha(link, s);
        let b = beta2_pair(link, s, f_cut, f_cut);
        let g0 = g0_flat_direct(link, s, f_cut, f_cut, f_cut);
        let gamma = link.spans[s].gamma;
        sci += gamma * gamma * g0 * g0 * kernel(PI * PI * b / (2.0 * a0) * bw_cut * bw_cut) / (4.0 * PI * PI * a0 * b);
    }
    sci *= PREFACTOR * cut.psd.powi(3);
    let mut xci = 0.0;
    for (m, ch) in link.comb.iter().enumerate() {
        if m == link.cut_index {
            continue;
        }
        let mid = 0.5 * (ch.f_start + ch.f_end);
        let bw = ch.f_end - ch.f_start;
        let mut spans = 0.0;
        for s in 0..link.spans.len() {
            let a0 = alpha(link, s);
            let b = beta2_pair(link, s, mid, f_cut);
            let g0 = g0_flat_direct(link, s, mid, f_cut, f_cut);
            let gamma = link.spans[s].gamma;
            let arg = |j: f64| PI * PI * b / a0 * bw_cut * (mid - f_cut + j * 0.5 * bw);
            spans += gamma * gamma * g0 * g0 / (4.0 * PI * PI * a0 * b) * (kernel(arg(1.0)) - kernel(arg(-1.0)));
        }
        xci += PREFACTOR * ch.psd * ch.psd * cut.psd * spans;
    }
    (sci, xci)
}

/// Exact kernel for [`sci_xci_flat_regrouped`].
pub fn exact_kernel(x: f64) -> f64 {
    dilog_series(x)
}

/// Logarithmic kernel for [`sci_xci_flat_regrouped`].
pub fn log_kernel(x: f64) -> f64 {
    asinh_kernel(x)
}

/// Accumulated residual dispersion before span `s`, in ps².
fn accumulated_ps2(link: &Link, s: usize, fa: f64, fb: f64) -> f64 {
    let mut acc = 0.0;
    for k in 0..s {
        acc += beta2_pair(link, k, fa, fb) * link.spans[k].length;
    }
    acc.abs() * 1e24
}

fn gaussian_switch(phi: f64) -> f64 {
    if phi.abs() < 1e-9 {
        1.0
    } else {
        0.0
    }
}

/// SCI correction factor of span `s`, written out from the fitted model.
pub fn rho_cut_direct(link: &Link, s: usize, a: &[f64; 23]) -> f64 {
    let cut = &link.comb[link.cut_index];
    let f_cut = 0.5 * (cut.f_start + cut.f_end);
    let bw_ghz = (cut.f_end - cut.f_start) / 1e9;
    let acc = accumulated_ps2(link, s, f_cut, f_cut);
    let r = cut.rolloff;
    let phi = cut.phi;
    let left = 1.0 + a[0] * r.powf(a[1]);
    let inner = 1.0 + a[7] * bw_ghz.powf(a[8]) + a[9] * (acc + a[10]).log10();
    left * (a[2] + a[3] * phi.powf(a[4]) + a[5] * (1.0 + a[6] * gaussian_switch(phi)) * inner)
}

/// XCI correction factor of span `s` for interferer `m`.
pub fn rho_mch_direct(link: &Link, s: usize, m: usize, a: &[f64; 23]) -> f64 {
    let cut = &link.comb[link.cut_index];
    let ch = &link.comb[m];
    let f_cut = 0.5 * (cut.f_start + cut.f_end);
    let mid = 0.5 * (ch.f_start + ch.f_end);
    let acc = accumulated_ps2(link, s, mid, f_cut);
    let r = cut.rolloff;
    let phi = ch.phi;
    let left = 1.0 + a[11] * r.powf(a[12]);
    let tail = (1.0 + a[20] * gaussian_switch(phi)) * (1.0 + a[21] * (acc + a[22]).log10());
    left * (a[13] + a[14] * (phi + a[15]).powf(a[16]) + a[17] * (phi + a[18]).powf(a[19]) * tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nli_core::model::{Channel, Span};

    #[test]
    fn regrouped_log_form_equals_asinh_form() {
        let spans = vec![Span::flat(9e4, 2.5e-5, 1.3e-3, -4e-27, 1.2e-40, 193.41e12); 2];
        let comb = vec![
            Channel::from_center(193.3e12, 64e9, 1e-3).unwrap(),
            Channel::from_center(193.41e12, 96e9, 1e-3).unwrap(),
            Channel::from_center(193.5e12, 32e9, 1e-3).unwrap(),
        ];
        let link = Link::new(spans, comb, 1).unwrap();
        let (s1, x1) = sci_xci_flat_asinh(&link);
        let (s2, x2) = sci_xci_flat_regrouped(&link, log_kernel);
        assert!(((s1 - s2) / s1).abs() < 1e-13);
        assert!(((x1 - x2) / x1).abs() < 1e-13);
        let (s3, x3) = sci_xci_flat_regrouped(&link, exact_kernel);
        let total = sci_xci_flat_dilog(&link);
        assert!(((s3 + x3 - total) / total).abs() < 1e-13);
    }
}
