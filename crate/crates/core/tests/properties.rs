use std::f64::consts::PI;

use nli_core::config::LinkConfig;
use nli_core::engine::{g_nli_total, EngineSwitches};
use nli_core::island::{classify_triple, island_from_edges, TripleClass};
use nli_core::model::{compute_phi, Channel, Link, Span};
use nli_core::span::{g0_all, lorentzian_coefficients, xi_squared_at_detuning, EffectiveSpanParams, G0Convention};
use nli_core::special::{f_int, f_int_asinh, harmonic_number, sine_integral, FintMode};
use num_complex::Complex64;
use proptest::prelude::*;

fn dsf_span(length: f64, beta2: f64) -> Span {
    Span::flat(length, 2.5e-5, 1.77e-3, beta2, 1.21e-40, 193.41e12)
}

fn comb_from(widths: &[f64], gaps: &[f64], psd: f64) -> Vec<Channel> {
    let mut f = 193.0e12;
    let mut out = Vec::new();
    for (w, g) in widths.iter().zip(gaps) {
        out.push(Channel::new(f, f + w, psd).unwrap().with_format(0.1, 1.0));
        f += w + g;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn f_int_is_odd_and_increasing(x in -1e6f64..1e6, dx in 1e-3f64..10.0) {
        prop_assert_eq!(f_int(-x).unwrap(), -f_int(x).unwrap());
        prop_assert!(f_int(x + dx).unwrap() > f_int(x).unwrap());
        prop_assert!(f_int_asinh(x + dx) > f_int_asinh(x));
    }

    #[test]
    fn f_int_stays_near_asinh(x in 0f64..1e9) {
        // both grow like π ln x; their difference is bounded by π ln 2 at infinity
        let d = f_int(x).unwrap() - f_int_asinh(x);
        prop_assert!(d.abs() < 1.0);
        prop_assert_eq!(f_int(x).unwrap().signum(), f_int_asinh(x).signum());
    }

    #[test]
    fn sine_integral_is_odd(x in -1e4f64..1e4) {
        prop_assert_eq!(sine_integral(-x), -sine_integral(x));
    }

    #[test]
    fn harmonic_numbers_increase(n in 0usize..10_000) {
        prop_assert!(harmonic_number(n + 1) > harmonic_number(n));
    }

    #[test]
    fn island_mirror_and_bounds(
        sm in -50f64..50.0, wm in 1f64..40.0,
        sn in -50f64..50.0, wn in 1f64..40.0,
        sk in -50f64..50.0, wk in 1f64..40.0,
        f in -50f64..50.0,
    ) {
        let a = island_from_edges((sm, sm + wm), (sn, sn + wn), (sk, sk + wk), f);
        let b = island_from_edges((sn, sn + wn), (sm, sm + wm), (sk, sk + wk), f);
        prop_assert!(a.area >= 0.0);
        prop_assert!(a.area <= wm * wn * (1.0 + 1e-12));
        prop_assert!((a.area - b.area).abs() <= 1e-12 * wm * wn);
        if let (Some((a1, a2)), Some((b1, b2))) = (a.centroid, b.centroid) {
            prop_assert!((a1 - b2).abs() <= 1e-9 * 100.0);
            prop_assert!((a2 - b1).abs() <= 1e-9 * 100.0);
            prop_assert!(a1 >= sm - 1e-9 && a1 <= sm + wm + 1e-9);
            prop_assert!(a2 >= sn - 1e-9 && a2 <= sn + wn + 1e-9);
            prop_assert_eq!(a.side, a.area.sqrt());
        }
    }

    #[test]
    fn widening_k_never_shrinks_island(
        sm in -50f64..50.0, wm in 1f64..40.0,
        sn in -50f64..50.0, wn in 1f64..40.0,
        sk in -50f64..50.0, wk in 1f64..40.0, extra in 0f64..20.0,
        f in -50f64..50.0,
    ) {
        let a = island_from_edges((sm, sm + wm), (sn, sn + wn), (sk, sk + wk), f);
        let b = island_from_edges((sm, sm + wm), (sn, sn + wn), (sk - extra, sk + wk + extra), f);
        prop_assert!(b.area >= a.area - 1e-12 * wm * wn);
    }

    #[test]
    fn lorentzian_split_matches_direct(
        a0 in 1e-6f64..1e-4, a1_frac in -0.9f64..0.9, sigma in 1e-6f64..1e-3,
        beta in -3e-26f64..3e-26, x in -1e22f64..1e22,
    ) {
        let p = EffectiveSpanParams { alpha0_bar: a0, alpha1_bar: a1_frac * a0, sigma_bar: sigma, beta2_bar: beta };
        let c = lorentzian_coefficients(&p).unwrap();
        let direct = xi_squared_at_detuning(&p, x);
        prop_assert!((c.eval(x) - direct).abs() <= 1e-9 * direct);
    }

    #[test]
    fn beta2_bar_is_symmetric(fa in 190e12f64..197e12, fb in 190e12f64..197e12, b3 in -2e-40f64..2e-40) {
        let s = Span::flat(1e5, 2.5e-5, 1e-3, -1e-27, b3, 193.41e12);
        prop_assert_eq!(s.beta2_bar(fa, fb), s.beta2_bar(fb, fa));
    }

    #[test]
    fn zero_length_transparent_span_leaves_g0(
        lens in proptest::collection::vec(5e4f64..1.2e5, 1..5), at in 0usize..5,
        d1 in -100e9f64..100e9, d2 in -100e9f64..100e9,
    ) {
        let f = 193.41e12;
        let spans: Vec<Span> = lens.iter().map(|&l| dsf_span(l, -2e-27)).collect();
        let link = Link::new(spans.clone(), vec![Channel::from_center(f, 64e9, 1e-3).unwrap()], 0).unwrap();
        let base = g0_all(&link, f + d1, f + d2, f, G0Convention::default());
        let at = at.min(spans.len());
        let mut with_gap = link.clone();
        let mut empty = dsf_span(1.0, 0.0);
        empty.length = 0.0;
        empty.gamma = 0.0;
        with_gap.spans.insert(at, empty);
        let g = g0_all(&with_gap, f + d1, f + d2, f, G0Convention::default());
        let kept: Vec<f64> = g.iter().enumerate().filter(|&(i, _)| i != at).map(|(_, v)| *v).collect();
        for (x, y) in base.iter().zip(&kept) {
            prop_assert!((x - y).abs() <= 1e-13 * x);
        }
    }

    #[test]
    fn phi_is_scale_invariant(re in -3f64..3.0, im in -3f64..3.0, scale in 1e-3f64..1e3, angle in 0f64..6.3) {
        let pts = vec![
            (Complex64::new(1.0, 0.0), 0.25),
            (Complex64::new(re, im), 0.25),
            (Complex64::new(-1.0, 0.5), 0.25),
            (Complex64::new(0.3, -2.0), 0.25),
        ];
        let c = Complex64::from_polar(scale, angle);
        let scaled: Vec<_> = pts.iter().map(|&(p, w)| (p * c, w)).collect();
        let a = compute_phi(&pts).unwrap();
        let b = compute_phi(&scaled).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn link_normalization_is_idempotent(
        widths in proptest::collection::vec(10e9f64..130e9, 1..6),
        gaps in proptest::collection::vec(1e9f64..20e9, 6),
        seed in 0usize..720,
    ) {
        let mut comb = comb_from(&widths, &gaps, 1e-14);
        // deterministic shuffle
        let n = comb.len();
        for i in 0..n {
            comb.swap(i, (seed / (i + 1)) % n);
        }
        let link = Link::new(vec![dsf_span(1e5, -2e-27)], comb, 0).unwrap();
        let again = Link::new(link.spans.clone(), link.comb.clone(), link.cut_index).unwrap();
        prop_assert_eq!(&link, &again);
        let round = LinkConfig::from_link(&link).to_link().unwrap();
        prop_assert_eq!(round.cut_index, link.cut_index);
        for (a, b) in round.comb.iter().zip(&link.comb) {
            prop_assert!((a.f_start - b.f_start).abs() <= 1e-12 * b.f_start);
            prop_assert!((a.psd - b.psd).abs() <= 1e-12 * b.psd);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn nli_scales_with_cube_of_psd(
        widths in proptest::collection::vec(20e9f64..100e9, 1..5),
        gaps in proptest::collection::vec(2e9f64..20e9, 5),
        c in 0.1f64..10.0, beta in -2e-26f64..2e-26,
    ) {
        let comb = comb_from(&widths, &gaps, 2e-14);
        let cut = comb.len() / 2;
        let spans = vec![dsf_span(8e4, beta), dsf_span(1e5, beta)];
        let link = Link::new(spans, comb, cut).unwrap();
        let scaled = link.scaled_psd(c);
        let sw = EngineSwitches::default();
        let coeffs = Default::default();
        let (a, _) = g_nli_total(&link, &sw, Some(&coeffs)).unwrap();
        let (b, _) = g_nli_total(&scaled, &sw, Some(&coeffs)).unwrap();
        let c3 = c * c * c;
        for (x, y) in [(a.g_sci, b.g_sci), (a.g_xci, b.g_xci), (a.g_mci, b.g_mci), (a.g_coherence, b.g_coherence)] {
            prop_assert!((x * c3 - y).abs() <= 1e-12 * (x * c3).abs().max(1e-300));
        }
    }

    #[test]
    fn mci_switch_never_lowers_total(
        widths in proptest::collection::vec(20e9f64..100e9, 3..6),
        gaps in proptest::collection::vec(2e9f64..20e9, 6),
        beta in -2e-26f64..2e-26,
    ) {
        let comb = comb_from(&widths, &gaps, 2e-14);
        let link = Link::new(vec![dsf_span(1e5, beta)], comb, 1).unwrap();
        let on = EngineSwitches { fint: FintMode::Asinh, ..EngineSwitches::default() };
        let off = EngineSwitches { rho_mci: false, ..on };
        let coeffs = Default::default();
        let (a, _) = g_nli_total(&link, &on, Some(&coeffs)).unwrap();
        let (b, _) = g_nli_total(&link, &off, Some(&coeffs)).unwrap();
        prop_assert!(a.g_mci >= 0.0);
        prop_assert!(a.g_total >= b.g_total);
    }
}

#[test]
fn partition_counts_for_small_combs() {
    for nc in 1..=8usize {
        for cut in 0..nc {
            let mut counts = [0usize; 3];
            for m in 0..nc {
                for n in 0..nc {
                    for k in 0..nc {
                        match classify_triple(m, n, k, cut) {
                            TripleClass::Sci => counts[0] += 1,
                            TripleClass::Mci => counts[2] += 1,
                            _ => counts[1] += 1,
                        }
                    }
                }
            }
            assert_eq!(counts, [1, 6 * (nc - 1), nc * nc * nc - 1 - 6 * (nc - 1)]);
        }
    }
}

#[test]
fn catalan_value() {
    assert!((f_int(1.0).unwrap() - 1.831_931_188_354_438).abs() < 1e-14);
    assert!((f_int_asinh(2.0) - PI * 2f64.sqrt().ln_1p()).abs() < 1e-15);
}
