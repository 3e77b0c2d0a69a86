//! The library checked against the independent reference, quantity by quantity.

use std::f64::consts::PI;

use nli_core::engine::{g_nli_generic, rho_cut, rho_mch, sci_xci, CorrectionCoefficients, LossMode};
use nli_core::island::island_descriptor;
use nli_core::model::{Channel, Link, Profile, Span};
use nli_core::span::{effective_params, fit_effective_raman, g0, lorentzian_coefficients, G0Convention};
use nli_core::special::{f_int, f_int_asinh, rect_lorentzian_integral, sine_integral, FintMode};
use nli_oracle::closed_forms::{rho_cut_direct, rho_mch_direct, sci_xci_flat_asinh, sci_xci_flat_dilog};
use nli_oracle::dilog::{asinh_kernel, dilog_series};
use nli_oracle::physics::{g0_direct, raman_fit, raman_rhs_integral, span_point, xi_squared};
use nli_oracle::polygon::island_polygon_exact;
use nli_oracle::quadrature::{integrate, integrate_rectangle, Tolerance};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn raman_span(length: f64) -> Span {
    let mut s = Span::flat(length, 2.3e-5, 1.3e-3, -2.1e-26, 1.4e-40, 193.41e12);
    s.alpha0 = Profile::table(vec![190e12, 193e12, 197e12], vec![2.6e-5, 2.3e-5, 2.4e-5]).unwrap();
    s.alpha1 = Profile::table(vec![190e12, 197e12], vec![-4e-6, -1.5e-6]).unwrap();
    s.sigma = Profile::table(vec![190e12, 197e12], vec![4.2e-5, 5.5e-5]).unwrap();
    s.gain = nli_core::model::EdfaGain::Profile(Profile::table(vec![190e12, 197e12], vec![80.0, 120.0]).unwrap());
    s
}

fn comb(centers: &[f64], baud: f64, power: f64) -> Vec<Channel> {
    centers.iter().map(|&c| Channel::from_center(c, baud, power).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn f_int_matches_raw_series(x in prop_oneof![-2f64..2.0, -1e8f64..1e8, -1e-6f64..1e-6]) {
        let core = f_int(x).unwrap();
        let series = dilog_series(x);
        prop_assert!((core - series).abs() <= 1e-14 * series.abs().max(1.0), "{x}: {core} vs {series}");
        prop_assert!((f_int_asinh(x) - asinh_kernel(x)).abs() <= 1e-14 * asinh_kernel(x).abs().max(1e-300));
    }

    #[test]
    fn island_area_and_centroid_match_polygon(
        starts in proptest::collection::vec(0f64..200.0, 3),
        widths in proptest::collection::vec(5f64..80.0, 3),
        f in -100f64..300.0,
    ) {
        let ch: Vec<Channel> = starts.iter().zip(&widths)
            .map(|(&s, &w)| Channel::new(193e12 + s * 1e9, 193e12 + (s + w) * 1e9, 1e-15).unwrap())
            .collect();
        let ff = 193e12 + f * 1e9;
        let a = island_descriptor(&ch, 0, 1, 2, ff);
        let p = island_polygon_exact(&ch, 0, 1, 2, ff);
        let scale = widths[0] * widths[1] * 1e18;
        prop_assert!((a.area - p.area).abs() <= 1e-12 * scale, "{} vs {}", a.area, p.area);
        match (a.centroid, p.centroid) {
            (Some(c), Some(q)) => {
                // centroids of slivers are ill-conditioned; compare only real islands
                if p.area > 1e-9 * scale {
                    prop_assert!((c.0 - q.0).abs() <= 1e-6 * 1e9 && (c.1 - q.1).abs() <= 1e-6 * 1e9);
                }
            }
            (None, None) => {}
            (c, q) => prop_assert!(p.area <= 1e-12 * scale, "{c:?} vs {q:?}"),
        }
    }

    #[test]
    fn rectangle_integral_matches_quadrature(
        x1 in -3f64..3.0, wx in 0.01f64..4.0, y1 in -3f64..3.0, wy in 0.01f64..4.0, a in 0.01f64..30.0,
    ) {
        let b = 1.7;
        let closed = rect_lorentzian_integral(a, b, x1, x1 + wx, y1, y1 + wy).unwrap();
        let quad = integrate_rectangle(
            |x, y| b / (1.0 + a * a * x * x * y * y),
            (x1, x1 + wx), (y1, y1 + wy), &[0.0], &[0.0], Tolerance::relative(1e-12),
        );
        prop_assert!(quad.converged);
        prop_assert!(rel(closed, quad.value) <= 1e-10, "{closed} vs {}", quad.value);
    }
}

#[test]
fn sine_integral_matches_quadrature() {
    for x in [1e-6, 0.3, 1.0, 4.0, 17.5, 60.0, 300.0] {
        let breaks: Vec<f64> = (1..(x / PI) as usize + 1).map(|k| k as f64 * PI).filter(|&b| b < x).collect();
        let q = integrate(|t| if t == 0.0 { 1.0 } else { t.sin() / t }, 0.0, x, &breaks, Tolerance::relative(1e-14));
        assert!(q.converged, "{x}: {q:?}");
        assert!(rel(sine_integral(x), q.value) < 1e-13, "{x}");
    }
}

#[test]
fn island_area_matches_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let ch = comb(&[193.00e12, 193.06e12, 193.09e12], 50e9, 1e-3);
    let f = 193.03e12;
    let island = island_descriptor(&ch, 0, 1, 2, f);
    let (m, n, k) = (&ch[0], &ch[1], &ch[2]);
    let trials = 10_000_000;
    let mut hits = 0usize;
    let mut sum = (0.0, 0.0);
    for _ in 0..trials {
        let f1 = rng.random_range(m.f_start..m.f_end);
        let f2 = rng.random_range(n.f_start..n.f_end);
        let f3 = f1 + f2 - f;
        if f3 >= k.f_start && f3 <= k.f_end {
            hits += 1;
            sum.0 += f1;
            sum.1 += f2;
        }
    }
    let box_area = m.bandwidth() * n.bandwidth();
    let frac = hits as f64 / trials as f64;
    let sigma = (frac * (1.0 - frac) / trials as f64).sqrt();
    assert!((island.area / box_area - frac).abs() < 3.0 * sigma, "{} vs {frac}", island.area / box_area);
    let (c1, c2) = island.centroid.unwrap();
    // standard error of a coordinate mean is at most half the width over √hits
    let se = 0.5 / (hits as f64).sqrt();
    assert!((c1 - sum.0 / hits as f64).abs() < 3.0 * se * m.bandwidth());
    assert!((c2 - sum.1 / hits as f64).abs() < 3.0 * se * n.bandwidth());
}

#[test]
fn g0_matches_direct_products() {
    let spans: Vec<Span> = [7e4, 9e4, 1.1e5, 6e4].iter().map(|&l| raman_span(l)).collect();
    let link = Link::new(spans, comb(&[192.5e12, 193.5e12, 194.2e12], 64e9, 1e-3), 1).unwrap();
    let (f1, f2, f) = (192.5e12, 194.2e12, 193.5e12);
    for s in 0..4 {
        for (conv, include) in [(G0Convention::default(), true), (G0Convention::ExcludeCurrentSpan, false)] {
            let core = g0(&link, s, f1, f2, f, conv).unwrap();
            let direct = g0_direct(&link, s, f1, f2, f, include);
            assert!(rel(core, direct) < 1e-12, "span {s}: {core} vs {direct}");
        }
    }
}

#[test]
fn raman_fit_matches_grid_oracle() {
    let span = raman_span(9e4);
    for (f1, f2, f) in [(192.5e12, 194.2e12, 193.5e12), (191e12, 191e12, 196e12), (193e12, 193.1e12, 193.05e12)] {
        let fit = fit_effective_raman(&span, f1, f2, f).unwrap();
        let (a1, sigma) = raman_fit(&span, f1, f2, f);
        assert!(rel(fit.alpha1_bar, a1) < 1e-12);
        assert!(rel(fit.sigma_bar, sigma) < 1e-6, "{} vs {sigma}", fit.sigma_bar);
        // the fitted exponential carries the same integral as the profile
        let fitted = a1 * (1.0 - (-sigma * span.length).exp()) / sigma;
        assert!(rel(fitted.abs(), raman_rhs_integral(&span, f1, f2, f)) < 1e-7);
    }
}

#[test]
fn lorentzian_split_matches_oracle_efficiency() {
    let span = raman_span(9e4);
    let (f1s, f2s, f) = (192.5e12, 194.2e12, 193.5e12);
    let (p, _) = effective_params(&span, f1s, f2s, f).unwrap();
    let c = lorentzian_coefficients(&p).unwrap();
    let sp = span_point(&span, f1s, f2s, f);
    for x in [0.0, 1e18, -3e20, 2e21, 5e22] {
        assert!(rel(c.eval(x), xi_squared(&sp, x)) < 1e-6, "{x}");
    }
}

fn flat_link() -> Link {
    let spans: Vec<Span> = [8e4, 1e5, 1.2e5]
        .iter()
        .map(|&l| Span::flat(l, 2.4e-5, 1.3e-3, -2.2e-26, 1.4e-40, 193.41e12))
        .collect();
    let mut ch = comb(&[193.1e12, 193.2e12, 193.41e12, 193.6e12], 64e9, 1e-3);
    ch.push(Channel::from_center(193.75e12, 96e9, 2e-3).unwrap());
    Link::new(spans, ch, 2).unwrap()
}

#[test]
fn flat_closed_forms_match_literal_formulas() {
    let link = flat_link();
    let conv = G0Convention::default();
    let engine = sci_xci(&link, Some(LossMode::Flat), FintMode::Asinh, conv).unwrap();
    let (sci, xci) = sci_xci_flat_asinh(&link);
    assert!(rel(engine.sci, sci) < 1e-12, "{} vs {sci}", engine.sci);
    assert!(rel(engine.xci, xci) < 1e-12, "{} vs {xci}", engine.xci);
    let engine = sci_xci(&link, Some(LossMode::General), FintMode::Dilog, conv).unwrap();
    let literal = sci_xci_flat_dilog(&link);
    assert!(rel(engine.sci + engine.xci, literal) < 1e-12);
}

#[test]
fn correction_factors_match_direct_evaluation() {
    let mut link = flat_link();
    for (i, ch) in link.comb.iter_mut().enumerate() {
        ch.rolloff = 0.05 * i as f64;
        ch.phi = [1.0, 0.68, 0.0, 0.619, 0.5556][i];
    }
    let coeffs = CorrectionCoefficients::default();
    for s in 0..3 {
        assert!(rel(rho_cut(&link, s, &coeffs).unwrap(), rho_cut_direct(&link, s, &coeffs.0)) < 1e-12);
        for m in [0, 1, 3, 4] {
            assert!(rel(rho_mch(&link, s, m, &coeffs).unwrap(), rho_mch_direct(&link, s, m, &coeffs.0)) < 1e-12);
        }
    }
}

#[test]
fn generic_closed_form_matches_square_quadrature() {
    let spans = vec![raman_span(8e4), raman_span(1e5)];
    let link = Link::new(spans, comb(&[193.3e12, 193.37e12, 193.45e12], 50e9, 1e-3), 1).unwrap();
    let f = link.cut().center();
    let closed = g_nli_generic(&link, f, FintMode::Dilog, G0Convention::default()).unwrap();
    let oracle = nli_oracle::gn_total(&link, f, nli_oracle::Domain::Square, 1e-10);
    assert_eq!(oracle.unconverged, 0);
    assert!(rel(closed.sci, oracle.sci) < 1e-9, "{} vs {}", closed.sci, oracle.sci);
    assert!(rel(closed.xci, oracle.xci) < 1e-9, "{} vs {}", closed.xci, oracle.xci);
    assert!(rel(closed.mci, oracle.mci) < 1e-9, "{} vs {}", closed.mci, oracle.mci);
}

#[test]
fn series_agrees_with_library_at_ten() {
    assert!((dilog_series(10.0) - f_int(10.0).unwrap()).abs() < 1e-12);
    assert_eq!(dilog_series(0.0), 0.0);
}

#[test]
fn halving_tolerance_stays_within_error_estimate() {
    let spans = vec![raman_span(8e4), raman_span(1e5)];
    let link = Link::new(spans, comb(&[193.3e12, 193.37e12, 193.45e12], 50e9, 1e-3), 1).unwrap();
    let f = link.cut().center();
    for (m, n, k) in [(1, 1, 1), (0, 1, 0), (0, 2, 1), (2, 2, 1)] {
        for (coarse, fine) in [
            (
                nli_oracle::gn_quadrature_true_island(&link, f, m, n, k, 1e-6),
                nli_oracle::gn_quadrature_true_island(&link, f, m, n, k, 5e-7),
            ),
            (
                nli_oracle::gn_quadrature_square(&link, f, m, n, k, 1e-8),
                nli_oracle::gn_quadrature_square(&link, f, m, n, k, 5e-9),
            ),
        ] {
            assert!(coarse.converged && fine.converged);
            assert!((coarse.value - fine.value).abs() <= coarse.error.max(1e-15 * coarse.value.abs()), "({m},{n},{k})");
        }
    }
}

#[test]
fn empty_island_contributes_nothing() {
    let link = Link::new(vec![raman_span(8e4)], comb(&[193.0e12, 193.5e12, 194.0e12], 50e9, 1e-3), 1).unwrap();
    let f = link.cut().center();
    // 193.0 + 193.0 − 194.0 = 192.0 THz: far from every channel
    let e = nli_oracle::gn_quadrature_true_island(&link, f, 0, 0, 2, 1e-7);
    assert_eq!(e.value, 0.0);
    assert_eq!(nli_oracle::gn_quadrature_square(&link, f, 0, 0, 2, 1e-9).value, 0.0);
}

#[test]
fn hexagon_and_its_square_differ_measurably() {
    let spans = vec![Span::flat(1e5, 2.5e-5, 1.3e-3, -2.1e-26, 0.0, 193.41e12)];
    let link = Link::new(spans, comb(&[193.41e12], 64e9, 1e-3), 0).unwrap();
    let f = link.cut().center();
    let hex = nli_oracle::gn_quadrature_true_island(&link, f, 0, 0, 0, 1e-7);
    let square = nli_oracle::gn_quadrature_square(&link, f, 0, 0, 0, 1e-9);
    let diff_db = 10.0 * (square.value / hex.value).log10();
    println!("SCI hexagon vs equal-area square: {diff_db:.4} dB");
    assert!(diff_db.is_finite() && diff_db.abs() > 1e-3 && diff_db.abs() < 3.0);
}
