//! Numerical GN integrals, triple by triple.
//!
//! The integrand of one triple is `(16/27) G_m G_n G_k Σ_s γ² g0² |ξ_s|²`,
//! with `g0` and the span parameters taken at the island centroid and `|ξ|²`
//! varying with the integration point. It is integrated either over the
//! equal-area square centered at the centroid or over the exact island
//! polygon. Both domains are cut along `f1 = f` and `f2 = f`, where the
//! integrand has its ridges.

use nli_core::model::Link;

use crate::physics::{g0_direct, span_point, xi_squared, SpanPoint};
use crate::polygon::{area_centroid, island_polygon_exact, local_vertices, split_convex, IslandPolygon};
use crate::quadrature::{integrate_rectangle, integrate_triangle, Estimate, Tolerance};

const PREFACTOR: f64 = 16.0 / 27.0;

/// Default relative tolerance of the square-domain integrals.
pub const SQUARE_TOLERANCE: f64 = 1e-9;
/// Default relative tolerance of the true-island integrals.
pub const ISLAND_TOLERANCE: f64 = 1e-7;

/// Integration domain of one triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// Equal-area square at the island centroid.
    Square,
    /// The exact island polygon.
    Island,
}

/// Interference class, decided here without the library's classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    Sci,
    Xci,
    Mci,
}

pub fn class_of(m: usize, n: usize, k: usize, cut: usize) -> Class {
    let hits = [m, n, k].iter().filter(|&&i| i == cut).count();
    match hits {
        3 => Class::Sci,
        2 => Class::Xci,
        1 if (m == cut && n == k) || (n == cut && m == k) || (k == cut && m == n) => Class::Xci,
        _ => Class::Mci,
    }
}

struct TripleIntegrand {
    weights: Vec<f64>,
    points: Vec<SpanPoint>,
}

impl TripleIntegrand {
    fn new(link: &Link, centroid: (f64, f64), f: f64, include_current: bool) -> Self {
        let (c1, c2) = centroid;
        let mut weights = Vec::with_capacity(link.spans.len());
        let mut points = Vec::with_capacity(link.spans.len());
        for (s, span) in link.spans.iter().enumerate() {
            let g = g0_direct(link, s, c1, c2, f, include_current);
            weights.push(span.gamma * span.gamma * g * g);
            points.push(span_point(span, c1, c2, f));
        }
        TripleIntegrand { weights, points }
    }

    /// At detuning `(x, y) = (f1 − f, f2 − f)`.
    fn eval(&self, x: f64, y: f64) -> f64 {
        let p = x * y;
        self.weights.iter().zip(&self.points).map(|(w, sp)| w * xi_squared(sp, p)).sum()
    }
}

fn zero() -> Estimate {
    Estimate { value: 0.0, error: 0.0, converged: true, evaluations: 0 }
}

fn scale(e: Estimate, c: f64) -> Estimate {
    Estimate { value: e.value * c, error: e.error * c.abs(), ..e }
}

fn add(a: Estimate, b: Estimate) -> Estimate {
    Estimate {
        value: a.value + b.value,
        error: a.error + b.error,
        converged: a.converged && b.converged,
        evaluations: a.evaluations + b.evaluations,
    }
}

/// Square-domain contribution of triple `(m, n, k)` at frequency `f`.
pub fn gn_quadrature_square(link: &Link, f: f64, m: usize, n: usize, k: usize, rel_tol: f64) -> Estimate {
    let poly = island_polygon_exact(&link.comb, m, n, k, f);
    let Some(centroid) = poly.centroid else { return zero() };
    let side = poly.area.sqrt();
    let psd = link.comb[m].psd * link.comb[n].psd * link.comb[k].psd;
    let integrand = TripleIntegrand::new(link, centroid, f, true);
    let x0 = centroid.0 - f;
    let y0 = centroid.1 - f;
    let est = integrate_rectangle(
        |x, y| integrand.eval(x, y),
        (x0 - 0.5 * side, x0 + 0.5 * side),
        (y0 - 0.5 * side, y0 + 0.5 * side),
        &[0.0],
        &[0.0],
        Tolerance::relative(rel_tol),
    );
    scale(est, PREFACTOR * psd)
}

/// Exact-island contribution of triple `(m, n, k)` at frequency `f`.
pub fn gn_quadrature_true_island(link: &Link, f: f64, m: usize, n: usize, k: usize, rel_tol: f64) -> Estimate {
    let poly = island_polygon_exact(&link.comb, m, n, k, f);
    let Some(centroid) = poly.centroid else { return zero() };
    let psd = link.comb[m].psd * link.comb[n].psd * link.comb[k].psd;
    let integrand = TripleIntegrand::new(link, centroid, f, true);
    let est = integrate_polygon(&poly, f, |x, y| integrand.eval(x, y), rel_tol);
    scale(est, PREFACTOR * psd)
}

/// Integral over the polygon in detuning coordinates, cut at both axes and
/// fanned into triangles from each piece's centroid.
fn integrate_polygon(poly: &IslandPolygon, f: f64, g: impl Fn(f64, f64) -> f64, rel_tol: f64) -> Estimate {
    let local = local_vertices(poly, (f, f));
    let mut pieces = Vec::new();
    for half in split_convex(&local, 0, 0.0) {
        for quarter in split_convex(&half, 1, 0.0) {
            let (area, c) = area_centroid(&quarter);
            if area > 0.0 {
                pieces.push((quarter, c.expect("non-empty piece has a centroid")));
            }
        }
    }
    // share the absolute tolerance across triangles so small slivers do not
    // dominate the work
    let rough: f64 = pieces.iter().map(|(p, c)| area_centroid(p).0 * g(c.0, c.1)).sum();
    let abs = rel_tol * rough.abs() * 1e-2;
    let mut total = zero();
    for (piece, c) in &pieces {
        for i in 0..piece.len() {
            let a = piece[i];
            let b = piece[(i + 1) % piece.len()];
            let tol = Tolerance { rel: rel_tol, abs: abs / (3 * piece.len()) as f64, max_intervals: 4000 };
            total = add(total, integrate_triangle(&g, *c, a, b, tol));
        }
    }
    total
}

/// Oracle total at frequency `f`, split by class relative to the link's CUT.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OracleTotal {
    pub sci: f64,
    pub xci: f64,
    pub mci: f64,
    pub error: f64,
    /// Triples whose integral missed its tolerance.
    pub unconverged: usize,
}

impl OracleTotal {
    pub fn total(&self) -> f64 {
        self.sci + self.xci + self.mci
    }
}

/// Sum over every triple of the comb, in lexicographic order.
pub fn gn_total(link: &Link, f: f64, domain: Domain, rel_tol: f64) -> OracleTotal {
    let nc = link.comb.len();
    let mut out = OracleTotal::default();
    for m in 0..nc {
        for n in 0..nc {
            for k in 0..nc {
                let e = match domain {
                    Domain::Square => gn_quadrature_square(link, f, m, n, k, rel_tol),
                    Domain::Island => gn_quadrature_true_island(link, f, m, n, k, rel_tol),
                };
                match class_of(m, n, k, link.cut_index) {
                    Class::Sci => out.sci += e.value,
                    Class::Xci => out.xci += e.value,
                    Class::Mci => out.mci += e.value,
                }
                out.error += e.error;
                if !e.converged {
                    out.unconverged += 1;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nli_core::model::{Channel, Span};

    fn single(beta2: f64) -> Link {
        let span = Span::flat(1e5, 2.5e-5, 1.3e-3, beta2, 0.0, 193.41e12);
        Link::new(vec![span], vec![Channel::from_center(193.41e12, 64e9, 1e-3).unwrap()], 0).unwrap()
    }

    #[test]
    fn zero_dispersion_is_constant_integrand() {
        let link = single(0.0);
        let f = 193.41e12;
        let e = gn_quadrature_square(&link, f, 0, 0, 0, 1e-10);
        let a = 2.5e-5f64;
        let g = (-2.0 * a * 1e5f64).exp();
        let psd = 1e-3 / 64e9;
        let expect = PREFACTOR * f64::powi(psd, 3) * 1.3e-3f64.powi(2) * g * g / (4.0 * a * a) * 0.75 * 64e9 * 64e9;
        assert!((e.value - expect).abs() < 1e-12 * expect, "{} vs {expect}", e.value);
    }

    #[test]
    fn square_island_matches_square() {
        // m = n = k with a band wide enough to keep the whole square
        let span = Span::flat(1e5, 2.5e-5, 1.3e-3, -2e-26, 0.0, 193.41e12);
        let comb = vec![
            Channel::new(193.0e12, 193.05e12, 1e-14).unwrap(),
            Channel::new(193.1e12, 193.15e12, 1e-14).unwrap(),
            Channel::new(193.3e12, 193.5e12, 1e-14).unwrap(),
        ];
        let link = Link::new(vec![span], comb, 2).unwrap();
        // islands of (0, 1, 2): band [fs_2 + f, fe_2 + f] covers the whole rectangle
        let f = 192.75e12;
        let p = island_polygon_exact(&link.comb, 0, 1, 2, f);
        assert!((p.area - 0.05e12 * 0.05e12).abs() < 1e-6 * p.area);
        let a = gn_quadrature_square(&link, f, 0, 1, 2, 1e-10);
        let b = gn_quadrature_true_island(&link, f, 0, 1, 2, 1e-10);
        assert!(((a.value - b.value) / a.value).abs() < 1e-8, "{a:?} {b:?}");
    }

    #[test]
    fn classes() {
        assert_eq!(class_of(1, 1, 1, 1), Class::Sci);
        assert_eq!(class_of(1, 0, 0, 1), Class::Xci);
        assert_eq!(class_of(0, 1, 2, 1), Class::Mci);
        assert_eq!(class_of(0, 0, 0, 1), Class::Mci);
    }
}
