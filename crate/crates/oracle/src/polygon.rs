//! Exact integration islands as convex polygons.
//!
//! The rectangle `[fs_m, fe_m] × [fs_n, fe_n]` is clipped by the half-planes
//! `f1 + f2 ≥ fs_k + f` and `f1 + f2 ≤ fe_k + f`. Coordinates are taken
//! relative to the corner `(fs_m, fs_n)` while clipping so the sums stay
//! small.

use nli_core::model::Channel;

/// A convex polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct IslandPolygon {
    pub vertices: Vec<(f64, f64)>,
    pub area: f64,
    /// `None` for an empty polygon.
    pub centroid: Option<(f64, f64)>,
}

/// Which band edge is applied first; the result must not depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClipOrder {
    LowerFirst,
    UpperFirst,
}

/// Keeps the part of `poly` where `s·(x + y) ≤ s·c`.
fn clip(poly: &[(f64, f64)], c: f64, s: f64) -> Vec<(f64, f64)> {
    let inside = |p: &(f64, f64)| s * (p.0 + p.1) <= s * c;
    let mut out = Vec::with_capacity(poly.len() + 2);
    for i in 0..poly.len() {
        let cur = poly[i];
        let next = poly[(i + 1) % poly.len()];
        let (ci, ni) = (inside(&cur), inside(&next));
        if ci {
            out.push(cur);
        }
        if ci != ni {
            // the edge crosses x + y = c
            let dc = cur.0 + cur.1 - c;
            let dn = next.0 + next.1 - c;
            let t = dc / (dc - dn);
            let p = (cur.0 + t * (next.0 - cur.0), cur.1 + t * (next.1 - cur.1));
            // snap onto the line to keep later clips consistent
            let off = 0.5 * (p.0 + p.1 - c);
            out.push((p.0 - off, p.1 - off));
        }
    }
    out
}

/// Shoelace area and centroid.
pub fn area_centroid(poly: &[(f64, f64)]) -> (f64, Option<(f64, f64)>) {
    if poly.len() < 3 {
        return (0.0, None);
    }
    let (ox, oy) = poly[0];
    let mut a2 = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 1..poly.len() - 1 {
        let (x1, y1) = (poly[i].0 - ox, poly[i].1 - oy);
        let (x2, y2) = (poly[i + 1].0 - ox, poly[i + 1].1 - oy);
        let cross = x1 * y2 - x2 * y1;
        a2 += cross;
        cx += cross * (x1 + x2);
        cy += cross * (y1 + y2);
    }
    let area = 0.5 * a2;
    if !(area > 0.0) {
        return (0.0, None);
    }
    (area, Some((ox + cx / (3.0 * a2), oy + cy / (3.0 * a2))))
}

/// Exact island of three `(start, end)` bands at evaluation frequency `f`.
pub fn polygon_from_edges(m: (f64, f64), n: (f64, f64), k: (f64, f64), f: f64, order: ClipOrder) -> IslandPolygon {
    let (o1, o2) = (m.0, n.0);
    let w1 = m.1 - m.0;
    let w2 = n.1 - n.0;
    let lower = (k.0 - o1) + (f - o2);
    let upper = (k.1 - o1) + (f - o2);
    let rect = vec![(0.0, 0.0), (w1, 0.0), (w1, w2), (0.0, w2)];
    let clipped = match order {
        ClipOrder::LowerFirst => clip(&clip(&rect, lower, -1.0), upper, 1.0),
        ClipOrder::UpperFirst => clip(&clip(&rect, upper, 1.0), lower, -1.0),
    };
    let (area, centroid) = area_centroid(&clipped);
    let vertices = if centroid.is_some() { clipped.iter().map(|&(x, y)| (x + o1, y + o2)).collect() } else { Vec::new() };
    IslandPolygon { vertices, area, centroid: centroid.map(|(x, y)| (x + o1, y + o2)) }
}

/// Exact island of channels `m`, `n`, `k` of `comb` at frequency `f`.
pub fn island_polygon_exact(comb: &[Channel], m: usize, n: usize, k: usize, f: f64) -> IslandPolygon {
    let e = |c: &Channel| (c.f_start, c.f_end);
    polygon_from_edges(e(&comb[m]), e(&comb[n]), e(&comb[k]), f, ClipOrder::LowerFirst)
}

/// Vertices relative to `origin`, for integrands that want detuning coordinates.
pub fn local_vertices(poly: &IslandPolygon, origin: (f64, f64)) -> Vec<(f64, f64)> {
    poly.vertices.iter().map(|&(x, y)| (x - origin.0, y - origin.1)).collect()
}

/// Splits a convex polygon along the line `x = c` (`axis = 0`) or `y = c`.
pub fn split_convex(poly: &[(f64, f64)], axis: usize, c: f64) -> [Vec<(f64, f64)>; 2] {
    let coord = |p: &(f64, f64)| if axis == 0 { p.0 } else { p.1 };
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for i in 0..poly.len() {
        let cur = poly[i];
        let next = poly[(i + 1) % poly.len()];
        let (a, b) = (coord(&cur) - c, coord(&next) - c);
        if a <= 0.0 {
            lo.push(cur);
        }
        if a >= 0.0 {
            hi.push(cur);
        }
        if (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0) {
            let t = a / (a - b);
            let mut p = (cur.0 + t * (next.0 - cur.0), cur.1 + t * (next.1 - cur.1));
            if axis == 0 {
                p.0 = c;
            } else {
                p.1 = c;
            }
            lo.push(p);
            hi.push(p);
        }
    }
    [lo, hi]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_hexagon() {
        let b = 64e9;
        let p = polygon_from_edges((-b / 2.0, b / 2.0), (-b / 2.0, b / 2.0), (-b / 2.0, b / 2.0), 0.0, ClipOrder::LowerFirst);
        assert_eq!(p.vertices.len(), 6);
        assert!((p.area - 0.75 * b * b).abs() < 1e-12 * b * b);
        let (cx, cy) = p.centroid.unwrap();
        assert!(cx.abs() < 1e-12 * b && cy.abs() < 1e-12 * b);
    }

    #[test]
    fn disjoint_band_is_empty() {
        let p = polygon_from_edges((0.0, 1.0), (0.0, 1.0), (10.0, 11.0), 0.0, ClipOrder::UpperFirst);
        assert_eq!(p.area, 0.0);
        assert!(p.centroid.is_none() && p.vertices.is_empty());
    }

    #[test]
    fn clip_order_does_not_matter() {
        let a = polygon_from_edges((0.0, 3.0), (1.0, 5.0), (0.5, 2.5), 2.0, ClipOrder::LowerFirst);
        let b = polygon_from_edges((0.0, 3.0), (1.0, 5.0), (0.5, 2.5), 2.0, ClipOrder::UpperFirst);
        assert!((a.area - b.area).abs() < 1e-14);
        let (ac, bc) = (a.centroid.unwrap(), b.centroid.unwrap());
        assert!((ac.0 - bc.0).abs() < 1e-14 && (ac.1 - bc.1).abs() < 1e-14);
    }

    #[test]
    fn splitting_preserves_area() {
        let p = polygon_from_edges((-1.0, 2.0), (-3.0, 1.0), (-2.0, 0.5), 0.0, ClipOrder::LowerFirst);
        let [l, h] = split_convex(&p.vertices, 0, 0.3);
        let total = area_centroid(&l).0 + area_centroid(&h).0;
        assert!((total - p.area).abs() < 1e-13);
    }
}
