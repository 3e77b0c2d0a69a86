//! Integration islands: the part of the `(f1, f2)` plane where channels m, n
//! and k all overlap, its area and centroid, and the equal-area square that
//! replaces it.
//!
//! The island is the rectangle `[fs_m, fe_m] × [fs_n, fe_n]` cut by the band
//! `fs_k + f ≤ f1 + f2 ≤ fe_k + f`. Slicing the rectangle along `f1 + f2`
//! gives a lower corner triangle, a middle parallelogram and an upper corner
//! triangle; the island is assembled from those pieces with step-function
//! switches. Everything is computed relative to the corner `(fs_m, fs_n)`.

use serde::{Deserialize, Serialize};

use crate::model::Channel;

/// Step function with `u(0) = 1/2`.
#[inline]
fn step(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        0.0
    } else {
        0.5
    }
}

/// Intermediate quantities in the frame whose origin is `(fs_m, fs_n)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IslandParts {
    /// Diagonal break points `F1 ≤ F2 ≤ F3 ≤ F4` of the rectangle.
    pub breaks: [f64; 4],
    /// Shifted band edges `fs_k + f` and `fe_k + f`.
    pub band: [f64; 2],
    pub tau1_plus: f64,
    pub tau1_minus: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub tau3_plus: f64,
    pub tau3_minus: f64,
    pub s1_plus: f64,
    pub s1_minus: f64,
    pub s2: f64,
    pub s3_plus: f64,
    pub s3_minus: f64,
}

/// Area, centroid and square side of one island.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IslandSquare {
    pub area: f64,
    /// `None` when the island is empty.
    pub centroid: Option<(f64, f64)>,
    /// Side of the equal-area square, `√area`.
    pub side: f64,
    pub parts: IslandParts,
}

impl IslandSquare {
    pub fn is_empty(&self) -> bool {
        self.centroid.is_none()
    }

    /// `(f1*, f2*, L1, L2)` for a non-empty island.
    pub fn square(&self) -> Option<(f64, f64, f64, f64)> {
        self.centroid.map(|(c1, c2)| (c1, c2, self.side, self.side))
    }
}

/// Island of the triple `(m, n, k)` at evaluation frequency `f`.
pub fn island_descriptor(comb: &[Channel], m: usize, n: usize, k: usize, f: f64) -> IslandSquare {
    island_from_edges(
        (comb[m].f_start, comb[m].f_end),
        (comb[n].f_start, comb[n].f_end),
        (comb[k].f_start, comb[k].f_end),
        f,
    )
}

/// Island of three rectangles given by `(start, end)` edges.
pub fn island_from_edges(ch_m: (f64, f64), ch_n: (f64, f64), ch_k: (f64, f64), f: f64) -> IslandSquare {
    let (o1, o2) = (ch_m.0, ch_n.0);
    let bw_m = ch_m.1 - ch_m.0;
    let bw_n = ch_n.1 - ch_n.0;
    // band edges on the f1 + f2 axis, shifted into the local frame
    let ks = (ch_k.0 - o1) + (f - o2);
    let ke = (ch_k.1 - o1) + (f - o2);

    let f1 = 0.0;
    let f2 = bw_m.min(bw_n);
    let f3 = bw_m.max(bw_n);
    let f4 = bw_m + bw_n;

    let tau1_plus = ke.min(f2);
    let tau1_minus = ks.max(f1);
    let tau1 = ks.max(f2);
    let tau2 = ke.min(f3);
    let tau3_plus = ks.max(f3);
    let tau3_minus = ke.min(f4);

    let lower = |t: f64| 0.5 * (t - f1) * (t - f1);
    let upper = |t: f64| 0.5 * (t - f4) * (t - f4);

    let gate1 = step(f2 - ks) * step(ke - f1);
    let gate2 = step(f3 - ks) * step(ke - f2);
    let gate3 = step(f4 - ks) * step(ke - f3);

    let s1_plus = lower(tau1_plus) * gate1;
    let s1_minus = lower(tau1_minus) * gate1;
    let s2 = (tau2 - tau1) * f2 * gate2;
    let s3_plus = upper(tau3_plus) * gate3;
    let s3_minus = upper(tau3_minus) * gate3;

    let area = s1_plus - s1_minus + s2 + s3_plus - s3_minus;

    let parts = IslandParts {
        breaks: [f1, f2, f3, f4],
        band: [ks, ke],
        tau1_plus,
        tau1_minus,
        tau1,
        tau2,
        tau3_plus,
        tau3_minus,
        s1_plus,
        s1_minus,
        s2,
        s3_plus,
        s3_minus,
    };

    if !(area > 0.0) {
        return IslandSquare { area: 0.0, centroid: None, side: 0.0, parts };
    }

    // centroids of the lower triangle (vertex at the origin), the middle
    // parallelogram and the upper triangle (vertex at (bw_m, bw_n))
    let c1_lower = |t: f64| t / 3.0;
    let c1_upper = |t: f64| 2.0 * bw_m / 3.0 + t / 3.0 - bw_n / 3.0;
    let c2_upper = |t: f64| 2.0 * bw_n / 3.0 + t / 3.0 - bw_m / 3.0;
    let mid = 0.5 * (tau1 + tau2);
    let c1_mid = 0.5 * bw_m * step(bw_n - bw_m) + (mid - 0.5 * bw_n) * step(bw_m - bw_n);
    let c2_mid = 0.5 * bw_n * step(bw_m - bw_n) + (mid - 0.5 * bw_m) * step(bw_n - bw_m);

    let m1 = s1_plus * c1_lower(tau1_plus) - s1_minus * c1_lower(tau1_minus) + s2 * c1_mid
        + s3_plus * c1_upper(tau3_plus)
        - s3_minus * c1_upper(tau3_minus);
    let m2 = s1_plus * c1_lower(tau1_plus) - s1_minus * c1_lower(tau1_minus) + s2 * c2_mid
        + s3_plus * c2_upper(tau3_plus)
        - s3_minus * c2_upper(tau3_minus);

    let centroid = (o1 + m1 / area, o2 + m2 / area);
    IslandSquare { area, centroid: Some(centroid), side: area.sqrt(), parts }
}

/// Which interference class a channel triple belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TripleClass {
    Sci,
    /// m = n = CUT, k ≠ CUT
    Xci1,
    /// m = k = CUT, n ≠ CUT
    Xci2,
    /// n = k = CUT, m ≠ CUT
    Xci3,
    /// m = CUT, n = k ≠ CUT
    Xci4,
    /// n = CUT, m = k ≠ CUT
    Xci5,
    /// k = CUT, m = n ≠ CUT
    Xci6,
    Mci,
}

impl TripleClass {
    pub fn is_xci(self) -> bool {
        !matches!(self, TripleClass::Sci | TripleClass::Mci)
    }

    pub fn label(self) -> &'static str {
        match self {
            TripleClass::Sci => "SCI",
            TripleClass::Xci1 => "XCI1",
            TripleClass::Xci2 => "XCI2",
            TripleClass::Xci3 => "XCI3",
            TripleClass::Xci4 => "XCI4",
            TripleClass::Xci5 => "XCI5",
            TripleClass::Xci6 => "XCI6",
            TripleClass::Mci => "MCI",
        }
    }
}

pub fn classify_triple(m: usize, n: usize, k: usize, cut: usize) -> TripleClass {
    let (mc, nc, kc) = (m == cut, n == cut, k == cut);
    match (mc, nc, kc) {
        (true, true, true) => TripleClass::Sci,
        (true, true, false) => TripleClass::Xci1,
        (true, false, true) => TripleClass::Xci2,
        (false, true, true) => TripleClass::Xci3,
        (true, false, false) if n == k => TripleClass::Xci4,
        (false, true, false) if m == k => TripleClass::Xci5,
        (false, false, true) if m == n => TripleClass::Xci6,
        _ => TripleClass::Mci,
    }
}
