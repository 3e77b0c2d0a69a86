//! Globally adaptive Gauss–Kronrod quadrature in one and two dimensions.
//!
//! One dimension: the 7/15-point Kronrod pair on each interval, the worst
//! interval bisected first. Two dimensions: the same rule iterated, with the
//! inner integral solved to a tighter tolerance, over rectangles or over
//! triangles through the collapsed (Duffy) map. Refinement order is fixed, so
//! results are deterministic.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_3,
    0.949_107_912_342_758_524_526_189_684_047_9,
    0.864_864_423_359_769_072_789_712_788_640_9,
    0.741_531_185_599_394_439_863_864_773_280_8,
    0.586_087_235_467_691_130_294_144_845_693_0,
    0.405_845_151_377_397_166_906_606_412_076_9,
    0.207_784_955_007_898_467_600_689_403_773_2,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_20,
    0.104_790_010_322_250_183_839_876_322_541_5,
    0.140_653_259_715_525_918_745_189_590_510_2,
    0.169_004_726_639_267_902_826_583_426_598_6,
    0.190_350_578_064_785_409_913_256_402_421_0,
    0.204_432_940_075_298_892_414_161_999_234_6,
    0.209_482_141_084_727_828_012_999_174_891_7,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_1,
    0.279_705_391_489_276_667_901_467_771_423_8,
    0.381_830_050_505_118_944_950_369_775_488_98,
    0.417_959_183_673_469_387_755_102_040_816_3,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// Estimated absolute error.
    pub error: f64,
    pub converged: bool,
    pub evaluations: usize,
}

/// Stopping rule: `error ≤ max(abs, rel·|value|)`, at most `max_intervals`.
/// Requests below the roundoff floor of the error estimate (`100·ε` times the
/// summed magnitudes of the pieces) are capped there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Tolerance { rel, abs: 0.0, max_intervals: 4000 }
    }

    fn target(&self, value: f64, magnitude: f64) -> f64 {
        self.abs.max(self.rel * value.abs()).max(100.0 * f64::EPSILON * magnitude)
    }
}

/// One 15-point Kronrod estimate on `[a, b]` with its error.
fn kronrod_15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut fv = [0.0; 15];
    fv[7] = fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[j] = f1;
        fv[14 - j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }
    let value = kronrod * half;
    let asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    // below rounding level the estimate is meaningless
    let floor = 50.0 * f64::EPSILON * value.abs();
    (value, err.max(floor))
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    order: usize,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then(other.order.cmp(&self.order))
    }
}

/// Adaptive integral of `f` over `[a, b]`, pre-split at `breaks`.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, breaks: &[f64], tol: Tolerance) -> Estimate {
    if !(b > a) {
        return Estimate { value: 0.0, error: 0.0, converged: true, evaluations: 0 };
    }
    let mut edges = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    edges.extend(inner);
    edges.push(b);

    let mut heap = BinaryHeap::new();
    let mut order = 0;
    let mut evaluations = 0;
    for w in edges.windows(2) {
        let (value, error) = kronrod_15(&mut f, w[0], w[1]);
        evaluations += 15;
        heap.push(Piece { a: w[0], b: w[1], value, error, order });
        order += 1;
    }
    loop {
        let (value, error, magnitude) = totals(&heap);
        if error <= tol.target(value, magnitude) {
            return Estimate { value, error, converged: true, evaluations };
        }
        if heap.len() >= tol.max_intervals {
            return Estimate { value, error, converged: false, evaluations };
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // cannot split further; keep it and stop
            heap.push(worst);
            let (value, error, magnitude) = totals(&heap);
            return Estimate { value, error, converged: error <= tol.target(value, magnitude), evaluations };
        }
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = kronrod_15(&mut f, lo, hi);
            evaluations += 15;
            heap.push(Piece { a: lo, b: hi, value, error, order });
            order += 1;
        }
    }
}

/// Sums in creation order so the total does not depend on heap layout.
fn totals(heap: &BinaryHeap<Piece>) -> (f64, f64, f64) {
    let mut pieces: Vec<&Piece> = heap.iter().collect();
    pieces.sort_by_key(|p| p.order);
    let mut value = 0.0;
    let mut comp = 0.0;
    let mut error = 0.0;
    let mut magnitude = 0.0;
    for p in pieces {
        magnitude += p.value.abs();
        let t = value + p.value;
        if value.abs() >= p.value.abs() {
            comp += (value - t) + p.value;
        } else {
            comp += (p.value - t) + value;
        }
        value = t;
        error += p.error;
    }
    (value + comp, error, magnitude)
}

/// Iterated adaptive integral over `[x1, x2] × [y1, y2]`.
pub fn integrate_rectangle(
    mut f: impl FnMut(f64, f64) -> f64,
    (x1, x2): (f64, f64),
    (y1, y2): (f64, f64),
    x_breaks: &[f64],
    y_breaks: &[f64],
    tol: Tolerance,
) -> Estimate {
    let inner_tol = Tolerance { rel: tol.rel * 1e-2, abs: tol.abs * 1e-2 / (x2 - x1).abs().max(f64::MIN_POSITIVE), ..tol };
    let mut inner_ok = true;
    let mut inner_err = 0.0f64;
    let mut evaluations = 0;
    let outer = integrate(
        |x| {
            let e = integrate(|y| f(x, y), y1, y2, y_breaks, inner_tol);
            inner_ok &= e.converged;
            inner_err = inner_err.max(e.error);
            evaluations += e.evaluations;
            e.value
        },
        x1,
        x2,
        x_breaks,
        tol,
    );
    Estimate {
        value: outer.value,
        error: outer.error + inner_err * (x2 - x1),
        converged: outer.converged && inner_ok,
        evaluations,
    }
}

/// Adaptive integral over the triangle `(p0, p1, p2)` through the collapsed
/// map `p0 + u(p1 − p0) + uv(p2 − p1)`, which puts the singular-free vertex
/// `p0` at `u = 0` and the edge `p1p2` at `u = 1`.
pub fn integrate_triangle(
    mut f: impl FnMut(f64, f64) -> f64,
    p0: (f64, f64),
    p1: (f64, f64),
    p2: (f64, f64),
    tol: Tolerance,
) -> Estimate {
    let e1 = (p1.0 - p0.0, p1.1 - p0.1);
    let e2 = (p2.0 - p1.0, p2.1 - p1.1);
    let jac = (e1.0 * e2.1 - e1.1 * e2.0).abs();
    if jac == 0.0 {
        return Estimate { value: 0.0, error: 0.0, converged: true, evaluations: 0 };
    }
    let est = integrate_rectangle(
        |u, v| {
            let x = p0.0 + u * (e1.0 + v * e2.0);
            let y = p0.1 + u * (e1.1 + v * e2.1);
            u * f(x, y)
        },
        (0.0, 1.0),
        (0.0, 1.0),
        &[],
        &[],
        Tolerance { abs: tol.abs / jac, ..tol },
    );
    Estimate { value: est.value * jac, error: est.error * jac, ..est }
}
