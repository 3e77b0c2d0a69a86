//! Scalar kernels of the closed form.
//!
//! `F_int(x) = j·(Li₂(−jx) − Li₂(jx)) = 2·Im Li₂(jx)` is twice the inverse
//! tangent integral. It gives the exact value of the rectangle integral of
//! the GN Lorentzian kernel:
//!
//! ```text
//! ∫∫ B / (1 + A²x²y²) dx dy = B/(2A) · Δx Δy F_int(A·x·y)
//! ```
//!
//! The rectangle integral is evaluated per quadrant with power series in
//! `A·x·y` (small arguments) or `1/(A·x·y)` (large arguments) whose terms
//! factor into `x`- and `y`-only differences. That keeps narrow boxes far
//! from the origin and `A → 0` free of cancellation.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{NliError, Result};

/// Which scalar kernel the closed form uses in place of `F_int`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FintMode {
    /// Exact dilogarithm kernel.
    Dilog,
    /// `π·asinh(x/2)` approximation.
    #[default]
    Asinh,
}

impl FintMode {
    /// The kernel itself, `F_int(x)` or `π·asinh(x/2)`.
    #[inline]
    pub fn eval(self, x: f64) -> f64 {
        match self {
            FintMode::Dilog => fint(x),
            FintMode::Asinh => f_int_asinh(x),
        }
    }
}

impl std::str::FromStr for FintMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "dilog" => Ok(FintMode::Dilog),
            "asinh" => Ok(FintMode::Asinh),
            other => Err(format!("unknown F_int mode `{other}` (expected dilog or asinh)")),
        }
    }
}

impl std::fmt::Display for FintMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FintMode::Dilog => "dilog",
            FintMode::Asinh => "asinh",
        })
    }
}

/// `B_{2k} / (2k+1)!` for k = 1…13.
const BERNOULLI_SERIES: [f64; 13] = [
    2.777_777_777_777_777_8e-2,
    -2.777_777_777_777_777_8e-4,
    4.724_111_866_969_009_8e-6,
    -9.185_773_074_661_963_6e-8,
    1.897_886_998_897_100_0e-9,
    -4.064_761_645_144_225_5e-11,
    8.921_691_020_456_452_6e-13,
    -1.993_929_586_072_107_6e-14,
    4.518_980_029_619_918_2e-16,
    -1.035_651_761_218_124_7e-17,
    2.395_218_621_026_186_7e-19,
    -5.581_785_874_325_009_3e-21,
    1.309_150_755_418_321_3e-22,
];

/// `Im Li₂(jx)` for `|x| ≤ 1`.
///
/// Uses `Li₂(z) = Σ B_n uⁿ⁺¹/(n+1)!` with `u = −ln(1 − z)`; on this segment
/// `|u| < 0.86`, so the series converges like `(|u|/2π)²` per term.
fn inverse_tangent_integral_unit(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        return x - x * x * x / 9.0;
    }
    let u = Complex64::new(-0.5 * (x * x).ln_1p(), x.atan());
    let u2 = u * u;
    let mut sum = u - u2 * 0.25;
    let mut power = u;
    for c in BERNOULLI_SERIES {
        power *= u2;
        let term = power * c;
        sum += term;
        if term.norm() <= 1e-18 * sum.norm() {
            break;
        }
    }
    sum.im
}

/// Unchecked `F_int`; non-finite input propagates.
#[inline]
pub(crate) fn fint(x: f64) -> f64 {
    let t = x.abs();
    if t <= 1.0 {
        2.0 * inverse_tangent_integral_unit(x)
    } else {
        // Ti₂(x) = Ti₂(1/x) + (π/2)·ln x for x > 0; F_int is odd.
        let v = PI * t.ln() + 2.0 * inverse_tangent_integral_unit(1.0 / t);
        v.copysign(x)
    }
}

/// `F_int(x) = 2·Im Li₂(jx)`, odd and strictly increasing.
pub fn f_int(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(NliError::NonFinite("f_int argument"));
    }
    Ok(fint(x))
}

/// `π·asinh(x/2)`, the logarithmic approximation of `F_int`.
#[inline]
pub fn f_int_asinh(x: f64) -> f64 {
    PI * (0.5 * x).asinh()
}

/// `Σ_{k=1}^{n} 1/k`; the empty sum is zero.
pub fn harmonic_number(n: usize) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}

/// Sine integral `Si(x) = ∫₀ˣ sin(t)/t dt`.
pub fn sine_integral(x: f64) -> f64 {
    let t = x.abs();
    if t == 0.0 || t.is_nan() {
        return x;
    }
    let v = if t <= 2.0 {
        let t2 = t * t;
        let mut term = t; // t^(2k+1) / (2k+1)!
        let mut sum = t;
        let mut k = 0u32;
        loop {
            let n = f64::from(2 * k + 2);
            term *= -t2 / (n * (n + 1.0));
            let add = term / (n + 1.0);
            sum += add;
            k += 1;
            if add.abs() <= 1e-17 * sum.abs() || k > 60 {
                break;
            }
        }
        sum
    } else if t.is_infinite() {
        FRAC_PI_2
    } else {
        // Continued fraction for E₁(it), modified Lentz.
        let tiny = 1e-300;
        let mut b = Complex64::new(1.0, t);
        let mut c = Complex64::new(1.0 / tiny, 0.0);
        let mut d = b.inv();
        let mut h = d;
        for i in 2..2000u32 {
            let a = -f64::from((i - 1) * (i - 1));
            b += 2.0;
            d = (d * a + b).inv();
            c = b + c.inv() * a;
            let del = c * d;
            h *= del;
            if (del.re - 1.0).abs() + del.im.abs() < 1e-16 {
                break;
            }
        }
        h *= Complex64::new(t.cos(), -t.sin());
        FRAC_PI_2 + h.im
    };
    v.copysign(x)
}

/// `asinh(c·b)/b`, continuous through `b = 0` where it equals `c`.
#[inline]
pub fn asinh_ratio(c: f64, b: f64) -> f64 {
    let w = c * b;
    if w.abs() < 1e-4 {
        let w2 = w * w;
        c * (1.0 - w2 / 6.0 + 0.075 * w2 * w2)
    } else {
        w.asinh() / b
    }
}

/// `F_int(c·b)/b`, continuous through `b = 0` where it equals `2c`.
#[inline]
pub fn fint_ratio(c: f64, b: f64) -> f64 {
    let w = c * b;
    if w.abs() < 1e-4 {
        let w2 = w * w;
        2.0 * c * (1.0 - w2 / 9.0 + w2 * w2 / 25.0)
    } else {
        fint(w) / b
    }
}

/// `Si(c·b)/b`, continuous through `b = 0` where it equals `c`.
#[inline]
pub fn si_ratio(c: f64, b: f64) -> f64 {
    let w = c * b;
    if w.abs() < 1e-4 {
        let w2 = w * w;
        c * (1.0 - w2 / 18.0 + w2 * w2 / 600.0)
    } else {
        sine_integral(w) / b
    }
}

/// Below this value of `max A·x·y` a quadrant box uses the small-argument series.
pub const SMALL_ARGUMENT_THRESHOLD: f64 = 0.25;
/// Above this value of `min A·x·y` a quadrant box uses the large-argument series.
pub const LARGE_ARGUMENT_THRESHOLD: f64 = 4.0;

const SERIES_MAX_TERMS: u32 = 400;

/// Coefficient of `zⁿ` in the small-argument expansion of the kernel (odd `n`).
struct SmallSeries {
    mode: FintMode,
    m: u32,
    asinh_t: f64,
}

impl SmallSeries {
    fn new(mode: FintMode) -> Self {
        Self { mode, m: 0, asinh_t: 1.0 }
    }

    /// Returns the coefficient for n = 2m+1 and advances.
    fn next_coeff(&mut self) -> f64 {
        let m = self.m;
        let n = f64::from(2 * m + 1);
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let c = match self.mode {
            FintMode::Dilog => 2.0 * sign / (n * n),
            FintMode::Asinh => {
                // π·asinh(z/2) = π Σ t_m (z/2)^(2m+1)/(2m+1),  t_m = (−1)^m C(2m,m)/4^m
                let c = PI * self.asinh_t / n / 2f64.powi(2 * m as i32 + 1);
                self.asinh_t *= -(2.0 * f64::from(m) + 1.0) / (2.0 * f64::from(m) + 2.0);
                c
            }
        };
        self.m += 1;
        c
    }
}

/// Difference `hiⁿ − loⁿ` for `0 ≤ lo ≤ hi`, advanced two powers at a time
/// by a recurrence whose terms are all non-negative.
struct PowerDifference {
    lo: f64,
    hi: f64,
    lo_pow: f64,
    diff: f64,
    step: f64,
}

impl PowerDifference {
    /// Starts at `n = start` (1 or 2) given `hi − lo` computed accurately.
    fn new(lo: f64, hi: f64, gap: f64, start: u32) -> Self {
        let step = gap * (hi + lo); // hi² − lo²
        let (lo_pow, diff) = if start == 1 { (lo, gap) } else { (lo * lo, step) };
        Self { lo, hi, lo_pow, diff, step }
    }

    fn advance(&mut self) {
        // hi^(n+2) − lo^(n+2) = hi²·(hiⁿ − loⁿ) + loⁿ·(hi² − lo²)
        self.diff = self.hi * self.hi * self.diff + self.lo_pow * self.step;
        self.lo_pow *= self.lo * self.lo;
    }
}

/// `(1/(2a)) Δx Δy K(a·x·y)` on a box inside the closed first quadrant, `a ≥ 0`.
fn quadrant_box(mode: FintMode, a: f64, x1: f64, x2: f64, y1: f64, y2: f64) -> f64 {
    if x2 <= x1 || y2 <= y1 {
        return 0.0;
    }
    if a > 0.0 && a != 1.0 {
        // rescale to a = 1 so the series powers of a and of the edges cannot
        // overflow against each other
        let s = a.sqrt();
        return quadrant_box_unit_scale(mode, 1.0, s * x1, s * x2, s * y1, s * y2) / a;
    }
    quadrant_box_unit_scale(mode, a, x1, x2, y1, y2)
}

fn quadrant_box_unit_scale(mode: FintMode, a: f64, x1: f64, x2: f64, y1: f64, y2: f64) -> f64 {
    let z_max = a * x2 * y2;
    let z_min = a * x1 * y1;
    if z_max <= SMALL_ARGUMENT_THRESHOLD {
        // Σ c_n a^(n−1)/2 · (x2ⁿ − x1ⁿ)(y2ⁿ − y1ⁿ)
        let mut coeffs = SmallSeries::new(mode);
        let mut dx = PowerDifference::new(x1, x2, x2 - x1, 1);
        let mut dy = PowerDifference::new(y1, y2, y2 - y1, 1);
        let a2 = a * a;
        let mut a_pow = 0.5;
        let mut sum = 0.0;
        for i in 0..SERIES_MAX_TERMS {
            let term = coeffs.next_coeff() * a_pow * dx.diff * dy.diff;
            sum += term;
            if a == 0.0 || (i > 0 && term.abs() <= 1e-18 * sum.abs()) {
                break;
            }
            a_pow *= a2;
            dx.advance();
            dy.advance();
        }
        sum
    } else if z_min >= LARGE_ARGUMENT_THRESHOLD {
        // K(z) = π ln z + Σ d_n z^(−n); the logarithm is separable and drops out.
        let (ux_lo, ux_hi) = (1.0 / x2, 1.0 / x1);
        let (uy_lo, uy_hi) = (1.0 / y2, 1.0 / y1);
        let gx = (x2 - x1) / (x1 * x2);
        let gy = (y2 - y1) / (y1 * y2);
        let start = match mode {
            FintMode::Dilog => 1,
            FintMode::Asinh => 2,
        };
        let mut dx = PowerDifference::new(ux_lo, ux_hi, gx, start);
        let mut dy = PowerDifference::new(uy_lo, uy_hi, gy, start);
        let inv_a = 1.0 / a;
        let inv_a2 = inv_a * inv_a;
        let mut a_pow = 0.5 * inv_a * if start == 1 { inv_a } else { inv_a2 };
        let mut sum = 0.0;
        let mut asinh_t = 1.0; // C(2m,m)/4^m with m = n/2, asinh branch
        for i in 0..SERIES_MAX_TERMS {
            let coeff = match mode {
                FintMode::Dilog => {
                    let n = f64::from(2 * i + 1);
                    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    2.0 * sign / (n * n)
                }
                FintMode::Asinh => {
                    // asinh(w) − ln(2w) = Σ_{m≥1} (−1)^(m+1) C(2m,m)/(4^m·2m) w^(−2m), w = z/2
                    let m = f64::from(i + 1);
                    asinh_t *= (2.0 * m - 1.0) / (2.0 * m);
                    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    PI * sign * asinh_t * 4f64.powi(i as i32 + 1) / (2.0 * m)
                }
            };
            let term = coeff * a_pow * dx.diff * dy.diff;
            sum += term;
            if i > 0 && term.abs() <= 1e-18 * sum.abs() {
                break;
            }
            a_pow *= inv_a2;
            dx.advance();
            dy.advance();
        }
        sum
    } else if x2 - x1 < NARROW_FRACTION * x2 {
        narrow_box(mode, a, x1, x2, y1, y2)
    } else if y2 - y1 < NARROW_FRACTION * y2 {
        narrow_box(mode, a, y1, y2, x1, x2)
    } else {
        let k = |z: f64| mode.eval(z);
        (k(a * x2 * y2) - k(a * x2 * y1) - k(a * x1 * y2) + k(a * x1 * y1)) / (2.0 * a)
    }
}

/// Boxes thinner than this fraction of their outer edge skip the corner formula.
const NARROW_FRACTION: f64 = 0.125;

/// 12-point Gauss–Legendre rule on [−1, 1] as (node, weight).
fn gauss_legendre_12() -> &'static [(f64, f64); 12] {
    static RULE: once_cell::sync::Lazy<[(f64, f64); 12]> = once_cell::sync::Lazy::new(|| {
        const N: usize = 12;
        let mut rule = [(0.0, 0.0); N];
        for (i, slot) in rule.iter_mut().enumerate() {
            let mut x = (PI * (i as f64 + 0.75) / (N as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=N {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = N as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            *slot = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        rule
    });
    &RULE
}

/// Quadrant box thin in the first coordinate: the inner integral over the
/// second coordinate is exact, the outer one is Gauss–Legendre.
fn narrow_box(mode: FintMode, a: f64, x1: f64, x2: f64, y1: f64, y2: f64) -> f64 {
    let dy = y2 - y1;
    let inner = |x: f64| -> f64 {
        let ax = a * x;
        match mode {
            // (atan(a x y2) − atan(a x y1)) / (a x)
            FintMode::Dilog => {
                let num = ax * dy;
                let den = 1.0 + ax * ax * y1 * y2;
                (num / den).atan() / ax
            }
            // (π/4) [y / √(1 + a²x²y²/4)] between y1 and y2
            FintMode::Asinh => {
                let c = 0.25 * ax * ax;
                let s1 = (1.0 + c * y1 * y1).sqrt();
                let s2 = (1.0 + c * y2 * y2).sqrt();
                0.25 * PI * dy * (y2 + y1) / ((y2 * s1 + y1 * s2) * s1 * s2)
            }
        }
    };
    let half = 0.5 * (x2 - x1);
    let mid = 0.5 * (x1 + x2);
    let mut sum = 0.0;
    for &(node, weight) in gauss_legendre_12() {
        sum += weight * inner(mid + half * node);
    }
    sum * half
}

/// Splits `[lo, hi]` at zero and reflects the negative part; returns up to
/// two intervals on the non-negative axis.
fn fold_interval(lo: f64, hi: f64) -> [(f64, f64); 2] {
    let neg = if lo < 0.0 { (-hi.min(0.0), -lo) } else { (0.0, 0.0) };
    let pos = if hi > 0.0 { (lo.max(0.0), hi) } else { (0.0, 0.0) };
    [neg, pos]
}

/// `∫_{y1}^{y2} ∫_{x1}^{x2} B / (1 + A²x²y²) dx dy` with the chosen kernel,
/// bounds assumed ordered.
pub(crate) fn kernel_box_integral(mode: FintMode, a: f64, b: f64, x1: f64, x2: f64, y1: f64, y2: f64) -> f64 {
    if b == 0.0 {
        return 0.0;
    }
    let a = a.abs();
    let xs = fold_interval(x1, x2);
    let ys = fold_interval(y1, y2);
    let mut sum = 0.0;
    for &(xa, xb) in &xs {
        for &(ya, yb) in &ys {
            sum += quadrant_box(mode, a, xa, xb, ya, yb);
        }
    }
    b * sum
}

/// Closed-form rectangle integral of the Lorentzian kernel:
/// `(B/2A)·(F_int(A·X1·Y1) + F_int(A·X2·Y2) − F_int(A·X2·Y1) − F_int(A·X1·Y2))`.
///
/// `A = 0` returns `B·(X2−X1)·(Y2−Y1)`.
pub fn rect_lorentzian_integral(a: f64, b: f64, x1: f64, x2: f64, y1: f64, y2: f64) -> Result<f64> {
    rect_kernel_integral(FintMode::Dilog, a, b, x1, x2, y1, y2)
}

/// As [`rect_lorentzian_integral`] but with the kernel selected by `mode`.
pub fn rect_kernel_integral(mode: FintMode, a: f64, b: f64, x1: f64, x2: f64, y1: f64, y2: f64) -> Result<f64> {
    if ![a, b, x1, x2, y1, y2].iter().all(|v| v.is_finite()) {
        return Err(NliError::NonFinite("rectangle integral input"));
    }
    if x1 > x2 || y1 > y2 {
        return Err(NliError::ReversedBounds);
    }
    Ok(kernel_box_integral(mode, a, b, x1, x2, y1, y2))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWICE_CATALAN: f64 = 1.831_931_188_354_438;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // 2·Ti₂(x) from mpmath at 40 digits.
    const FINT_TABLE: [(f64, f64); 7] = [
        (0.3, 0.594_185_931_956_456_06),
        (1.0, 1.831_931_188_354_438),
        (2.0, 3.152_030_806_892_646_8),
        (10.0, 7.433_562_986_136_137_2),
        (1e3, 21.703_353_237_024_172),
        (1e6, 43.402_708_474_492_789),
        (1e12, 86.805_412_948_987_578),
    ];

    #[test]
    fn f_int_matches_reference_values() {
        assert_eq!(f_int(0.0).unwrap(), 0.0);
        assert!(rel(f_int(1.0).unwrap(), TWICE_CATALAN) < 1e-14);
        for (x, v) in FINT_TABLE {
            assert!(rel(fint(x), v) < 1e-13, "x={x}: {} vs {v}", fint(x));
            assert_eq!(fint(-x), -fint(x));
        }
    }

    #[test]
    fn f_int_rejects_non_finite() {
        assert!(f_int(f64::NAN).is_err());
        assert!(f_int(f64::INFINITY).is_err());
    }

    #[test]
    fn f_int_is_continuous_across_unit_argument() {
        let below = fint(1.0 - 1e-12);
        let above = fint(1.0 + 1e-12);
        assert!((above - below).abs() < 1e-11);
    }

    #[test]
    fn asinh_approximation_values() {
        assert_eq!(f_int_asinh(0.0), 0.0);
        let expect = PI * (1.0 + 2f64.sqrt()).ln();
        assert!(rel(f_int_asinh(2.0), expect) < 1e-15);
        assert!((expect - 2.768_916_786_048_680_7).abs() < 1e-14);
        let ratio = fint(1e3) / f_int_asinh(1e3);
        assert!((ratio - 1.0).abs() < 0.01);
    }

    #[test]
    fn harmonic_numbers() {
        assert_eq!(harmonic_number(0), 0.0);
        assert_eq!(harmonic_number(1), 1.0);
        assert!((harmonic_number(3) - 11.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn sine_integral_values() {
        assert_eq!(sine_integral(0.0), 0.0);
        assert!(rel(sine_integral(1.0), 0.946_083_070_367_183_01) < 1e-14);
        assert!(rel(sine_integral(10.0), 1.658_347_594_218_874_0) < 1e-13);
        assert!((sine_integral(1e6) - FRAC_PI_2).abs() < 2e-6);
        assert_eq!(sine_integral(-3.0), -sine_integral(3.0));
        // both sides of the series / continued-fraction switch
        assert!((sine_integral(2.0) - sine_integral(2.0 + 1e-12)).abs() < 1e-11);
    }

    #[test]
    fn ratio_helpers_are_continuous_at_zero() {
        assert_eq!(asinh_ratio(3.0, 0.0), 3.0);
        assert_eq!(fint_ratio(3.0, 0.0), 6.0);
        assert_eq!(si_ratio(3.0, 0.0), 3.0);
        for b in [1e-6, 1e-5, 2e-5, 1e-3] {
            assert!(rel(asinh_ratio(3.0, b), (3.0 * b).asinh() / b) < 1e-14);
            assert!(rel(fint_ratio(3.0, b), fint(3.0 * b) / b) < 1e-13);
            assert!(rel(si_ratio(3.0, b), sine_integral(3.0 * b) / b) < 1e-13);
        }
    }

    #[test]
    fn rectangle_integral_unit_box() {
        let v = rect_lorentzian_integral(1.0, 2.0, 0.0, 1.0, 0.0, 1.0).unwrap();
        assert!(rel(v, TWICE_CATALAN) < 1e-14);
    }

    #[test]
    fn rectangle_integral_zero_coefficient_is_area() {
        let v = rect_lorentzian_integral(0.0, 1.5, -1.0, 2.0, 0.5, 4.0).unwrap();
        assert!(rel(v, 1.5 * 3.0 * 3.5) < 1e-15);
        let v = rect_kernel_integral(FintMode::Asinh, 0.0, 1.0, -1.0, 2.0, 0.5, 4.0).unwrap();
        assert!(rel(v, PI / 4.0 * 3.0 * 3.5) < 1e-15);
    }

    #[test]
    fn rectangle_integral_degenerate_and_reversed() {
        assert_eq!(rect_lorentzian_integral(2.0, 1.0, 1.0, 1.0, 0.0, 3.0).unwrap(), 0.0);
        assert_eq!(rect_lorentzian_integral(2.0, 1.0, 1.0, 0.0, 0.0, 3.0), Err(NliError::ReversedBounds));
    }

    #[test]
    fn series_branches_agree_with_direct_corner_formula() {
        // boxes chosen so the direct formula is still well conditioned
        for mode in [FintMode::Dilog, FintMode::Asinh] {
            for &(a, x1, x2, y1, y2) in &[
                (0.2, 0.1, 1.0, 0.2, 1.2),
                (0.05, 0.5, 2.0, 0.1, 2.0),
                (5.0, 1.0, 3.0, 1.0, 2.0),
                (50.0, 0.5, 1.5, 0.3, 1.9),
            ] {
                let series = quadrant_box(mode, a, x1, x2, y1, y2);
                let k = |z: f64| mode.eval(z);
                let direct = (k(a * x2 * y2) - k(a * x2 * y1) - k(a * x1 * y2) + k(a * x1 * y1)) / (2.0 * a);
                assert!(rel(series, direct) < 1e-12, "{mode} a={a}: {series} vs {direct}");
            }
        }
    }

    #[test]
    fn narrow_far_box_matches_midpoint_estimate() {
        // ∫∫ ≈ area / (1 + a² x̄² ȳ²) for a tiny box; the corner formula loses
        // most digits here while the series branches do not.
        for a in [1e-9, 1e9] {
            let (x1, x2, y1, y2) = (1000.0, 1000.001, 2000.0, 2000.001);
            let v = rect_lorentzian_integral(a, 1.0, x1, x2, y1, y2).unwrap();
            let xm = 0.5 * (x1 + x2);
            let ym = 0.5 * (y1 + y2);
            let approx = (x2 - x1) * (y2 - y1) / (1.0 + a * a * xm * xm * ym * ym);
            assert!(rel(v, approx) < 1e-6, "a={a}: {v} vs {approx}");
        }
    }

    #[test]
    fn integral_is_even_in_coefficient_and_reflection_symmetric() {
        let v = rect_lorentzian_integral(0.7, 1.0, -1.0, 2.0, -0.5, 1.5).unwrap();
        let w = rect_lorentzian_integral(-0.7, 1.0, -2.0, 1.0, -1.5, 0.5).unwrap();
        assert!(rel(v, w) < 1e-14);
    }
}
