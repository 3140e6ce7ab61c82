//! Real-line quadrature for complex integrands: Gauss–Legendre rules, adaptive
//! Gauss–Kronrod (21-point) integration, and polynomial extrapolation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Apply the rule on `[a, b]`.
    pub fn integrate<F: Fn(f64) -> Complex64>(&self, f: F, a: f64, b: f64) -> Complex64 {
        let h = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        let mut s = Complex64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += f(m + h * x) * *w;
        }
        s * h
    }

    /// Physical nodes and weights on `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (m + h * x, w * h))
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Shared 16-point rule.
pub fn gl16() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// The 21 Gauss–Kronrod nodes on [−1, 1] as `(x, kronrod_weight, gauss_weight)`,
/// with zero Gauss weight on the Kronrod-only nodes.
pub fn gk21_rule() -> &'static [(f64, f64, f64); 21] {
    static RULE: OnceLock<[(f64, f64, f64); 21]> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut r = [(0.0, WGK[10], 0.0); 21];
        for j in 0..10 {
            let wg = if j % 2 == 1 { WG[j / 2] } else { 0.0 };
            r[2 * j] = (-XGK[j], WGK[j], wg);
            r[2 * j + 1] = (XGK[j], WGK[j], wg);
        }
        r
    })
}

/// Kronrod value, |Kronrod − Gauss| and the Kronrod estimate of `∫|f|`.
fn gk21<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64, f64) {
    let h = 0.5 * (b - a);
    let m = 0.5 * (a + b);
    let fc = f(m);
    let mut kron = fc * WGK[10];
    let mut l1 = fc.norm() * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    for j in 0..10 {
        let x = h * XGK[j];
        let (lo, hi) = (f(m - x), f(m + x));
        let s = lo + hi;
        kron += s * WGK[j];
        l1 += (lo.norm() + hi.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    (kron, (kron - gauss).norm(), l1 * h.abs())
}

/// No error target below this multiple of `ε_mach·∫|f|` is attainable in floating
/// point; the adaptive loop accepts at that level.
const ROUNDOFF_FLOOR: f64 = 50.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    pub abs_error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
    /// Intervals narrower than this are never split further.
    pub min_width: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-13, rel: 1e-10, max_intervals: 20_000, min_width: 1e-14 }
    }
}

struct Interval {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
    l1: f64,
}

impl PartialEq for Interval {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Interval {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err).then(o.a.total_cmp(&self.a))
    }
}

/// Globally adaptive Gauss–Kronrod integration over `[a, b]`, starting from the
/// given breakpoints. Non-finite samples are reported as an error.
pub fn integrate_adaptive<F: Fn(f64) -> Complex64>(
    f: F,
    breakpoints: &[f64],
    tol: Tolerance,
) -> Result<QuadResult> {
    if breakpoints.len() < 2 {
        return Err(Error::InvalidParameter("need at least two breakpoints".into()));
    }
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in breakpoints.windows(2) {
        let (v, e, l1) = gk21(&f, w[0], w[1]);
        evaluations += 21;
        heap.push(Interval { a: w[0], b: w[1], value: v, err: e, l1 });
    }
    loop {
        let total: Complex64 = heap.iter().map(|i| i.value).sum();
        let err: f64 = heap.iter().map(|i| i.err).sum();
        let l1: f64 = heap.iter().map(|i| i.l1).sum();
        if !(total.re.is_finite() && total.im.is_finite() && err.is_finite()) {
            return Err(Error::Quadrature("non-finite integrand sample".into()));
        }
        if err <= tol.abs.max(tol.rel * total.norm()).max(ROUNDOFF_FLOOR * l1) {
            return Ok(QuadResult { value: sorted_sum(&heap), abs_error: err, evaluations });
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::Quadrature(format!(
                "{} intervals, error estimate {err:.3e} above target",
                heap.len()
            )));
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if worst.b - worst.a < tol.min_width {
            return Err(Error::Quadrature(format!(
                "interval [{}, {}] below minimum width, error estimate {err:.3e}",
                worst.a, worst.b
            )));
        }
        let (v1, e1, l1a) = gk21(&f, worst.a, mid);
        let (v2, e2, l1b) = gk21(&f, mid, worst.b);
        evaluations += 42;
        heap.push(Interval { a: worst.a, b: mid, value: v1, err: e1, l1: l1a });
        heap.push(Interval { a: mid, b: worst.b, value: v2, err: e2, l1: l1b });
    }
}

fn sorted_sum(heap: &BinaryHeap<Interval>) -> Complex64 {
    let mut parts: Vec<(f64, Complex64)> = heap.iter().map(|i| (i.a, i.value)).collect();
    parts.sort_by(|x, y| x.0.total_cmp(&y.0));
    parts.into_iter().map(|p| p.1).sum()
}

/// Neville extrapolation of `values[k] ≈ P(steps[k])` to `step = 0`.
///
/// Returns the extrapolated value and an error estimate, the difference from the
/// extrapolant that drops the coarsest point.
pub fn richardson(steps: &[f64], values: &[Complex64]) -> (Complex64, f64) {
    assert_eq!(steps.len(), values.len());
    assert!(!steps.is_empty());
    let full = neville_at_zero(steps, values);
    if steps.len() == 1 {
        return (full, f64::INFINITY);
    }
    let reduced = neville_at_zero(&steps[1..], &values[1..]);
    (full, (full - reduced).norm())
}

fn neville_at_zero(h: &[f64], v: &[Complex64]) -> Complex64 {
    let n = h.len();
    let mut p = v.to_vec();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (p[i + 1] * h[i] - p[i] * h[i + k]) / (h[i] - h[i + k]);
        }
    }
    p[0]
}

/// Panel breakpoints on `[0, end]`: unit panels near the origin then geometric
/// growth, capped at `max_width`.
pub fn graded_panels(first: f64, max_width: f64, end: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    let mut width = first;
    let mut x = 0.0;
    while x < end {
        x = (x + width).min(end);
        pts.push(x);
        if x >= 2.0 * first {
            width = (width * 1.5).min(max_width);
        }
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        for n in [1, 2, 5, 16, 33] {
            let gl = GaussLegendre::new(n);
            assert_relative_eq!(gl.weights.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
            let deg = 2 * n - 1;
            let v = gl.integrate(|x| Complex64::new(x.powi(deg as i32 - 1), 0.0), -1.0, 1.0);
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((v.re - exact).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn adaptive_handles_peaked_integrands() {
        // ∫ dx/(x² + δ²) over ℝ restricted to [-10, 10] = 2 atan(10/δ)/δ
        let d = 1e-3;
        let r = integrate_adaptive(|x| Complex64::new(1.0 / (x * x + d * d), 0.0), &[-10.0, 10.0], Tolerance::default())
            .unwrap();
        assert_relative_eq!(r.value.re, 2.0 * (10.0f64 / d).atan() / d, max_relative = 1e-10);
        // Oscillatory Gaussian: ∫ e^{-x²} e^{-ix} = √π e^{-1/4}
        let g = integrate_adaptive(
            |x| Complex64::new(0.0, -x).exp() * (-x * x).exp(),
            &[-12.0, 0.0, 12.0],
            Tolerance::default(),
        )
        .unwrap();
        assert!((g.value - Complex64::new(PI.sqrt() * (-0.25f64).exp(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn cancelling_integrand_stops_at_roundoff() {
        // Odd and sharply peaked: the integral is 0, so no relative target is reachable,
        // and the result is accepted once the error is at roundoff of ∫|f| ≈ 2 ln(1/δ).
        let d = 1e-3;
        let tol = Tolerance { abs: 0.0, rel: 1e-12, ..Tolerance::default() };
        let r = integrate_adaptive(|x| Complex64::new(x / (x * x + d * d), 0.0), &[-1.0, 0.3, 1.0], tol).unwrap();
        let l1 = (1.0f64 + d * d).ln() - (d * d).ln();
        assert!(r.value.norm() < 1e-12 * l1, "{}", r.value);
        assert!(r.abs_error <= ROUNDOFF_FLOOR * l1 * 1.01);
    }

    #[test]
    fn richardson_removes_polynomial_terms() {
        let steps = [1.0 / 20.0, 1.0 / 40.0, 1.0 / 80.0];
        let vals: Vec<Complex64> = steps.iter().map(|h| Complex64::new(3.0 + 2.0 * h - 5.0 * h * h, 0.0)).collect();
        let (v, e) = richardson(&steps, &vals);
        assert!((v.re - 3.0).abs() < 1e-12);
        assert!(e < 1e-2);
    }

    #[test]
    fn graded_panels_cover_range() {
        let p = graded_panels(0.5, 16.0, 500.0);
        assert_eq!(*p.last().unwrap(), 500.0);
        assert!(p.windows(2).all(|w| w[1] > w[0] && w[1] - w[0] <= 16.0 + 1e-12));
    }
}
