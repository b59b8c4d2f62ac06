//! Special functions and quadrature shared by the resamplers and the
//! statistics code.

use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

/// Normalized sinc, `sin(pi x) / (pi x)`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        let px = PI * x;
        libm::sin(px) / px
    }
}

/// Modified Bessel function of the first kind, order zero.
pub fn bessel_i0(x: f64) -> f64 {
    // Power series; converges for every x and is accurate to machine
    // precision for the arguments used by Kaiser windows (|x| < 50).
    let half = 0.5 * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= (half / k) * (half / k);
        sum += term;
        if term < sum * 1e-17 {
            return sum;
        }
        k += 1.0;
    }
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    libm::exp(-0.5 * x * x) / libm::sqrt(2.0 * PI)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn regularized_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front =
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * libm::log(x) + b * libm::log1p(-x);
    let front = libm::exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(x, a, b) / a
    } else {
        1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b
    }
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Upper tail `P(F > f)` of the F distribution with `(d1, d2)` degrees of
/// freedom.
pub fn f_distribution_sf(f: f64, d1: f64, d2: f64) -> f64 {
    if f.is_nan() {
        return f64::NAN;
    }
    if f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    regularized_beta(d2 / (d2 + d1 * f), 0.5 * d2, 0.5 * d1)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss-Legendre rule over `[lo, hi]` split into `panels` equal
/// pieces.
#[derive(Debug, Clone)]
pub struct CompositeRule {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl CompositeRule {
    pub fn new(lo: f64, hi: f64, panels: usize, order: usize) -> Self {
        let (nodes, w) = gauss_legendre(order);
        let width = (hi - lo) / panels as f64;
        let mut points = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let a = lo + p as f64 * width;
            for (x, wt) in nodes.iter().zip(&w) {
                points.push(a + 0.5 * width * (x + 1.0));
                weights.push(0.5 * width * wt);
            }
        }
        Self { points, weights }
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// `P(range of k iid N(0,1) <= w)`: the studentized range with infinite
/// degrees of freedom.
fn normal_range_cdf(w: f64, k: usize, rule: &CompositeRule) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    let km1 = (k - 1) as i32;
    let inner = rule.integrate(|z| {
        let diff = normal_cdf(z) - normal_cdf(z - w);
        normal_pdf(z) * libm::pow(diff.max(0.0), km1 as f64)
    });
    (k as f64 * inner).clamp(0.0, 1.0)
}

/// CDF of the studentized range `q = range / s` of `k` normal means with `df`
/// degrees of freedom for the variance estimate.
///
/// Evaluated as the double integral over the scaled chi density of `s` and
/// the normal range distribution, both by composite Gauss-Legendre
/// quadrature.
pub fn studentized_range_cdf(q: f64, k: usize, df: f64) -> f64 {
    assert!(k >= 2, "the range needs at least two means");
    if q.is_nan() {
        return f64::NAN;
    }
    if q <= 0.0 {
        return 0.0;
    }
    if q.is_infinite() {
        return 1.0;
    }
    let z_lo = -8.5;
    let z_hi = 8.5 + q.min(40.0);
    let inner = CompositeRule::new(z_lo, z_hi, 24, 16);
    if df.is_infinite() || df > 1e6 {
        return normal_range_cdf(q, k, &inner);
    }
    // s = sqrt(chi2_df / df) has log-density
    // ln2 + (df/2) ln(df/2) - lnG(df/2) + (df-1) ln s - df s^2 / 2.
    let half = 0.5 * df;
    let log_norm = core::f64::consts::LN_2 + half * libm::log(half) - ln_gamma(half);
    let spread = 12.0 / libm::sqrt(2.0 * df);
    let lo = (1.0 - spread).max(0.0);
    let hi = 1.0 + spread.max(2.0);
    let outer = CompositeRule::new(lo, hi, 48, 16);
    let total = outer.integrate(|s| {
        if s <= 0.0 {
            return 0.0;
        }
        let log_f = log_norm + (df - 1.0) * libm::log(s) - half * s * s;
        libm::exp(log_f) * normal_range_cdf(q * s, k, &inner)
    });
    total.clamp(0.0, 1.0)
}

/// Upper-tail quantile: the `q` with `P(Q > q) = alpha`.
pub fn studentized_range_quantile(alpha: f64, k: usize, df: f64) -> f64 {
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must be in (0, 1)");
    let target = 1.0 - alpha;
    let (mut lo, mut hi) = (0.0, 1.0);
    while studentized_range_cdf(hi, k, df) < target {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if studentized_range_cdf(mid, k, df) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-11 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}
