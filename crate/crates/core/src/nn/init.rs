//! Random sampling helpers built directly on `RngCore`.

use core::f64::consts::PI;

use rand_core::RngCore;

/// Weights are drawn within this many standard deviations.
pub const TRUNCATION_SIGMAS: f64 = 2.0;

/// Uniform in `[0, 1)` with 53 random bits.
pub fn unit_uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal via Box-Muller (one variate per call).
pub fn standard_normal<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    let u1 = 1.0 - unit_uniform(rng);
    let u2 = unit_uniform(rng);
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * PI * u2)
}

/// Normal(0, std) resampled until it lies within `±2 std`.
pub fn truncated_normal<R: RngCore + ?Sized>(rng: &mut R, std: f64) -> f64 {
    loop {
        let z = standard_normal(rng);
        if z.abs() <= TRUNCATION_SIGMAS {
            return z * std;
        }
    }
}

/// Standard deviation of `truncated_normal(std)`: about `0.880 std`.
pub fn truncated_normal_std(std: f64) -> f64 {
    let a = TRUNCATION_SIGMAS;
    let mass = 2.0 * crate::special::normal_cdf(a) - 1.0;
    std * libm::sqrt(1.0 - 2.0 * a * crate::special::normal_pdf(a) / mass)
}
