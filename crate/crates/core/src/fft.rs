//! Forward complex FFT.
//!
//! Power-of-two sizes use an in-place iterative radix-2 transform; any other
//! size goes through Bluestein's chirp-z algorithm on a padded power-of-two
//! transform. Plans are immutable once built and can be shared across threads.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct FftPlan {
    n: usize,
    kind: PlanKind,
}

#[derive(Debug, Clone)]
enum PlanKind {
    Radix2(Radix2),
    Bluestein {
        inner: Radix2,
        /// `exp(-i pi k^2 / n)` for k in 0..n.
        chirp: Vec<Complex64>,
        /// FFT of the conjugate chirp, wrapped to the inner length.
        chirp_spectrum: Vec<Complex64>,
    },
}

#[derive(Debug, Clone)]
struct Radix2 {
    n: usize,
    /// `exp(-2 pi i k / n)` for k in 0..n/2.
    twiddles: Vec<Complex64>,
}

impl Radix2 {
    fn new(n: usize) -> Self {
        debug_assert!(n.is_power_of_two());
        let twiddles = (0..n / 2)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
            .collect();
        Self { n, twiddles }
    }

    fn forward(&self, buf: &mut [Complex64]) {
        let n = self.n;
        if n <= 1 {
            return;
        }
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }

    fn inverse(&self, buf: &mut [Complex64]) {
        for v in buf.iter_mut() {
            *v = v.conj();
        }
        self.forward(buf);
        let scale = 1.0 / self.n as f64;
        for v in buf.iter_mut() {
            *v = v.conj() * scale;
        }
    }
}

impl FftPlan {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "FFT size must be positive");
        if n.is_power_of_two() {
            return Self {
                n,
                kind: PlanKind::Radix2(Radix2::new(n)),
            };
        }
        let m = (2 * n - 1).next_power_of_two();
        let inner = Radix2::new(m);
        // k^2 mod 2n keeps the phase argument small for large k.
        let chirp: Vec<Complex64> = (0..n)
            .map(|k| {
                let k2 = (k as u128 * k as u128 % (2 * n as u128)) as f64;
                Complex64::from_polar(1.0, -PI * k2 / n as f64)
            })
            .collect();
        let mut chirp_spectrum = vec![Complex64::new(0.0, 0.0); m];
        chirp_spectrum[0] = chirp[0].conj();
        for k in 1..n {
            chirp_spectrum[k] = chirp[k].conj();
            chirp_spectrum[m - k] = chirp[k].conj();
        }
        inner.forward(&mut chirp_spectrum);
        Self {
            n,
            kind: PlanKind::Bluestein {
                inner,
                chirp,
                chirp_spectrum,
            },
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place forward DFT: `X[k] = sum_m x[m] exp(-2 pi i k m / n)`.
    ///
    /// Panics if `buf.len() != self.len()`.
    pub fn forward(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.n, "FFT buffer length mismatch");
        match &self.kind {
            PlanKind::Radix2(r) => r.forward(buf),
            PlanKind::Bluestein {
                inner,
                chirp,
                chirp_spectrum,
            } => {
                let mut work = vec![Complex64::new(0.0, 0.0); inner.n];
                for ((w, &x), &c) in work.iter_mut().zip(buf.iter()).zip(chirp) {
                    *w = x * c;
                }
                inner.forward(&mut work);
                for (w, &s) in work.iter_mut().zip(chirp_spectrum) {
                    *w *= s;
                }
                inner.inverse(&mut work);
                for ((out, &w), &c) in buf.iter_mut().zip(&work).zip(chirp) {
                    *out = w * c;
                }
            }
        }
    }

    /// Forward DFT of a real signal, returning the one-sided spectrum
    /// (`n / 2 + 1` bins).
    pub fn forward_real(&self, input: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = input.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward(&mut buf);
        buf.truncate(self.n / 2 + 1);
        buf
    }
}
