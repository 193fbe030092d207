//! Uniform-grid synthesis and analysis of truncated Fourier series.
//!
//! Coefficient vectors use the layout `(x_0, x_1, y_1, …, x_N, y_N)` for
//! `f(s) = x_0 + Σ x_n cos(ns) + y_n sin(ns)`. The grid is
//! `s_j = 2πj/M`, `M` a power of two with `M > 2N`, so analysis of a trig
//! polynomial of degree `≤ N` is exact.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub(crate) struct SpectralGrid {
    harmonics: usize,
    size: usize,
    /// `e^{-2πik/M}` for `k < M/2`.
    twiddles: Vec<Complex64>,
    bit_reverse: Vec<usize>,
}

/// Fourier coefficients of `cos(θ(s)+s)` and `sin(θ(s)+s)` together with
/// the trapezoid value of `∫ e^{i(θ(s)+s)} ds`.
#[derive(Debug, Clone)]
pub(crate) struct PhaseSpectrum {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
    pub closure: Complex64,
}

impl SpectralGrid {
    pub fn new(harmonics: usize, size: usize) -> Result<Self> {
        if harmonics == 0 {
            return Err(Error::Precondition(
                "harmonic count must be at least 1".into(),
            ));
        }
        if !size.is_power_of_two() || size <= 2 * harmonics {
            return Err(Error::Precondition(alloc::format!(
                "grid size {size} must be a power of two larger than 2N = {}",
                2 * harmonics
            )));
        }
        let twiddles = (0..size / 2)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / size as f64))
            .collect();
        let bits = size.trailing_zeros();
        let bit_reverse = (0..size)
            .map(|i| {
                if bits == 0 {
                    0
                } else {
                    i.reverse_bits() >> (usize::BITS - bits)
                }
            })
            .collect();
        Ok(SpectralGrid {
            harmonics,
            size,
            twiddles,
            bit_reverse,
        })
    }

    pub fn harmonics(&self) -> usize {
        self.harmonics
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn dim(&self) -> usize {
        2 * self.harmonics + 1
    }

    pub fn node(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.size as f64
    }

    fn fft(&self, buf: &mut [Complex64], inverse: bool) {
        let m = self.size;
        debug_assert_eq!(buf.len(), m);
        for i in 0..m {
            let j = self.bit_reverse[i];
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= m {
            let half = len / 2;
            let stride = m / len;
            for start in (0..m).step_by(len) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let w = if inverse { w.conj() } else { w };
                    let u = buf[start + k];
                    let v = buf[start + k + half] * w;
                    buf[start + k] = u + v;
                    buf[start + k + half] = u - v;
                }
            }
            len <<= 1;
        }
    }

    /// Samples `f(s_j)` of the series with the given coefficients.
    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        debug_assert_eq!(coeffs.len(), self.dim());
        let m = self.size;
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        buf[0] = Complex64::new(coeffs[0], 0.0);
        for n in 1..=self.harmonics {
            let (x, y) = (coeffs[2 * n - 1], coeffs[2 * n]);
            buf[n] = Complex64::new(0.5 * x, -0.5 * y);
            buf[m - n] = Complex64::new(0.5 * x, 0.5 * y);
        }
        self.fft(&mut buf, true);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Coefficients (up to harmonic `N`) of the real and imaginary parts of
    /// a complex sample vector.
    pub fn analyze_complex(&self, mut samples: Vec<Complex64>) -> (Vec<f64>, Vec<f64>) {
        let m = self.size;
        self.fft(&mut samples, false);
        let inv_m = 1.0 / m as f64;
        let dim = self.dim();
        let mut re = vec![0.0; dim];
        let mut im = vec![0.0; dim];
        re[0] = samples[0].re * inv_m;
        im[0] = samples[0].im * inv_m;
        for n in 1..=self.harmonics {
            let zp = samples[n] * inv_m;
            let zm = samples[m - n].conj() * inv_m;
            // spectrum of Re z is (Z[n] + conj Z[-n]) / 2, of Im z is (Z[n] - conj Z[-n]) / 2i
            let f = (zp + zm) * 0.5;
            let g = (zp - zm) * Complex64::new(0.0, -0.5);
            re[2 * n - 1] = 2.0 * f.re;
            re[2 * n] = -2.0 * f.im;
            im[2 * n - 1] = 2.0 * g.re;
            im[2 * n] = -2.0 * g.im;
        }
        (re, im)
    }

    /// Spectrum of `e^{i(θ(s)+s)}` for the turning function `θ`.
    pub fn phase_spectrum(&self, coeffs: &[f64]) -> PhaseSpectrum {
        let theta = self.synthesize(coeffs);
        let samples: Vec<Complex64> = theta
            .iter()
            .enumerate()
            .map(|(j, t)| Complex64::from_polar(1.0, t + self.node(j)))
            .collect();
        let sum: Complex64 = samples.iter().sum();
        let closure = sum * (2.0 * PI / self.size as f64);
        let (cos, sin) = self.analyze_complex(samples);
        PhaseSpectrum { cos, sin, closure }
    }
}

/// Direct evaluation of the series at an arbitrary parameter.
pub(crate) fn evaluate(coeffs: &[f64], s: f64) -> f64 {
    let harmonics = (coeffs.len() - 1) / 2;
    let mut value = coeffs[0];
    for n in 1..=harmonics {
        let (sn, cn) = (n as f64 * s).sin_cos();
        value += coeffs[2 * n - 1] * cn + coeffs[2 * n] * sn;
    }
    value
}
