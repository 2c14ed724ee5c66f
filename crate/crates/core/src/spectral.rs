//! Discrete Fourier helpers for uniformly sampled periodic functions on [0, 2π).

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// One Fourier mode of a sampled periodic function, taken against the
/// orthonormal basis `e^{ikx}/√(2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub k: i64,
    pub coeff: Complex64,
    /// Set for the unpaired `k = n/2` mode of an even-length sample.
    pub nyquist: bool,
}

fn forward(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

fn wavenumber(index: usize, n: usize) -> (i64, bool) {
    if 2 * index == n {
        ((n / 2) as i64, true)
    } else if 2 * index < n {
        (index as i64, false)
    } else {
        (index as i64 - n as i64, false)
    }
}

/// Fourier coefficients `c_k = ∫ f(x) e^{-ikx} dx / √(2π)` by the rectangle rule.
pub fn coefficients(values: &[f64]) -> Vec<Mode> {
    let n = values.len();
    let scale = (2.0 * PI).sqrt() / n as f64;
    forward(values)
        .into_iter()
        .enumerate()
        .map(|(idx, c)| {
            let (k, nyquist) = wavenumber(idx, n);
            Mode {
                k,
                coeff: c * scale,
                nyquist,
            }
        })
        .collect()
}

/// Spectral derivative `d/dx` of a periodic sample; the Nyquist mode is dropped.
pub fn derivative(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut spec = forward(values);
    for (idx, c) in spec.iter_mut().enumerate() {
        let (k, nyquist) = wavenumber(idx, n);
        *c = if nyquist {
            Complex64::new(0.0, 0.0)
        } else {
            *c * Complex64::new(0.0, k as f64)
        };
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(n).process(&mut spec);
    spec.iter().map(|c| c.re / n as f64).collect()
}

/// `∫_0^{2π} |f'|² dx` evaluated through Parseval on the sampled spectrum.
pub fn energy(values: &[f64]) -> f64 {
    coefficients(values)
        .iter()
        .filter(|m| !m.nyquist)
        .map(|m| (m.k * m.k) as f64 * m.coeff.norm_sqr())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..n).map(|j| f(2.0 * PI * j as f64 / n as f64)).collect()
    }

    #[test]
    fn derivative_of_trig_polynomial_is_exact() {
        let v = sample(64, |x| (3.0 * x).sin() + 0.5 * x.cos());
        let d = derivative(&v);
        for (j, dj) in d.iter().enumerate() {
            let x = 2.0 * PI * j as f64 / 64.0;
            let want = 3.0 * (3.0 * x).cos() - 0.5 * x.sin();
            assert!((dj - want).abs() < 1e-11);
        }
    }

    #[test]
    fn parseval_holds_for_unit_mass_samples() {
        let v = sample(128, |x| (1.0 + x.cos()) / (3.0 * PI).sqrt());
        let total: f64 = coefficients(&v).iter().map(|m| m.coeff.norm_sqr()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn energy_of_cos_kx() {
        for k in 1..=8 {
            let v = sample(64, |x| (k as f64 * x).cos() / PI.sqrt());
            assert!((energy(&v) - (k * k) as f64).abs() < 1e-10);
        }
    }
}
