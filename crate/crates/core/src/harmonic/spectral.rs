//! FFT helpers for periodic samples on a uniform grid over `[0, 2pi)`.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft(buf: &mut [Complex64], inverse: bool) {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        let plan = if inverse {
            p.plan_fft_inverse(buf.len())
        } else {
            p.plan_fft_forward(buf.len())
        };
        plan.process(buf);
    });
}

/// Coefficients `c_k` with `f(t_j) = sum_k c_k e^{i k t_j}`, in FFT order.
pub fn coefficients(values: &[f64]) -> Vec<Complex64> {
    let n = values.len() as f64;
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft(&mut buf, false);
    buf.iter_mut().for_each(|c| *c /= n);
    buf
}

/// Signed wavenumber of FFT bin `j` out of `n`.
#[inline]
pub fn wavenumber(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Complex analogue of [`coefficients`].
pub fn complex_coefficients(values: &[Complex64]) -> Vec<Complex64> {
    let n = values.len() as f64;
    let mut buf = values.to_vec();
    fft(&mut buf, false);
    buf.iter_mut().for_each(|c| *c /= n);
    buf
}

/// Samples of `d/dt` of a complex periodic function.
pub fn complex_derivative(values: &[Complex64]) -> Vec<Complex64> {
    let n = values.len();
    let mut c = complex_coefficients(values);
    for (j, cj) in c.iter_mut().enumerate() {
        let k = wavenumber(j, n);
        *cj = if n.is_multiple_of(2) && k == (n / 2) as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            *cj * Complex64::new(0.0, k as f64)
        };
    }
    fft(&mut c, true);
    c
}

/// Evaluate `sum_k c_k e^{i k t}` (FFT order, Nyquist mode dropped) at any `t`.
pub fn eval_series(coeffs: &[Complex64], t: f64) -> Complex64 {
    let n = coeffs.len();
    let step = Complex64::from_polar(1.0, t);
    let mut pos = Complex64::new(1.0, 0.0);
    let mut acc = coeffs[0];
    for k in 1..n.div_ceil(2) {
        pos *= step;
        acc += coeffs[k] * pos + coeffs[n - k] * pos.conj();
    }
    acc
}

fn synthesize(mut coeffs: Vec<Complex64>) -> Vec<f64> {
    fft(&mut coeffs, true);
    coeffs.into_iter().map(|c| c.re).collect()
}

/// Trigonometric interpolation of `values` onto a grid `factor` times finer.
pub fn upsample(values: &[f64], factor: usize) -> Vec<f64> {
    if factor == 1 {
        return values.to_vec();
    }
    let n = values.len();
    let m = n * factor;
    let c = coefficients(values);
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    for (j, cj) in c.iter().enumerate() {
        let k = wavenumber(j, n);
        if n.is_multiple_of(2) && k == (n / 2) as i64 {
            // Split the Nyquist mode symmetrically.
            out[n / 2] += cj * 0.5;
            out[m - n / 2] += cj * 0.5;
        } else if k >= 0 {
            out[k as usize] += cj;
        } else {
            out[(m as i64 + k) as usize] += cj;
        }
    }
    synthesize(out)
}

/// Spectral derivative `d/dt` of periodic samples.
pub fn derivative(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let c = coefficients(values);
    let d: Vec<Complex64> = c
        .iter()
        .enumerate()
        .map(|(j, cj)| {
            let k = wavenumber(j, n);
            if n.is_multiple_of(2) && k == (n / 2) as i64 {
                Complex64::new(0.0, 0.0)
            } else {
                cj * Complex64::new(0.0, k as f64)
            }
        })
        .collect();
    synthesize(d)
}

/// Sum of `|c_k|` over the upper quarter of the resolved band: an a-posteriori
/// estimate of the truncation error of a trigonometric representation.
pub fn tail_estimate(values: &[f64]) -> f64 {
    let n = values.len();
    coefficients(values)
        .iter()
        .enumerate()
        .filter(|(j, _)| wavenumber(*j, n).unsigned_abs() as usize > n / 4)
        .map(|(_, c)| c.norm())
        .sum()
}
