//! Convolution helpers.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

const DIRECT_LIMIT: usize = 64;

/// Full linear convolution, length `a.len() + b.len() - 1`.
pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    if a.len().min(b.len()) <= DIRECT_LIMIT {
        return convolve_direct(a, b);
    }
    let out_len = a.len() + b.len() - 1;
    let n = out_len.next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut fa = to_complex(a, n);
    let mut fb = to_complex(b, n);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inv.process(&mut fa);
    let scale = 1.0 / n as f64;
    fa[..out_len].iter().map(|c| c.re * scale).collect()
}

/// Sum of `signals[i] * kernels[i]`, computed with one inverse transform.
pub fn convolve_sum(signals: &[Vec<f64>], kernels: &[Vec<f64>]) -> Vec<f64> {
    assert_eq!(signals.len(), kernels.len());
    let out_len = signals
        .iter()
        .zip(kernels)
        .filter(|(s, k)| !s.is_empty() && !k.is_empty())
        .map(|(s, k)| s.len() + k.len() - 1)
        .max()
        .unwrap_or(0);
    if out_len == 0 {
        return Vec::new();
    }
    let n = out_len.next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut acc = vec![Complex64::new(0.0, 0.0); n];
    for (s, k) in signals.iter().zip(kernels) {
        if s.is_empty() || k.is_empty() {
            continue;
        }
        let mut fs = to_complex(s, n);
        let mut fk = to_complex(k, n);
        fwd.process(&mut fs);
        fwd.process(&mut fk);
        for ((a, x), y) in acc.iter_mut().zip(&fs).zip(&fk) {
            *a += x * y;
        }
    }
    inv.process(&mut acc);
    let scale = 1.0 / n as f64;
    acc[..out_len].iter().map(|c| c.re * scale).collect()
}

pub fn convolve_direct(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (o, &y) in out[i..].iter_mut().zip(b) {
            *o += x * y;
        }
    }
    out
}

fn to_complex(x: &[f64], n: usize) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = x.iter().map(|&r| Complex64::new(r, 0.0)).collect();
    v.resize(n, Complex64::new(0.0, 0.0));
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft_matches_direct() {
        let a: Vec<f64> = (0..300).map(|i| ((i * 37 % 101) as f64 - 50.0) / 50.0).collect();
        let b: Vec<f64> = (0..129).map(|i| ((i * 11 % 29) as f64 - 14.0) / 14.0).collect();
        let fast = convolve(&a, &b);
        let slow = convolve_direct(&a, &b);
        assert_eq!(fast.len(), slow.len());
        for (x, y) in fast.iter().zip(&slow) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn convolve_sum_is_sum_of_convolutions() {
        let s = vec![vec![1.0, 2.0, 3.0], vec![0.5; 100]];
        let k = vec![vec![1.0, -1.0], vec![0.25; 70]];
        let got = convolve_sum(&s, &k);
        let mut want = convolve_direct(&s[1], &k[1]);
        for (w, v) in want.iter_mut().zip(convolve_direct(&s[0], &k[0])) {
            *w += v;
        }
        assert_eq!(got.len(), want.len());
        for (x, y) in got.iter().zip(&want) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn empty_inputs() {
        assert!(convolve(&[], &[1.0]).is_empty());
        assert!(convolve_sum(&[vec![]], &[vec![1.0]]).is_empty());
    }
}
