//! Radix-2 discrete Fourier transforms.
//!
//! Conventions: the forward transform is `X_k = sum_j x_j e^{-2 pi i jk/n}`
//! and the inverse is `x_j = (1/n) sum_k X_k e^{+2 pi i jk/n}`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

/// `e^{sign * 2 pi i k / n}` with the phase reduced modulo `n` first.
pub(crate) fn root_of_unity(k: u64, n: u64, sign: f64) -> Complex64 {
    let k = k % n;
    let theta = 2.0 * PI * k as f64 / n as f64;
    Complex64::new(libm::cos(theta), sign * libm::sin(theta))
}

/// In-place unnormalized transform. `inverse` flips the exponent sign but
/// does not divide by `n`.
pub fn transform(buf: &mut [Complex64], inverse: bool) -> Result<()> {
    let n = buf.len();
    if !n.is_power_of_two() {
        return Err(Error::domain(format!("transform length {n} is not a power of two")));
    }
    if n == 1 {
        return Ok(());
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let twiddles: Vec<Complex64> = (0..n / 2)
        .map(|k| root_of_unity(k as u64, n as u64, sign))
        .collect();
    let mut len = 2;
    while len <= n {
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..len / 2 {
                let w = twiddles[k * stride];
                let a = buf[start + k];
                let b = buf[start + k + len / 2] * w;
                buf[start + k] = a + b;
                buf[start + k + len / 2] = a - b;
            }
        }
        len <<= 1;
    }
    Ok(())
}

/// Forward transform of a copy.
pub fn forward(x: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut buf = x.to_vec();
    transform(&mut buf, false)?;
    Ok(buf)
}

/// Normalized inverse transform of a copy.
pub fn inverse(x: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut buf = x.to_vec();
    transform(&mut buf, true)?;
    let scale = 1.0 / buf.len() as f64;
    for v in &mut buf {
        *v *= scale;
    }
    Ok(buf)
}

/// Inverse transform of real samples whose result must be real, for example
/// an even symbol sampled on the FFT grid. Fails if the imaginary residue
/// exceeds `tol`.
pub fn inverse_real(samples: &[f64], tol: f64) -> Result<Vec<f64>> {
    let buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let out = inverse(&buf)?;
    take_real(out, tol)
}

fn take_real(values: Vec<Complex64>, tol: f64) -> Result<Vec<f64>> {
    let residue = values.iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
    if residue > tol {
        return Err(Error::numerical(
            "inverse transform left an imaginary residue; the sample ordering is not even",
            residue,
        ));
    }
    Ok(values.into_iter().map(|v| v.re).collect())
}

/// First `count` outputs of the normalized inverse transform of length `n`,
/// `y_d = (1/n) sum_k x(k) e^{2 pi i k d / n}` for `d < count`.
///
/// Samples are produced on demand, so memory stays `O(count)` while the work
/// is `O(n log count)`. With `k = a + q b` (`q = n / count`) the sum splits
/// into `q` inverse transforms of length `count` over strided samples, each
/// multiplied by the twiddle `e^{2 pi i a d / n}`.
pub fn leading_inverse<F: FnMut(u64) -> f64>(
    n: u64,
    count: usize,
    mut sample: F,
    tol: f64,
) -> Result<Vec<f64>> {
    if !n.is_power_of_two() || !count.is_power_of_two() || count as u64 > n {
        return Err(Error::domain(format!(
            "pruned transform needs power-of-two sizes with count <= n, got n={n}, count={count}"
        )));
    }
    let q = n / count as u64;
    let mut acc = vec![Complex64::new(0.0, 0.0); count];
    let mut block = vec![Complex64::new(0.0, 0.0); count];
    for a in 0..q {
        for (b, slot) in block.iter_mut().enumerate() {
            *slot = Complex64::new(sample(a + q * b as u64), 0.0);
        }
        transform(&mut block, true)?;
        let step = root_of_unity(a, n, 1.0);
        let mut w = Complex64::new(1.0, 0.0);
        for (d, out) in acc.iter_mut().enumerate() {
            // Refresh the twiddle exactly every 64 steps to bound drift.
            if d % 64 == 0 {
                w = root_of_unity(a * d as u64, n, 1.0);
            }
            *out += w * block[d];
            w *= step;
        }
    }
    let scale = 1.0 / n as f64;
    take_real(acc.into_iter().map(|v| v * scale).collect(), tol)
}

/// Normalized inverse transform along each axis of an `n x n x n` array
/// stored with flat index `(x n + y) n + z`.
pub fn inverse_3d(buf: &mut [Complex64], n: usize) -> Result<()> {
    if buf.len() != n * n * n {
        return Err(Error::domain("3D buffer length must be n^3"));
    }
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..3 {
        let stride = n.pow(2 - axis as u32);
        for base in 0..n * n * n {
            // Visit each line once: the axis coordinate of `base` is zero.
            if (base / stride) % n != 0 {
                continue;
            }
            for (t, slot) in line.iter_mut().enumerate() {
                *slot = buf[base + t * stride];
            }
            transform(&mut line, true)?;
            for (t, v) in line.iter().enumerate() {
                buf[base + t * stride] = *v / n as f64;
            }
        }
    }
    Ok(())
}

/// Direct `O(n^2)` forward transform for any length.
pub fn forward_naive(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len() as u64;
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(j, v)| v * root_of_unity(j as u64 * k, n, -1.0))
                .sum()
        })
        .collect()
}
