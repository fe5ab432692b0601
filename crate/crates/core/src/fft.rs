//! In-place iterative radix-2 FFT used by grid convolution and trigonometric
//! rasterization. Lengths must be powers of two.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

/// Forward transform, `X_k = sum_j x_j e^{-2 pi i jk/n}`.
pub fn fft(buf: &mut [Complex64]) {
    transform(buf, false);
}

/// Inverse transform including the `1/n` normalization.
pub fn ifft(buf: &mut [Complex64]) {
    transform(buf, true);
    let scale = 1.0 / buf.len() as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

fn transform(buf: &mut [Complex64], inverse: bool) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "fft length must be a power of two");
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
    let sign = if inverse { 1.0 } else { -1.0 };
    // Twiddles from direct evaluation per stage keep the error at O(eps log n).
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let twiddles: Vec<Complex64> = (0..half)
            .map(|k| {
                let ang = sign * 2.0 * PI * k as f64 / len as f64;
                Complex64::new(ang.cos(), ang.sin())
            })
            .collect();
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let a = buf[start + k];
                let b = buf[start + k + half] * twiddles[k];
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

/// Circular convolution of two real sequences of equal power-of-two length.
pub fn circular_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    let mut fa: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut fb: Vec<Complex64> = b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft(&mut fa);
    fft(&mut fb);
    for (x, y) in fa.iter_mut().zip(fb.iter()) {
        *x *= *y;
    }
    ifft(&mut fa);
    fa.into_iter().map(|c| c.re).collect()
}

/// Linear convolution; output length `a.len() + b.len()` (last entry is 0),
/// computed on a zero-padded power-of-two buffer.
pub fn linear_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let out_len = a.len() + b.len();
    let size = out_len.next_power_of_two();
    let mut pa = alloc::vec![0.0; size];
    let mut pb = alloc::vec![0.0; size];
    pa[..a.len()].copy_from_slice(a);
    pb[..b.len()].copy_from_slice(b);
    let mut out = circular_convolve(&pa, &pb);
    out.truncate(out_len);
    if let Some(last) = out.last_mut() {
        *last = 0.0;
    }
    out
}
