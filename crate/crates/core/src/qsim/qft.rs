//! Unitary discrete Fourier transform on a contiguous slice of amplitudes.

use std::f64::consts::PI;

use num_complex::Complex64;

/// In-place unitary DFT of a power-of-two length buffer.
///
/// Forward: `y[k] = Σ_j x[j] e^{+2πi jk/N} / √N` (the quantum Fourier transform
/// convention). Inverse flips the sign of the exponent.
pub(crate) fn unitary_dft(buf: &mut [Complex64], inverse: bool) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    if n == 1 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    let sign = if inverse { -1.0 } else { 1.0 };
    let mut len = 2;
    while len <= n {
        let step = Complex64::from_polar(1.0, sign * 2.0 * PI / len as f64);
        for start in (0..n).step_by(len) {
            let mut w = Complex64::new(1.0, 0.0);
            for k in 0..len / 2 {
                let a = buf[start + k];
                let b = buf[start + k + len / 2] * w;
                buf[start + k] = a + b;
                buf[start + k + len / 2] = a - b;
                // recompute periodically to bound twiddle drift on long rows
                w = if (k + 1) % 64 == 0 {
                    Complex64::from_polar(1.0, sign * 2.0 * PI * (k + 1) as f64 / len as f64)
                } else {
                    w * step
                };
            }
        }
        len <<= 1;
    }
    let norm = 1.0 / (n as f64).sqrt();
    for z in buf.iter_mut() {
        *z *= norm;
    }
}
