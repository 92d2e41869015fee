//! Iterative radix-2 complex FFT. All transform lengths in this crate are
//! powers of two, so nothing more general is needed.

use num_complex::Complex64;

/// In-place forward DFT `X_k = sum_t x_t e^{-2 pi i k t / n}`.
/// `n` must be a power of two.
pub fn fft(buf: &mut [Complex64]) {
    transform(buf, -1.0);
}

/// In-place unnormalized inverse DFT `x_t = sum_k X_k e^{+2 pi i k t / n}`.
/// Divide by `n` to invert `fft`.
pub fn ifft(buf: &mut [Complex64]) {
    transform(buf, 1.0);
}

fn transform(buf: &mut [Complex64], sign: f64) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "FFT length must be a power of two");
    if n <= 1 {
        return;
    }
    // Bit-reversal permutation.
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * std::f64::consts::PI / len as f64;
        let wlen = Complex64::new(ang.cos(), ang.sin());
        let half = len / 2;
        let mut start = 0;
        while start < n {
            let mut w = Complex64::new(1.0, 0.0);
            for k in 0..half {
                let u = buf[start + k];
                let v = buf[start + k + half] * w;
                buf[start + k] = u + v;
                buf[start + k + half] = u - v;
                w *= wlen;
            }
            start += len;
        }
        len <<= 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|t| {
                        let ang = -2.0 * std::f64::consts::PI * (k * t) as f64 / n as f64;
                        x[t] * Complex64::new(ang.cos(), ang.sin())
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        let mut rng = crate::rng::Rng64::new(17);
        let n = 64;
        let x: Vec<Complex64> = (0..n).map(|_| rng.next_complex_gaussian()).collect();
        let expected = naive_dft(&x);
        let mut buf = x.clone();
        fft(&mut buf);
        for (a, b) in buf.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn round_trip() {
        let mut rng = crate::rng::Rng64::new(19);
        let n = 256;
        let x: Vec<Complex64> = (0..n).map(|_| rng.next_complex_gaussian()).collect();
        let mut buf = x.clone();
        fft(&mut buf);
        ifft(&mut buf);
        for (a, b) in buf.iter().zip(&x) {
            assert!((a / n as f64 - b).norm() < 1e-12);
        }
    }
}
