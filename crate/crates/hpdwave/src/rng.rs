//! Deterministic counter-based random number generation.
//!
//! Streams are derived by mixing a 64-bit seed with a stream id, so
//! per-replicate streams are independent of scheduling order and a given
//! seed always produces bit-identical output.

use num_complex::Complex64;

use crate::linalg::{matrix_exp, ComplexMatrix, HermitianMatrix, HpdMatrix};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64-bit seed with counter-based stream splitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// Independent stream for one replicate (or any other sub-task).
    pub fn stream(self, id: u64) -> Rng64 {
        Rng64 {
            state: mix64(self.0 ^ mix64(id.wrapping_mul(GOLDEN).wrapping_add(1))),
            cached_gaussian: None,
        }
    }
}

/// SplitMix64 stream.
#[derive(Debug, Clone)]
pub struct Rng64 {
    state: u64,
    cached_gaussian: Option<f64>,
}

impl Rng64 {
    pub fn new(seed: u64) -> Self {
        RngSeed(seed).stream(0)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard real normal via Box-Muller.
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(g) = self.cached_gaussian.take() {
            return g;
        }
        loop {
            let u = self.next_f64();
            if u <= f64::MIN_POSITIVE {
                continue;
            }
            let v = self.next_f64();
            let r = (-2.0 * u.ln()).sqrt();
            let theta = 2.0 * std::f64::consts::PI * v;
            self.cached_gaussian = Some(r * theta.sin());
            return r * theta.cos();
        }
    }

    /// Standard complex normal with `E[z conj(z)] = 1`.
    pub fn next_complex_gaussian(&mut self) -> Complex64 {
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        Complex64::new(self.next_gaussian() * scale, self.next_gaussian() * scale)
    }
}

/// Random Hermitian matrix with entries on the scale of `amplitude`.
pub fn random_hermitian(rng: &mut Rng64, dim: usize, amplitude: f64) -> HermitianMatrix {
    let mut m = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            m[(i, j)] = Complex64::new(
                amplitude * rng.next_gaussian(),
                amplitude * rng.next_gaussian(),
            );
        }
    }
    HermitianMatrix::symmetrize(m)
}

/// Random HPD matrix `exp(H)` with `H` Hermitian of scale `amplitude`.
pub fn random_hpd(rng: &mut Rng64, dim: usize, amplitude: f64) -> HpdMatrix {
    let h = random_hermitian(rng, dim, amplitude);
    HpdMatrix::new_unchecked(matrix_exp(&h).expect("exp of Hermitian"))
}

/// Haar-ish random unitary from the QR of a complex Gaussian matrix.
pub fn random_unitary(rng: &mut Rng64, dim: usize) -> ComplexMatrix {
    // Gram-Schmidt on Gaussian columns; diagonal phases normalized.
    let mut cols: Vec<Vec<Complex64>> = (0..dim)
        .map(|_| (0..dim).map(|_| rng.next_complex_gaussian()).collect())
        .collect();
    for j in 0..dim {
        for k in 0..j {
            let proj: Complex64 = (0..dim).map(|i| cols[k][i].conj() * cols[j][i]).sum();
            for i in 0..dim {
                let sub = proj * cols[k][i];
                cols[j][i] -= sub;
            }
        }
        let norm: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut cols[j] {
            *z /= norm;
        }
    }
    let mut u = ComplexMatrix::zeros(dim);
    for j in 0..dim {
        for i in 0..dim {
            u[(i, j)] = cols[j][i];
        }
    }
    u
}

/// Random invertible matrix: unitary times a positive diagonal.
pub fn random_invertible(rng: &mut Rng64, dim: usize) -> ComplexMatrix {
    let u = random_unitary(rng, dim);
    let mut scaled = ComplexMatrix::zeros(dim);
    for j in 0..dim {
        let s = (0.5 + rng.next_f64() * 1.5).exp();
        for i in 0..dim {
            scaled[(i, j)] = u[(i, j)] * s;
        }
    }
    scaled
}
