//! Ground-truth spectra, complex Wishart sampling, time-series synthesis
//! through the Cramér representation, and the Monte-Carlo benchmark harness.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::ifft;
use crate::linalg::{
    congruence_raw, eig_hermitian, matrix_exp, sqrt_pair, ComplexMatrix, HermitianMatrix, HpdMatrix,
};
use crate::manifold::{dist, HpdCurve, MetricKind};
use crate::par;
use crate::rng::{Rng64, RngSeed};
use crate::spectral::{
    bias_correct, build_tapers, multitaper_periodogram, EstimateOptions, TimeSeries,
};

/// Minimum eigenvalue every generated test spectrum must keep.
pub const SPECTRUM_FLOOR: f64 = 0.1;

/// Named test-spectrum families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumShape {
    /// Localized bumps of varying sharpness on a flat background.
    Bumps,
    /// Smooth background with local peaks and dips in the overall level.
    PeaksAndTroughs,
    /// Slowly varying spectrum with no localized features.
    Smooth,
}

impl SpectrumShape {
    pub fn name(self) -> &'static str {
        match self {
            SpectrumShape::Bumps => "bumps",
            SpectrumShape::PeaksAndTroughs => "peaks",
            SpectrumShape::Smooth => "smooth",
        }
    }

    pub fn parse(s: &str) -> Option<SpectrumShape> {
        match s {
            "bumps" => Some(SpectrumShape::Bumps),
            "peaks" | "peaks-and-troughs" => Some(SpectrumShape::PeaksAndTroughs),
            "smooth" => Some(SpectrumShape::Smooth),
            _ => None,
        }
    }
}

/// One scalar bump profile feeding a rank-one Hermitian direction.
#[derive(Debug, Clone, Copy)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
    pub height: f64,
    /// `None` is a Gaussian profile; `Some(alpha)` is the kink
    /// `height * max(0, 1 - |x - c|/w)^alpha`.
    pub sharpness: Option<f64>,
}

impl Bump {
    fn eval(&self, x: f64) -> f64 {
        match self.sharpness {
            None => {
                let z = (x - self.center) / self.width;
                self.height * (-0.5 * z * z).exp()
            }
            Some(alpha) => {
                let z = 1.0 - ((x - self.center) / self.width).abs();
                if z > 0.0 {
                    self.height * z.powf(alpha)
                } else {
                    0.0
                }
            }
        }
    }
}

/// Specification of an analytic test spectrum on `n` grid points.
#[derive(Debug, Clone)]
pub struct TestSpectrumSpec {
    pub shape: SpectrumShape,
    pub n: usize,
    pub dim: usize,
    /// Overrides the shape's default bump list when set.
    pub bumps: Option<Vec<Bump>>,
}

impl TestSpectrumSpec {
    pub fn new(shape: SpectrumShape, n: usize, dim: usize) -> Self {
        TestSpectrumSpec {
            shape,
            n,
            dim,
            bumps: None,
        }
    }
}

fn default_bumps(shape: SpectrumShape) -> Vec<Bump> {
    match shape {
        SpectrumShape::Bumps => vec![
            Bump {
                center: 0.12,
                width: 0.012,
                height: 2.2,
                sharpness: None,
            },
            Bump {
                center: 0.25,
                width: 0.035,
                height: 1.6,
                sharpness: Some(1.0),
            },
            Bump {
                center: 0.40,
                width: 0.016,
                height: 2.8,
                sharpness: None,
            },
            Bump {
                center: 0.55,
                width: 0.045,
                height: 1.2,
                sharpness: Some(0.6),
            },
            Bump {
                center: 0.72,
                width: 0.020,
                height: 2.0,
                sharpness: Some(2.0),
            },
            Bump {
                center: 0.88,
                width: 0.030,
                height: 1.5,
                sharpness: None,
            },
        ],
        SpectrumShape::PeaksAndTroughs => vec![
            Bump {
                center: 0.2,
                width: 0.025,
                height: 1.8,
                sharpness: None,
            },
            Bump {
                center: 0.5,
                width: 0.018,
                height: 2.4,
                sharpness: Some(1.0),
            },
            Bump {
                center: 0.85,
                width: 0.030,
                height: 1.4,
                sharpness: None,
            },
        ],
        SpectrumShape::Smooth => vec![
            Bump {
                center: 0.3,
                width: 0.15,
                height: 0.6,
                sharpness: None,
            },
            Bump {
                center: 0.7,
                width: 0.20,
                height: 0.8,
                sharpness: None,
            },
        ],
    }
}

/// Background level `c(x)`; dips below the base level create the troughs.
fn background(shape: SpectrumShape, x: f64) -> f64 {
    match shape {
        SpectrumShape::Bumps => 0.30,
        SpectrumShape::PeaksAndTroughs => {
            let dip1 = Bump {
                center: 0.35,
                width: 0.05,
                height: 0.20,
                sharpness: None,
            };
            let dip2 = Bump {
                center: 0.68,
                width: 0.06,
                height: 0.15,
                sharpness: Some(1.0),
            };
            0.55 - dip1.eval(x) - dip2.eval(x)
        }
        SpectrumShape::Smooth => 0.35 + 0.10 * (2.0 * std::f64::consts::PI * x).sin(),
    }
}

/// Deterministic unit vector for the m-th bump direction.
fn bump_direction(dim: usize, m: usize) -> Vec<Complex64> {
    let mut rng = RngSeed(0xD1_5EED).stream(m as u64);
    let mut v: Vec<Complex64> = (0..dim).map(|_| rng.next_complex_gaussian()).collect();
    let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= norm;
    }
    v
}

/// Deterministic Hermitian direction of unit Frobenius norm.
fn congruence_direction(dim: usize, which: u64) -> HermitianMatrix {
    let mut rng = RngSeed(0xA11CE).stream(which);
    let h = crate::rng::random_hermitian(&mut rng, dim, 1.0);
    h.scale(1.0 / h.frobenius_norm())
}

/// Builds the analytic HPD test spectrum of a specification:
/// `f(x) = a(x)^* (c(x) Id + sum_m g_m(x) E_m) a(x)` with rank-one
/// directions `E_m`, bump profiles `g_m`, and a smooth invertible path
/// `a(x) = exp(S(x))`. The smallest eigenvalue stays above
/// [`SPECTRUM_FLOOR`] by construction; this is validated per point.
pub fn make_test_spectrum(spec: &TestSpectrumSpec) -> Result<HpdCurve> {
    if spec.n == 0 || spec.dim == 0 {
        return Err(Error::InvalidSpec("empty grid or dimension".into()));
    }
    let bumps = spec
        .bumps
        .clone()
        .unwrap_or_else(|| default_bumps(spec.shape));
    let dirs: Vec<Vec<Complex64>> = (0..bumps.len())
        .map(|m| bump_direction(spec.dim, m))
        .collect();
    let k1 = congruence_direction(spec.dim, 1);
    let k2 = congruence_direction(spec.dim, 2);

    let mut points = Vec::with_capacity(spec.n);
    for l in 1..=spec.n {
        let x = l as f64 / spec.n as f64;
        let mut core = ComplexMatrix::zeros(spec.dim);
        let c = background(spec.shape, x);
        for i in 0..spec.dim {
            core[(i, i)] = Complex64::new(c, 0.0);
        }
        for (bump, dir) in bumps.iter().zip(&dirs) {
            let g = bump.eval(x);
            if g == 0.0 {
                continue;
            }
            for i in 0..spec.dim {
                for j in 0..spec.dim {
                    core[(i, j)] += dir[i] * dir[j].conj() * g;
                }
            }
        }
        // Smooth congruence path of bounded log-norm.
        let s1 = 0.20 * (2.0 * std::f64::consts::PI * x).cos();
        let s2 = 0.20 * (4.0 * std::f64::consts::PI * x).sin();
        let s = k1.scale(s1).add(&k2.scale(s2));
        let a = matrix_exp(&s)?;
        let point = congruence_raw(a.matrix(), &core);
        let eig = eig_hermitian(&point)?;
        if eig.eigenvalues[0] < SPECTRUM_FLOOR {
            return Err(Error::InvalidSpec(format!(
                "eigenvalue floor violated at grid point {l}: {}",
                eig.eigenvalues[0]
            )));
        }
        points.push(HpdMatrix::new_unchecked(point));
    }
    HpdCurve::new(points)
}

/// Draws `X = f^{1/2} * ((1/B) sum_b z_b z_b^*) * f^{1/2}` with standard
/// complex normal vectors `z_b`. Almost surely HPD when `dof >= dim`; for
/// smaller `dof` the output is rank deficient and flagged by validation,
/// not by this function.
pub fn sample_wishart(dof: usize, f: &HpdMatrix, rng: &mut Rng64) -> HpdMatrix {
    WishartSampler::new(dof, f).sample(rng)
}

/// Repeated sampling from a fixed scale matrix.
pub struct WishartSampler {
    dof: usize,
    dim: usize,
    sqrt_f: ComplexMatrix,
}

impl WishartSampler {
    pub fn new(dof: usize, f: &HpdMatrix) -> Self {
        let sp = sqrt_pair(f).expect("HPD matrix has a square root");
        WishartSampler {
            dof,
            dim: f.dim(),
            sqrt_f: sp.sqrt,
        }
    }

    pub fn sample(&self, rng: &mut Rng64) -> HpdMatrix {
        let d = self.dim;
        let mut acc = ComplexMatrix::zeros(d);
        for _ in 0..self.dof {
            let z: Vec<Complex64> = (0..d).map(|_| rng.next_complex_gaussian()).collect();
            for i in 0..d {
                for j in 0..d {
                    acc[(i, j)] += z[i] * z[j].conj();
                }
            }
        }
        let scaled = acc.scale(1.0 / self.dof as f64);
        HpdMatrix::new_unchecked(congruence_raw(&self.sqrt_f, &scaled))
    }
}

/// Synthesizes a real `d`-channel series of length `T = 2n` whose spectral
/// density matches `spectrum` on `(0, pi]`, via the Cramér representation
/// with Hermitian-symmetric complex normal amplitudes. The normalization
/// makes `E[I(omega)] ~ f(omega)` for the `1/(2 pi)`-scaled periodogram.
pub fn cramer_timeseries(
    spectrum: &HpdCurve,
    series_len: usize,
    rng: &mut Rng64,
) -> Result<TimeSeries> {
    let n = spectrum.len();
    if series_len != 2 * n {
        return Err(Error::LengthMismatch {
            expected: 2 * n,
            got: series_len,
        });
    }
    let d = spectrum.dim();
    let t_len = series_len;

    // Square roots of the spectrum at each frequency.
    let sqrts: Vec<ComplexMatrix> = spectrum
        .points()
        .iter()
        .map(|p| sqrt_pair(p).map(|sp| sp.sqrt))
        .collect::<Result<_>>()?;
    // At omega = pi a real series needs a real amplitude: use the real part
    // of the spectrum there (its imaginary part is zero for exactly real
    // processes).
    let mut re_pi = ComplexMatrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            re_pi[(i, j)] = Complex64::new(spectrum.points()[n - 1][(i, j)].re, 0.0);
        }
    }
    let re_pi_sqrt = sqrt_pair(&HpdMatrix::from_matrix(re_pi)?)?.sqrt;

    // Frequency-domain amplitudes A[m], m = 0..T-1, A[T-m] = conj(A[m]).
    let mut amps: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); d]; t_len];
    for l in 1..n {
        let z: Vec<Complex64> = (0..d).map(|_| rng.next_complex_gaussian()).collect();
        let a = mat_vec(&sqrts[l - 1], &z);
        for i in 0..d {
            amps[l][i] = a[i];
            amps[t_len - l][i] = a[i].conj();
        }
    }
    let g: Vec<Complex64> = (0..d)
        .map(|_| Complex64::new(rng.next_gaussian(), 0.0))
        .collect();
    let a_pi = mat_vec(&re_pi_sqrt, &g);
    for i in 0..d {
        amps[n][i] = a_pi[i];
    }

    // One inverse FFT per channel.
    let scale = (2.0 * std::f64::consts::PI / t_len as f64).sqrt();
    let mut data = Vec::with_capacity(d);
    for ch in 0..d {
        let mut buf: Vec<Complex64> = (0..t_len).map(|m| amps[m][ch]).collect();
        ifft(&mut buf);
        let series: Vec<f64> = buf
            .iter()
            .map(|z| {
                debug_assert!(z.im.abs() < 1e-9 * z.re.abs().max(1.0));
                z.re * scale
            })
            .collect();
        data.push(series);
    }
    TimeSeries::new(data)
}

fn mat_vec(m: &ComplexMatrix, v: &[Complex64]) -> Vec<Complex64> {
    let d = m.dim();
    (0..d)
        .map(|i| (0..d).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}

/// Integrated squared Riemannian error `(1/n) sum_l delta(est_l, truth_l)^2`.
pub fn isre(estimate: &HpdCurve, truth: &HpdCurve) -> Result<f64> {
    if estimate.len() != truth.len() || estimate.dim() != truth.dim() {
        return Err(Error::ShapeMismatch);
    }
    let mut acc = 0.0;
    for (e, t) in estimate.points().iter().zip(truth.points()) {
        acc += dist(MetricKind::Riemannian, e, t)?.powi(2);
    }
    Ok(acc / estimate.len() as f64)
}

/// Intrinsic nearest-neighbor regression: every output point is the uniform
/// Karcher mean of the `k` nearest grid neighbors, with windows shrinking
/// symmetrically at the boundaries.
pub fn nn_regression(curve: &HpdCurve, k: usize) -> Result<HpdCurve> {
    if k % 2 == 0 || k == 0 {
        return Err(Error::UnsupportedOrder(k));
    }
    let n = curve.len();
    if k > n {
        return Err(Error::OrderTooLarge {
            order: k,
            available: n,
        });
    }
    if k == 1 {
        return Ok(curve.clone());
    }
    let half = k / 2;
    let points = curve.points();
    let smoothed = par::map_indexed(points, |i, _| {
        let h = half.min(i).min(n - 1 - i);
        let window = &points[i - h..=i + h];
        let w = vec![1.0 / window.len() as f64; window.len()];
        // Heavy-tailed periodogram windows want the damped warm-started
        // solver; it computes the same uniform intrinsic mean.
        crate::manifold::karcher_mean_robust(window, &w)
    });
    HpdCurve::new(smoothed.into_iter().collect::<Result<Vec<_>>>()?)
}

/// One estimator evaluated by the benchmark harness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EstimatorSpec {
    /// Bias-corrected multitaper periodogram, no smoothing.
    RawPeriodogram,
    /// Wavelet trace-threshold estimator with the configured policy.
    Wavelet,
    /// Intrinsic nearest-neighbor regression with `k` neighbors.
    NearestNeighbor(usize),
}

impl EstimatorSpec {
    pub fn label(&self) -> String {
        match self {
            EstimatorSpec::RawPeriodogram => "raw".into(),
            EstimatorSpec::Wavelet => "wavelet".into(),
            EstimatorSpec::NearestNeighbor(k) => format!("nn:{k}"),
        }
    }
}

/// Monte-Carlo benchmark configuration.
#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub spectrum: TestSpectrumSpec,
    pub replicates: usize,
    pub seed: RngSeed,
    pub options: EstimateOptions,
    pub estimators: Vec<EstimatorSpec>,
}

#[derive(Debug, Clone)]
pub struct BenchmarkRow {
    pub replicate: usize,
    pub estimator: String,
    pub params: String,
    /// `None` records a replicate failure.
    pub isre: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct BenchmarkTable {
    pub rows: Vec<BenchmarkRow>,
}

#[derive(Debug, Clone)]
pub struct BenchmarkSummary {
    pub estimator: String,
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
}

impl BenchmarkTable {
    /// Per-estimator ISRE summaries over the successful replicates.
    pub fn summarize(&self) -> Vec<BenchmarkSummary> {
        let mut names: Vec<String> = Vec::new();
        for row in &self.rows {
            if !names.contains(&row.estimator) {
                names.push(row.estimator.clone());
            }
        }
        names
            .iter()
            .map(|name| {
                let mut values: Vec<f64> = self
                    .rows
                    .iter()
                    .filter(|r| &r.estimator == name)
                    .filter_map(|r| r.isre)
                    .collect();
                values.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let count = values.len();
                let mean = values.iter().sum::<f64>() / count.max(1) as f64;
                BenchmarkSummary {
                    estimator: name.clone(),
                    count,
                    mean,
                    median: quantile(&values, 0.5),
                    q25: quantile(&values, 0.25),
                    q75: quantile(&values, 0.75),
                }
            })
            .collect()
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// Runs the Monte-Carlo study: per replicate, synthesize a series from the
/// truth, form the bias-corrected multitaper periodogram, and score every
/// estimator by ISRE. Replicates run in parallel on split seed streams;
/// failures are recorded per row rather than aborting the study.
pub fn run_benchmark(config: &BenchmarkConfig) -> Result<BenchmarkTable> {
    if config.replicates == 0 {
        return Err(Error::EmptyInput);
    }
    let truth = make_test_spectrum(&config.spectrum)?;
    let n = truth.len();
    let series_len = 2 * n;
    let d = truth.dim();
    let opts = &config.options;
    let b = if opts.tapers == 0 { d } else { opts.tapers };
    let tapers = build_tapers(series_len, b, opts)?;
    let params = format!(
        "n={n} d={d} B={b} N={} metric={} policy={}",
        opts.order,
        opts.metric.name(),
        opts.policy.describe()
    );

    let replicate_ids: Vec<usize> = (0..config.replicates).collect();
    let per_replicate = par::map(&replicate_ids, |&r| {
        let mut rng = config.seed.stream(r as u64);
        let mut rows = Vec::with_capacity(config.estimators.len());
        let prepared: Result<(HpdCurve, HpdCurve)> = (|| {
            let ts = cramer_timeseries(&truth, series_len, &mut rng)?;
            let raw = multitaper_periodogram(&ts, &tapers)?;
            let corrected = bias_correct(&raw.curve, d, b, opts.metric)?;
            Ok((raw.curve, corrected))
        })();
        match prepared {
            Ok((_, corrected)) => {
                for est in &config.estimators {
                    let result: Result<f64> = (|| {
                        let estimate = match est {
                            EstimatorSpec::RawPeriodogram => corrected.clone(),
                            EstimatorSpec::Wavelet => {
                                crate::spectral::denoise_spectrum(&corrected, d, b, opts)?.curve
                            }
                            EstimatorSpec::NearestNeighbor(k) => nn_regression(&corrected, *k)?,
                        };
                        isre(&estimate, &truth)
                    })();
                    rows.push(BenchmarkRow {
                        replicate: r,
                        estimator: est.label(),
                        params: params.clone(),
                        isre: result.ok(),
                    });
                }
            }
            Err(_) => {
                for est in &config.estimators {
                    rows.push(BenchmarkRow {
                        replicate: r,
                        estimator: est.label(),
                        params: params.clone(),
                        isre: None,
                    });
                }
            }
        }
        rows
    });

    Ok(BenchmarkTable {
        rows: per_replicate.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::ThresholdPolicy;

    #[test]
    fn test_spectrum_is_deterministic_and_hpd() {
        let spec = TestSpectrumSpec::new(SpectrumShape::Bumps, 64, 3);
        let a = make_test_spectrum(&spec).unwrap();
        let b = make_test_spectrum(&spec).unwrap();
        assert_eq!(a.len(), 64);
        for (x, y) in a.points().iter().zip(b.points()) {
            assert_eq!(x.matrix().data(), y.matrix().data());
        }
        for p in a.points() {
            let eig = eig_hermitian(p.hermitian()).unwrap();
            assert!(eig.eigenvalues[0] >= SPECTRUM_FLOOR);
        }
    }

    #[test]
    fn smooth_spec_with_no_bumps_is_congruence_of_background() {
        let spec = TestSpectrumSpec {
            shape: SpectrumShape::Smooth,
            n: 8,
            dim: 2,
            bumps: Some(vec![]),
        };
        let curve = make_test_spectrum(&spec).unwrap();
        // Each point is c(x) times a^2 for the congruence path a = exp(S),
        // so its determinant is c(x)^d e^{2 tr S(x)}.
        let k1 = congruence_direction(2, 1);
        let k2 = congruence_direction(2, 2);
        for (l, p) in curve.points().iter().enumerate() {
            let x = (l + 1) as f64 / 8.0;
            let c = background(SpectrumShape::Smooth, x);
            let s1 = 0.20 * (2.0 * std::f64::consts::PI * x).cos();
            let s2 = 0.20 * (4.0 * std::f64::consts::PI * x).sin();
            let tr_s = s1 * k1.trace() + s2 * k2.trace();
            let expect = c * c * (2.0 * tr_s).exp();
            let eig = eig_hermitian(p.hermitian()).unwrap();
            let det: f64 = eig.eigenvalues.iter().product();
            assert!((det - expect).abs() <= 1e-10 * expect);
        }
    }

    #[test]
    fn wishart_euclidean_mean_matches_scale() {
        let mut rng = Rng64::new(101);
        let f = HpdMatrix::diag(&[1.0, 2.5]).unwrap();
        let sampler = WishartSampler::new(2, &f);
        let m = 30_000;
        let mut acc = ComplexMatrix::zeros(2);
        for _ in 0..m {
            acc = acc.add(&sampler.sample(&mut rng).matrix().scale(1.0 / m as f64));
        }
        assert!((acc[(0, 0)].re - 1.0).abs() < 0.05);
        assert!((acc[(1, 1)].re - 2.5).abs() < 0.08);
        assert!(acc[(0, 1)].norm() < 0.05);
    }

    #[test]
    fn wishart_concentrates_with_dof() {
        let mut rng = Rng64::new(102);
        let f = HpdMatrix::diag(&[1.0, 1.0]).unwrap();
        let spread = |dof: usize, rng: &mut Rng64| -> f64 {
            let sampler = WishartSampler::new(dof, &f);
            let m = 400;
            (0..m)
                .map(|_| {
                    sampler
                        .sample(rng)
                        .matrix()
                        .sub(f.matrix())
                        .frobenius_norm()
                })
                .sum::<f64>()
                / m as f64
        };
        let s8 = spread(8, &mut rng);
        let s128 = spread(128, &mut rng);
        // Frobenius spread shrinks like 1/sqrt(B): factor 4 expected.
        assert!(s8 / s128 > 2.5, "s8 {s8} s128 {s128}");
    }

    #[test]
    fn cramer_same_seed_identical() {
        let spec = TestSpectrumSpec::new(SpectrumShape::Smooth, 32, 2);
        let truth = make_test_spectrum(&spec).unwrap();
        let a = cramer_timeseries(&truth, 64, &mut RngSeed(7).stream(0)).unwrap();
        let b = cramer_timeseries(&truth, 64, &mut RngSeed(7).stream(0)).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            cramer_timeseries(&truth, 100, &mut RngSeed(7).stream(0)).unwrap_err(),
            Error::LengthMismatch {
                expected: 64,
                got: 100
            }
        );
    }

    #[test]
    fn cramer_flat_spectrum_has_unit_variance() {
        // f = Id / (2 pi) corresponds to white noise with unit variance.
        let n = 4096;
        let level = 1.0 / (2.0 * std::f64::consts::PI);
        let flat = HpdCurve::new(vec![HpdMatrix::diag(&[level]).unwrap(); n]).unwrap();
        let ts = cramer_timeseries(&flat, 2 * n, &mut RngSeed(11).stream(0)).unwrap();
        let x = ts.channel(0);
        let mean: f64 = x.iter().sum::<f64>() / x.len() as f64;
        let var: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / x.len() as f64;
        assert!((var - 1.0).abs() < 0.05, "variance {var}");
    }

    #[test]
    fn isre_cases() {
        let mut rng = Rng64::new(103);
        let curve = HpdCurve::new(
            (0..8)
                .map(|_| crate::rng::random_hpd(&mut rng, 2, 0.5))
                .collect(),
        )
        .unwrap();
        assert!(isre(&curve, &curve).unwrap() < 1e-20);

        // estimate = e * truth has squared distance d at every point.
        let scaled = HpdCurve::new(
            curve
                .points()
                .iter()
                .map(|p| HpdMatrix::new_unchecked(p.hermitian().scale(std::f64::consts::E)))
                .collect(),
        )
        .unwrap();
        let v = isre(&scaled, &curve).unwrap();
        assert!((v - 2.0).abs() < 1e-9, "got {v}");

        // Matches the direct per-point summation.
        let mut rng2 = Rng64::new(104);
        let other = HpdCurve::new(
            (0..8)
                .map(|_| crate::rng::random_hpd(&mut rng2, 2, 0.5))
                .collect(),
        )
        .unwrap();
        let direct: f64 = curve
            .points()
            .iter()
            .zip(other.points())
            .map(|(a, b)| dist(MetricKind::Riemannian, a, b).unwrap().powi(2))
            .sum::<f64>()
            / 8.0;
        assert!((isre(&curve, &other).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn nn_regression_cases() {
        let mut rng = Rng64::new(105);
        let curve = HpdCurve::new(
            (0..8)
                .map(|_| crate::rng::random_hpd(&mut rng, 2, 0.5))
                .collect(),
        )
        .unwrap();
        let same = nn_regression(&curve, 1).unwrap();
        assert_eq!(same.points()[3].matrix(), curve.points()[3].matrix());

        let c = HpdMatrix::diag(&[2.0, 3.0]).unwrap();
        let constant = HpdCurve::new(vec![c.clone(); 8]).unwrap();
        let smoothed = nn_regression(&constant, 5).unwrap();
        for p in smoothed.points() {
            assert!(p.matrix().max_abs_diff(c.matrix()) < 1e-10);
        }

        // Scalar case: geometric moving average.
        let vals = [1.0, 2.0, 4.0, 8.0];
        let scal = HpdCurve::new(
            vals.iter()
                .map(|&v| HpdMatrix::diag(&[v]).unwrap())
                .collect(),
        )
        .unwrap();
        let sm = nn_regression(&scal, 3).unwrap();
        let inner = (vals[0].ln() + vals[1].ln() + vals[2].ln()) / 3.0;
        assert!((sm.points()[1][(0, 0)].re.ln() - inner).abs() < 1e-9);
        // Boundary windows shrink to the point itself.
        assert!((sm.points()[0][(0, 0)].re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn benchmark_smoke_run() {
        let config = BenchmarkConfig {
            spectrum: TestSpectrumSpec::new(SpectrumShape::Smooth, 16, 2),
            replicates: 1,
            seed: RngSeed(5),
            options: EstimateOptions {
                tapers: 2,
                order: 3,
                metric: MetricKind::Riemannian,
                policy: ThresholdPolicy::Universal,
                ..Default::default()
            },
            estimators: vec![
                EstimatorSpec::RawPeriodogram,
                EstimatorSpec::Wavelet,
                EstimatorSpec::NearestNeighbor(3),
            ],
        };
        let table = run_benchmark(&config).unwrap();
        assert_eq!(table.rows.len(), 3);
        assert!(table.rows.iter().all(|r| r.isre.is_some()));
        let summary = table.summarize();
        assert_eq!(summary.len(), 3);

        // Replays byte-identically.
        let again = run_benchmark(&config).unwrap();
        for (a, b) in table.rows.iter().zip(&again.rows) {
            assert_eq!(a.isre, b.isre);
        }
    }
}
