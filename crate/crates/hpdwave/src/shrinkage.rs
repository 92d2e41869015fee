//! Nonlinear thresholding of wavelet coefficients.
//!
//! Entire matrix-valued coefficients are kept or killed based on the trace
//! of their whitened versions: the traces follow an additive signal plus
//! mean-zero noise model with a scale-independent closed-form variance, so
//! scalar thresholding rules apply directly. Keep/kill labels are optimized
//! by bottom-up dynamic programming over the rooted dyadic coefficient tree.

use crate::error::{Error, Result};
use crate::manifold::{self, HpdCurve, MetricKind};
use crate::par;
use crate::special::trigamma;
use crate::wavelet::{forward, inverse, RefinementWeights, WaveletDecomposition};

/// Real traces of the whitened coefficients, aligned with a decomposition:
/// `value(j, k)` for scales `j = 1..=J`.
#[derive(Debug, Clone)]
pub struct TracePyramid {
    levels: Vec<Vec<f64>>,
}

impl TracePyramid {
    pub fn from_levels(levels: Vec<Vec<f64>>) -> Self {
        TracePyramid { levels }
    }

    pub fn num_scales(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, j: usize) -> &[f64] {
        &self.levels[j - 1]
    }

    pub fn value(&self, j: usize, k: usize) -> f64 {
        self.levels[j - 1][k]
    }

    pub fn num_coefficients(&self) -> usize {
        self.levels.iter().map(|l| l.len()).sum()
    }
}

/// Traces of the whitened wavelet coefficients. Imaginary parts vanish up
/// to rounding and are discarded.
pub fn trace_pyramid(decomp: &WaveletDecomposition) -> Result<TracePyramid> {
    let white = decomp.whitened()?;
    let levels = white
        .iter()
        .map(|level| {
            level
                .iter()
                .map(|m| {
                    let tr = m.trace();
                    debug_assert!(
                        tr.im.abs() <= 1e-12 * tr.re.abs().max(1.0),
                        "whitened trace has imaginary part {}",
                        tr.im
                    );
                    tr.re
                })
                .collect()
        })
        .collect();
    Ok(TracePyramid { levels })
}

/// Parameters of the Wishart-noise trace model.
#[derive(Debug, Clone, Copy)]
pub struct NoiseModel {
    /// Matrix dimension.
    pub dim: usize,
    /// Wishart degrees of freedom (number of tapers).
    pub dof: usize,
    /// Number of wavelet scales (`n = 2^J`).
    pub num_scales: usize,
    /// Refinement order.
    pub order: usize,
}

impl NoiseModel {
    pub fn new(dim: usize, dof: usize, num_scales: usize, order: usize) -> Result<Self> {
        if dof < dim {
            return Err(Error::RankDeficient { tapers: dof, dim });
        }
        Ok(NoiseModel {
            dim,
            dof,
            num_scales,
            order,
        })
    }
}

/// Closed-form variance of the whitened-coefficient traces of an i.i.d.
/// Wishart curve: `2^{-(J+1)} (sum_l C_{N,odd}^2) (sum_i psi'(B - (d - i)))`.
///
/// The variance is the same at every scale and location.
pub fn noise_variance(model: &NoiseModel) -> Result<f64> {
    let table =
        RefinementWeights::interior(model.order).ok_or(Error::UnsupportedOrder(model.order))?;
    let weight_sq: f64 = table.odd_row().iter().map(|w| w * w).sum();
    let tri: f64 = (1..=model.dim)
        .map(|i| trigamma((model.dof - (model.dim - i)) as f64))
        .sum();
    Ok(2.0_f64.powi(-(model.num_scales as i32 + 1)) * weight_sq * tri)
}

/// Universal threshold `sigma sqrt(2 log N)` for `N` coefficients.
pub fn universal_threshold(sigma_w: f64, n_coeffs: usize) -> f64 {
    sigma_w * (2.0 * (n_coeffs as f64).ln()).sqrt()
}

/// Robust noise-scale estimate from the finest-scale traces: MAD / 0.6745.
pub fn mad_sigma(traces: &TracePyramid) -> f64 {
    let finest = traces.level(traces.num_scales());
    let mut abs: Vec<f64> = finest.iter().map(|v| v.abs()).collect();
    abs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if abs.is_empty() {
        0.0
    } else if abs.len() % 2 == 1 {
        abs[abs.len() / 2]
    } else {
        0.5 * (abs[abs.len() / 2 - 1] + abs[abs.len() / 2])
    };
    median / 0.6745
}

/// Binary keep/kill labels on the dyadic coefficient tree. Kept labels form
/// a rooted tree: a child can only be kept if its parent is kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelTree {
    levels: Vec<Vec<bool>>,
}

impl LabelTree {
    pub fn from_levels(levels: Vec<Vec<bool>>) -> Self {
        LabelTree { levels }
    }

    pub fn all_ones(num_scales: usize) -> Self {
        LabelTree {
            levels: (1..=num_scales).map(|j| vec![true; 1 << (j - 1)]).collect(),
        }
    }

    pub fn num_scales(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, j: usize) -> &[bool] {
        &self.levels[j - 1]
    }

    pub fn keep(&self, j: usize, k: usize) -> bool {
        self.levels[j - 1][k]
    }

    pub fn kept_count(&self) -> usize {
        self.levels
            .iter()
            .map(|l| l.iter().filter(|&&b| b).count())
            .sum()
    }

    /// Checks the rooted-tree constraint structurally.
    pub fn is_rooted_tree(&self) -> bool {
        for j in 2..=self.num_scales() {
            for (k, &kept) in self.level(j).iter().enumerate() {
                if kept && !self.keep(j - 1, k / 2) {
                    return false;
                }
            }
        }
        true
    }
}

/// Minimizes `||d x - d||^2 + lambda^2 ||x||_0` over rooted-tree labelings
/// by bottom-up dynamic programming. Ties (zero gain) resolve to kill.
pub fn cpress_prune(traces: &TracePyramid, lambda: f64) -> LabelTree {
    let j_max = traces.num_scales();
    // gain[j-1][k] = max(0, d^2 - lambda^2 + children gains).
    let mut gain: Vec<Vec<f64>> = (1..=j_max)
        .map(|j| vec![0.0; traces.level(j).len()])
        .collect();
    for j in (1..=j_max).rev() {
        for k in 0..traces.level(j).len() {
            let mut g = traces.value(j, k).powi(2) - lambda * lambda;
            if j < j_max {
                g += gain[j][2 * k] + gain[j][2 * k + 1];
            }
            gain[j - 1][k] = g.max(0.0);
        }
    }
    let mut levels: Vec<Vec<bool>> = (1..=j_max)
        .map(|j| vec![false; traces.level(j).len()])
        .collect();
    for j in 1..=j_max {
        for k in 0..levels[j - 1].len() {
            let parent_kept = j == 1 || levels[j - 2][k / 2];
            levels[j - 1][k] = parent_kept && gain[j - 1][k] > 0.0;
        }
    }
    let tree = LabelTree { levels };
    debug_assert!(tree.is_rooted_tree());
    tree
}

/// CPRESS objective value of a labeling.
pub fn cpress_objective(traces: &TracePyramid, labels: &LabelTree, lambda: f64) -> f64 {
    let mut obj = 0.0;
    for j in 1..=traces.num_scales() {
        for (k, &d) in traces.level(j).iter().enumerate() {
            if labels.keep(j, k) {
                obj += lambda * lambda;
            } else {
                obj += d * d;
            }
        }
    }
    obj
}

/// Zeroes the coefficients whose label is 0; base points and kept
/// coefficients are untouched.
pub fn apply_labels(
    decomp: &WaveletDecomposition,
    labels: &LabelTree,
) -> Result<WaveletDecomposition> {
    if labels.num_scales() != decomp.num_scales() {
        return Err(Error::ShapeMismatch);
    }
    for j in 1..=decomp.num_scales() {
        if labels.level(j).len() != decomp.level(j).len() {
            return Err(Error::ShapeMismatch);
        }
    }
    let mut out = decomp.clone();
    for j in 1..=decomp.num_scales() {
        for k in 0..decomp.level(j).len() {
            if !labels.keep(j, k) {
                out.zero_coeff(j, k);
            }
        }
    }
    Ok(out)
}

/// How the universal-threshold noise scale is obtained.
#[derive(Debug, Clone, Copy)]
pub enum SigmaSpec {
    /// Closed-form Wishart variance.
    ClosedForm(NoiseModel),
    /// Median absolute deviation of the finest-scale traces.
    Mad,
}

/// Thresholding policy of the denoising step.
#[derive(Debug, Clone)]
pub enum Policy {
    Universal(SigmaSpec),
    Cpress(f64),
    CrossValidation(Vec<f64>),
}

/// A denoised curve along with the thresholding diagnostics.
#[derive(Debug, Clone)]
pub struct Denoised {
    pub curve: HpdCurve,
    pub lambda: f64,
    pub traces: TracePyramid,
    pub labels: LabelTree,
}

/// Forward transform, trace thresholding, inverse transform.
pub fn denoise_curve(
    curve: &HpdCurve,
    order: usize,
    metric: MetricKind,
    policy: &Policy,
) -> Result<Denoised> {
    let decomp = forward(curve, order, metric)?;
    let traces = trace_pyramid(&decomp)?;
    let lambda = match policy {
        Policy::Universal(sigma) => {
            let s = match sigma {
                SigmaSpec::ClosedForm(model) => noise_variance(model)?.sqrt(),
                SigmaSpec::Mad => mad_sigma(&traces),
            };
            universal_threshold(s, traces.num_coefficients())
        }
        Policy::Cpress(lambda) => *lambda,
        Policy::CrossValidation(grid) => cv_select_lambda(curve, order, metric, grid)?,
    };
    let labels = cpress_prune(&traces, lambda);
    let thresholded = apply_labels(&decomp, &labels)?;
    let out = inverse(&thresholded)?;
    Ok(Denoised {
        curve: out,
        lambda,
        traces,
        labels,
    })
}

/// Two-fold cross-validation over a penalty grid.
///
/// The curve splits into its even- and odd-indexed subsequences; each half
/// is denoised at every grid value and scored by the squared Riemannian
/// distance between its geodesic-midpoint interpolation and the held-out
/// points. Ties resolve to the smaller penalty.
pub fn cv_select_lambda(
    curve: &HpdCurve,
    order: usize,
    metric: MetricKind,
    grid: &[f64],
) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = curve.len();
    if n < 8 {
        return Err(Error::NotDyadic(n));
    }
    curve.require_dyadic()?;

    let points = curve.points();
    let evens: Vec<_> = points.iter().step_by(2).cloned().collect();
    let odds: Vec<_> = points.iter().skip(1).step_by(2).cloned().collect();
    let even_curve = HpdCurve::new(evens)?;
    let odd_curve = HpdCurve::new(odds)?;

    let even_dec = forward(&even_curve, order, metric)?;
    let odd_dec = forward(&odd_curve, order, metric)?;
    let even_traces = trace_pyramid(&even_dec)?;
    let odd_traces = trace_pyramid(&odd_dec)?;

    let scores = par::map(grid, |&lambda| -> Result<f64> {
        let mut score = 0.0;
        for (dec, traces, held_out, from_even) in [
            (&even_dec, &even_traces, &odd_curve, true),
            (&odd_dec, &odd_traces, &even_curve, false),
        ] {
            let labels = cpress_prune(traces, lambda);
            let est = inverse(&apply_labels(dec, &labels)?)?;
            let est_pts = est.points();
            let m = est_pts.len();
            for (i, target) in held_out.points().iter().enumerate() {
                // Even-half estimates sit at positions 0,2,..; odd-half at
                // 1,3,... Interpolate at the held-out grid position.
                let interp = if from_even {
                    if i + 1 < m {
                        manifold::midpoint(metric, &est_pts[i], &est_pts[i + 1])?
                    } else {
                        est_pts[m - 1].clone()
                    }
                } else if i == 0 {
                    est_pts[0].clone()
                } else {
                    manifold::midpoint(metric, &est_pts[i - 1], &est_pts[i])?
                };
                score += manifold::dist(MetricKind::Riemannian, &interp, target)?.powi(2);
            }
        }
        Ok(score)
    });

    let mut best = (f64::INFINITY, grid[0]);
    for (lambda, score) in grid.iter().zip(scores) {
        let s = score?;
        if s < best.0 {
            best = (s, *lambda);
        }
    }
    Ok(best.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::HpdMatrix;
    use crate::rng::{random_hpd, Rng64};
    use std::f64::consts::PI;

    fn random_traces(rng: &mut Rng64, num_scales: usize, amp: f64) -> TracePyramid {
        TracePyramid::from_levels(
            (1..=num_scales)
                .map(|j| {
                    (0..1usize << (j - 1))
                        .map(|_| amp * rng.next_gaussian())
                        .collect()
                })
                .collect(),
        )
    }

    /// Exhaustive minimum of the CPRESS objective over all rooted-tree
    /// labelings (test oracle).
    fn brute_force_cpress(traces: &TracePyramid, lambda: f64) -> f64 {
        let j_max = traces.num_scales();
        let mut flat = Vec::new();
        for j in 1..=j_max {
            for k in 0..traces.level(j).len() {
                flat.push((j, k));
            }
        }
        let total = flat.len();
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << total) {
            let keep = |j: usize, k: usize| -> bool {
                let idx = flat
                    .iter()
                    .position(|&(jj, kk)| jj == j && kk == k)
                    .unwrap();
                mask >> idx & 1 == 1
            };
            let mut valid = true;
            'outer: for j in 2..=j_max {
                for k in 0..traces.level(j).len() {
                    if keep(j, k) && !keep(j - 1, k / 2) {
                        valid = false;
                        break 'outer;
                    }
                }
            }
            if !valid {
                continue;
            }
            let mut obj = 0.0;
            for &(j, k) in &flat {
                if keep(j, k) {
                    obj += lambda * lambda;
                } else {
                    obj += traces.value(j, k).powi(2);
                }
            }
            best = best.min(obj);
        }
        best
    }

    #[test]
    fn noise_variance_haar_scalar() {
        // d = 1, B = 1, N = 1: variance is 2^{-(J+1)} psi'(1).
        let model = NoiseModel::new(1, 1, 6, 1).unwrap();
        let v = noise_variance(&model).unwrap();
        let expect = 2.0_f64.powi(-7) * PI * PI / 6.0;
        assert!((v - expect).abs() < 1e-14);
    }

    #[test]
    fn noise_variance_d2() {
        let model = NoiseModel::new(2, 2, 10, 1).unwrap();
        let v = noise_variance(&model).unwrap();
        let expect = 2.0_f64.powi(-11) * (trigamma(1.0) + trigamma(2.0));
        assert!((v - expect).abs() < 1e-15);
    }

    #[test]
    fn noise_model_requires_enough_dof() {
        assert!(NoiseModel::new(3, 2, 5, 1).is_err());
        assert_eq!(
            noise_variance(&NoiseModel::new(2, 2, 5, 9).unwrap()).unwrap_err(),
            Error::UnsupportedOrder(9)
        );
    }

    #[test]
    fn universal_threshold_values() {
        assert_eq!(universal_threshold(1.0, 1), 0.0);
        let e2 = (std::f64::consts::E * std::f64::consts::E).round() as usize;
        // N = e^2 is not integral; check the closed form directly instead.
        let lam = universal_threshold(1.0, e2);
        assert!((lam - (2.0 * (e2 as f64).ln()).sqrt()).abs() < 1e-12);
        let lam3 = universal_threshold(2.0, 100);
        assert!((lam3 - 2.0 * (2.0 * 100.0_f64.ln()).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn cpress_lambda_zero_keeps_everything() {
        let mut rng = Rng64::new(61);
        let traces = random_traces(&mut rng, 4, 1.0);
        let labels = cpress_prune(&traces, 0.0);
        // All coefficients with nonzero trace are kept.
        assert_eq!(labels.kept_count(), traces.num_coefficients());
    }

    #[test]
    fn cpress_huge_lambda_kills_everything() {
        let mut rng = Rng64::new(62);
        let traces = random_traces(&mut rng, 4, 1.0);
        let labels = cpress_prune(&traces, 1e6);
        assert_eq!(labels.kept_count(), 0);
    }

    #[test]
    fn cpress_matches_brute_force() {
        let mut rng = Rng64::new(63);
        for _ in 0..60 {
            let traces = random_traces(&mut rng, 3, 1.5);
            for lambda in [0.3, 1.0, 2.5] {
                let labels = cpress_prune(&traces, lambda);
                assert!(labels.is_rooted_tree());
                let dp_obj = cpress_objective(&traces, &labels, lambda);
                let best = brute_force_cpress(&traces, lambda);
                assert!(
                    (dp_obj - best).abs() < 1e-12,
                    "dp {dp_obj} vs brute {best} at lambda {lambda}"
                );
            }
        }
    }

    #[test]
    fn cpress_nested_in_lambda() {
        let mut rng = Rng64::new(64);
        let traces = random_traces(&mut rng, 5, 1.0);
        let grid = [0.0, 0.2, 0.5, 1.0, 2.0, 4.0];
        let mut prev: Option<LabelTree> = None;
        let mut prev_obj = -1.0;
        for &lambda in &grid {
            let labels = cpress_prune(&traces, lambda);
            let obj = cpress_objective(&traces, &labels, lambda);
            assert!(obj >= prev_obj - 1e-12, "objective not monotone");
            prev_obj = obj;
            if let Some(p) = &prev {
                for j in 1..=labels.num_scales() {
                    for k in 0..labels.level(j).len() {
                        // Kept set shrinks as lambda grows.
                        if labels.keep(j, k) {
                            assert!(p.keep(j, k));
                        }
                    }
                }
            }
            prev = Some(labels);
        }
    }

    #[test]
    fn apply_labels_identity_and_zero() {
        let mut rng = Rng64::new(65);
        let curve =
            crate::manifold::HpdCurve::new((0..8).map(|_| random_hpd(&mut rng, 2, 0.5)).collect())
                .unwrap();
        let dec = forward(&curve, 3, MetricKind::Riemannian).unwrap();

        let ones = LabelTree::all_ones(dec.num_scales());
        let same = apply_labels(&dec, &ones).unwrap();
        for j in 1..=dec.num_scales() {
            for k in 0..dec.level(j).len() {
                assert_eq!(
                    same.level(j)[k].delta.data(),
                    dec.level(j)[k].delta.data(),
                    "kept coefficients must be bit-identical"
                );
            }
        }

        let zeros = LabelTree::from_levels(
            (1..=dec.num_scales())
                .map(|j| vec![false; 1 << (j - 1)])
                .collect(),
        );
        let killed = apply_labels(&dec, &zeros).unwrap();
        for j in 1..=dec.num_scales() {
            for k in 0..killed.level(j).len() {
                assert_eq!(killed.level(j)[k].delta.frobenius_norm(), 0.0);
            }
        }
        assert_eq!(killed.root().matrix(), dec.root().matrix());
    }

    #[test]
    fn single_kept_coefficient_has_local_support() {
        // Keep only the coefficient at (J, 0): the reconstruction differs
        // from the all-killed reconstruction only where its dyadic support
        // lies (plus Haar has support on exactly the first pair).
        let mut rng = Rng64::new(66);
        let curve =
            crate::manifold::HpdCurve::new((0..8).map(|_| random_hpd(&mut rng, 2, 0.5)).collect())
                .unwrap();
        let dec = forward(&curve, 1, MetricKind::Riemannian).unwrap();
        let mut levels: Vec<Vec<bool>> = (1..=dec.num_scales())
            .map(|j| vec![false; 1 << (j - 1)])
            .collect();
        levels[2][0] = true; // finest scale, location 0: affects points 0 and 1
                             // Rooted-tree constraint needs the ancestors kept too.
        levels[1][0] = true;
        levels[0][0] = true;
        let tree = LabelTree::from_levels(levels);
        assert!(tree.is_rooted_tree());

        let with = inverse(&apply_labels(&dec, &tree).unwrap()).unwrap();
        let mut only_ancestors = tree.clone();
        only_ancestors.levels[2][0] = false;
        let without = inverse(&apply_labels(&dec, &only_ancestors).unwrap()).unwrap();
        // Haar: zeroing (3, 0) changes only points 0 and 1.
        for i in 0..8 {
            let d = crate::manifold::dist(
                MetricKind::Riemannian,
                &with.points()[i],
                &without.points()[i],
            )
            .unwrap();
            if i < 2 {
                assert!(d > 1e-6, "point {i} should move");
            } else {
                assert!(d < 1e-10, "point {i} should not move, got {d}");
            }
        }
    }

    #[test]
    fn mad_sigma_of_constant_traces() {
        let traces = TracePyramid::from_levels(vec![vec![0.6745], vec![0.6745, -0.6745]]);
        assert!((mad_sigma(&traces) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cv_noiseless_smooth_prefers_smallest_lambda() {
        // A geodesic curve is exactly representable: killing anything hurts.
        let a = HpdMatrix::diag(&[1.0, 2.0]).unwrap();
        let b = HpdMatrix::diag(&[3.0, 1.0]).unwrap();
        let n = 16;
        let pts: Vec<HpdMatrix> = (0..n)
            .map(|l| {
                manifold::geodesic(MetricKind::Riemannian, &a, &b, l as f64 / n as f64).unwrap()
            })
            .collect();
        let curve = HpdCurve::new(pts).unwrap();
        let grid = [0.01, 0.1, 1.0];
        let lam = cv_select_lambda(&curve, 3, MetricKind::Riemannian, &grid).unwrap();
        assert_eq!(lam, 0.01);
    }
}
