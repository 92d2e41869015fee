//! Riemannian geometry of the HPD cone: metrics, distances, geodesics,
//! Exp/Log maps, transports, and intrinsic (Karcher) means.
//!
//! The Riemannian metric is the affine-invariant one; Log-Euclidean,
//! Cholesky and Euclidean variants act through their image spaces
//! (matrix logarithm, Cholesky factor, raw entries).

use crate::error::{Error, Result};
use crate::linalg::{
    cholesky_lower, congruence_raw, matrix_exp, matrix_inverse, matrix_log, matrix_power,
    sqrt_pair, ComplexMatrix, HermitianMatrix, HpdMatrix,
};

/// Convergence tolerance of the Karcher fixed-point iteration.
pub const TOL_MEAN: f64 = 1e-10;
const MAX_MEAN_ITER: usize = 100;

/// The metric the HPD cone is equipped with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    /// Affine-invariant Riemannian metric.
    Riemannian,
    /// Euclidean metric on matrix logarithms.
    LogEuclidean,
    /// Euclidean metric on lower Cholesky factors.
    Cholesky,
    /// Flat Frobenius metric on the entries.
    Euclidean,
}

impl MetricKind {
    pub const ALL: [MetricKind; 4] = [
        MetricKind::Riemannian,
        MetricKind::LogEuclidean,
        MetricKind::Cholesky,
        MetricKind::Euclidean,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Riemannian => "riemannian",
            MetricKind::LogEuclidean => "log-euclidean",
            MetricKind::Cholesky => "cholesky",
            MetricKind::Euclidean => "euclidean",
        }
    }

    pub fn parse(s: &str) -> Option<MetricKind> {
        match s {
            "riemannian" => Some(MetricKind::Riemannian),
            "log-euclidean" | "logeuclidean" | "log_euclidean" => Some(MetricKind::LogEuclidean),
            "cholesky" => Some(MetricKind::Cholesky),
            "euclidean" => Some(MetricKind::Euclidean),
            _ => None,
        }
    }
}

/// Tangent vector anchored at a base point.
#[derive(Debug, Clone)]
pub struct TangentVector {
    pub base: HpdMatrix,
    pub vector: HermitianMatrix,
}

impl TangentVector {
    pub fn new(base: HpdMatrix, vector: HermitianMatrix) -> Result<Self> {
        if base.dim() != vector.dim() {
            return Err(Error::DimMismatch {
                expected: base.dim(),
                got: vector.dim(),
            });
        }
        Ok(TangentVector { base, vector })
    }

    /// Norm induced by the Riemannian metric at the base point.
    pub fn norm(&self) -> Result<f64> {
        metric_norm(&self.base, &self.vector)
    }
}

/// Discretized curve of HPD matrices on the equispaced grid `x_l = l/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct HpdCurve {
    points: Vec<HpdMatrix>,
}

impl HpdCurve {
    pub fn new(points: Vec<HpdMatrix>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput);
        }
        let d = points[0].dim();
        if points.iter().any(|p| p.dim() != d) {
            return Err(Error::ShapeMismatch);
        }
        Ok(HpdCurve { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn points(&self) -> &[HpdMatrix] {
        &self.points
    }

    pub fn into_points(self) -> Vec<HpdMatrix> {
        self.points
    }

    pub fn require_dyadic(&self) -> Result<u32> {
        let n = self.len();
        if n.is_power_of_two() {
            Ok(n.trailing_zeros())
        } else {
            Err(Error::NotDyadic(n))
        }
    }

    /// Longest dyadic prefix of the curve.
    pub fn truncate_dyadic(&self) -> HpdCurve {
        let n = self.len();
        let m = if n.is_power_of_two() {
            n
        } else {
            n.next_power_of_two() / 2
        };
        HpdCurve {
            points: self.points[..m].to_vec(),
        }
    }

    /// Largest pointwise Riemannian distance to another curve.
    pub fn max_distance(&self, other: &HpdCurve) -> Result<f64> {
        if self.len() != other.len() || self.dim() != other.dim() {
            return Err(Error::ShapeMismatch);
        }
        let mut worst = 0.0_f64;
        for (a, b) in self.points.iter().zip(other.points()) {
            worst = worst.max(dist(MetricKind::Riemannian, a, b)?);
        }
        Ok(worst)
    }
}

fn check_dims(p1: &HpdMatrix, p2: &HpdMatrix) -> Result<()> {
    if p1.dim() != p2.dim() {
        return Err(Error::DimMismatch {
            expected: p1.dim(),
            got: p2.dim(),
        });
    }
    Ok(())
}

/// Distance between two HPD matrices under the chosen metric.
pub fn dist(metric: MetricKind, p1: &HpdMatrix, p2: &HpdMatrix) -> Result<f64> {
    check_dims(p1, p2)?;
    match metric {
        MetricKind::Riemannian => {
            let sp = sqrt_pair(p1)?;
            let inner = congruence_raw(&sp.inv_sqrt, p2.matrix());
            Ok(matrix_log(&inner)?.frobenius_norm())
        }
        MetricKind::LogEuclidean => {
            let a = matrix_log(p1.hermitian())?;
            let b = matrix_log(p2.hermitian())?;
            Ok(a.sub(&b).frobenius_norm())
        }
        MetricKind::Cholesky => {
            let a = cholesky_lower(p1)?;
            let b = cholesky_lower(p2)?;
            Ok(a.sub(&b).frobenius_norm())
        }
        MetricKind::Euclidean => Ok(p1.matrix().sub(p2.matrix()).frobenius_norm()),
    }
}

/// Point at parameter `t` on the geodesic from `p1` (t=0) to `p2` (t=1).
/// Extends beyond `[0, 1]`; the Euclidean metric errors with `NotPd` when
/// extrapolation leaves the cone.
pub fn geodesic(metric: MetricKind, p1: &HpdMatrix, p2: &HpdMatrix, t: f64) -> Result<HpdMatrix> {
    check_dims(p1, p2)?;
    match metric {
        MetricKind::Riemannian => {
            let sp = sqrt_pair(p1)?;
            let inner = congruence_raw(&sp.inv_sqrt, p2.matrix());
            let powered = matrix_power(&inner, t)?;
            Ok(HpdMatrix::new_unchecked(congruence_raw(
                &sp.sqrt,
                powered.matrix(),
            )))
        }
        MetricKind::LogEuclidean => {
            let a = matrix_log(p1.hermitian())?;
            let b = matrix_log(p2.hermitian())?;
            let mix = a.scale(1.0 - t).add(&b.scale(t));
            Ok(HpdMatrix::new_unchecked(matrix_exp(&mix)?))
        }
        MetricKind::Cholesky => {
            let a = cholesky_lower(p1)?;
            let b = cholesky_lower(p2)?;
            let mix = a.scale(1.0 - t).add(&b.scale(t));
            hpd_from_cholesky_image(&mix)
        }
        MetricKind::Euclidean => {
            let mix = p1.matrix().scale(1.0 - t).add(&p2.matrix().scale(t));
            HpdMatrix::from_matrix(mix)
        }
    }
}

/// Geodesic midpoint; the intrinsic mean of two points.
pub fn midpoint(metric: MetricKind, p1: &HpdMatrix, p2: &HpdMatrix) -> Result<HpdMatrix> {
    geodesic(metric, p1, p2, 0.5)
}

/// Maps a lower-triangular image back to the cone (`L L^*`), rejecting
/// factors that have become singular.
pub(crate) fn hpd_from_cholesky_image(l: &ComplexMatrix) -> Result<HpdMatrix> {
    let d = l.dim();
    for i in 0..d {
        if l[(i, i)].norm() < 1e-300 {
            return Err(Error::NotPd);
        }
    }
    Ok(HpdMatrix::new_unchecked(HermitianMatrix::symmetrize(
        l.mul(&l.adjoint()),
    )))
}

/// Riemannian exponential map `Exp_p(h)`.
pub fn exp_map(p: &HpdMatrix, h: &HermitianMatrix) -> Result<HpdMatrix> {
    if p.dim() != h.dim() {
        return Err(Error::DimMismatch {
            expected: p.dim(),
            got: h.dim(),
        });
    }
    let sp = sqrt_pair(p)?;
    let inner = congruence_raw(&sp.inv_sqrt, h.matrix());
    let e = matrix_exp(&inner)?;
    Ok(HpdMatrix::new_unchecked(congruence_raw(
        &sp.sqrt,
        e.matrix(),
    )))
}

/// Riemannian logarithmic map `Log_p(q)`.
pub fn log_map(p: &HpdMatrix, q: &HpdMatrix) -> Result<HermitianMatrix> {
    check_dims(p, q)?;
    let sp = sqrt_pair(p)?;
    let inner = congruence_raw(&sp.inv_sqrt, q.matrix());
    let l = matrix_log(&inner)?;
    Ok(congruence_raw(&sp.sqrt, l.matrix()))
}

/// Riemannian inner product of two tangent vectors at `p`.
pub fn metric_inner(p: &HpdMatrix, h1: &HermitianMatrix, h2: &HermitianMatrix) -> Result<f64> {
    let sp = sqrt_pair(p)?;
    let a = congruence_raw(&sp.inv_sqrt, h1.matrix());
    let b = congruence_raw(&sp.inv_sqrt, h2.matrix());
    Ok(a.matrix().frobenius_inner(b.matrix()).re)
}

/// Riemannian norm of a tangent vector at `p`.
pub fn metric_norm(p: &HpdMatrix, h: &HermitianMatrix) -> Result<f64> {
    let sp = sqrt_pair(p)?;
    Ok(congruence_raw(&sp.inv_sqrt, h.matrix()).frobenius_norm())
}

/// Transports `w` from the tangent space at `p` to the tangent space at the
/// identity along the connecting geodesic: `p^{-1/2} * w * p^{-1/2}`.
pub fn whitening_transport(p: &HpdMatrix, w: &HermitianMatrix) -> Result<HermitianMatrix> {
    if p.dim() != w.dim() {
        return Err(Error::DimMismatch {
            expected: p.dim(),
            got: w.dim(),
        });
    }
    let sp = sqrt_pair(p)?;
    Ok(congruence_raw(&sp.inv_sqrt, w.matrix()))
}

/// Parallel transport of `w` from `p` along the geodesic with initial
/// velocity `v` (for unit time): `g^* w g` with `g = Exp_p(v/2) p^{-1}`.
pub fn geodesic_parallel_transport(
    p: &HpdMatrix,
    v: &HermitianMatrix,
    w: &HermitianMatrix,
) -> Result<HermitianMatrix> {
    if p.dim() != v.dim() || p.dim() != w.dim() {
        return Err(Error::DimMismatch {
            expected: p.dim(),
            got: v.dim().max(w.dim()),
        });
    }
    let half = exp_map(p, &v.scale(0.5))?;
    let p_inv = matrix_inverse(p.hermitian())?;
    // g = Exp_p(v/2) p^{-1}; the transported vector is g w g^*.
    let g = half.matrix().mul(p_inv.matrix());
    Ok(congruence_raw(&g.adjoint(), w.matrix()))
}

/// Weighted intrinsic (Karcher) mean under the Riemannian metric.
///
/// Weights are normalized internally; negative weights are allowed (they
/// arise in the refinement-prediction fixed points). Fixed-point iteration
/// `mu <- Exp_mu(theta sum w_i Log_mu(x_i))` with step 1 for nonnegative
/// weights and a damped, halving step when any weight is negative.
pub fn karcher_mean(points: &[HpdMatrix], weights: &[f64]) -> Result<HpdMatrix> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    if points.len() != weights.len() {
        return Err(Error::ShapeMismatch);
    }
    let d = points[0].dim();
    if points.iter().any(|p| p.dim() != d) {
        return Err(Error::ShapeMismatch);
    }
    let wsum: f64 = weights.iter().sum();
    if !wsum.is_finite() || wsum == 0.0 || weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::BadWeights);
    }
    let normalized: Vec<f64> = weights.iter().map(|w| w / wsum).collect();

    // Start at the point carrying the largest absolute weight.
    let start = normalized
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let mut mu = points[start].clone();

    let has_negative = normalized.iter().any(|&w| w < 0.0);
    let mut theta: f64 = if has_negative { 0.5 } else { 1.0 };
    let mut prev_grad = f64::INFINITY;
    // Tolerance is relative to the data scale; the eigensolver noise floor
    // of the gradient grows with the matrix norms.
    let scale = points
        .iter()
        .map(|p| p.hermitian().frobenius_norm())
        .fold(0.0_f64, f64::max);
    let tol = TOL_MEAN * scale.max(1.0);

    for _ in 0..MAX_MEAN_ITER {
        let sp = sqrt_pair(&mu)?;

        // Gradient in whitened coordinates; one congruence maps it back.
        let mut inner_sum = HermitianMatrix::zeros(d);
        for (x, &w) in points.iter().zip(&normalized) {
            if w == 0.0 {
                continue;
            }
            let y = congruence_raw(&sp.inv_sqrt, x.matrix());
            let log_y = matrix_log(&y)?;
            inner_sum = inner_sum.add(&log_y.scale(w));
        }
        let grad_norm = congruence_raw(&sp.sqrt, inner_sum.matrix()).frobenius_norm();
        if grad_norm <= tol {
            return Ok(mu);
        }
        if has_negative && grad_norm >= prev_grad {
            theta = (theta * 0.5).max(1e-3);
        }
        prev_grad = grad_norm;
        let step = matrix_exp(&inner_sum.scale(theta))?;
        mu = HpdMatrix::new_unchecked(congruence_raw(&sp.sqrt, step.matrix()));
    }
    Err(Error::NonConvergence("Karcher mean"))
}

/// Weighted intrinsic mean tuned for the transform's prediction step: warm
/// starts at the log-Euclidean weighted mean (the exact answer for commuting
/// inputs), iterates with a damped step, and always returns its final
/// iterate. Unlike [`karcher_mean`] it cannot fail on hard inputs, so the
/// forward and backward transforms evaluate the identical deterministic
/// function of the coarse midpoints.
pub(crate) fn karcher_mean_robust(points: &[HpdMatrix], weights: &[f64]) -> Result<HpdMatrix> {
    let d = points[0].dim();
    let wsum: f64 = weights.iter().sum();
    let normalized: Vec<f64> = weights.iter().map(|w| w / wsum).collect();

    // Log-Euclidean warm start.
    let mut log_mix = HermitianMatrix::zeros(d);
    let mut scale = 0.0_f64;
    for (x, &w) in points.iter().zip(&normalized) {
        let l = matrix_log(x.hermitian())?;
        scale = scale.max(x.hermitian().frobenius_norm());
        log_mix = log_mix.add(&l.scale(w));
    }
    let mut mu = HpdMatrix::new_unchecked(matrix_exp(&log_mix)?);

    // Backtracking fixed-point descent: a step is only accepted when it
    // shrinks the gradient norm, so rough windows cannot run away. The warm
    // start already matches the fixed point up to curvature terms, making a
    // full first step the common case for mild signed rows.
    let total_variation: f64 = normalized.iter().map(|w| w.abs()).sum();
    let mut theta: f64 = if total_variation <= 1.6 { 1.0 } else { 0.5 };
    let tol = 1e-13 * scale.max(1.0);

    let gradient = |mu: &HpdMatrix| -> Result<(crate::linalg::SqrtPair, HermitianMatrix, f64)> {
        let sp = sqrt_pair(mu)?;
        let mut inner_sum = HermitianMatrix::zeros(d);
        for (x, &w) in points.iter().zip(&normalized) {
            if w == 0.0 {
                continue;
            }
            let y = congruence_raw(&sp.inv_sqrt, x.matrix());
            inner_sum = inner_sum.add(&matrix_log(&y)?.scale(w));
        }
        let norm = congruence_raw(&sp.sqrt, inner_sum.matrix()).frobenius_norm();
        Ok((sp, inner_sum, norm))
    };

    let (mut sp, mut inner, mut grad) = gradient(&mu)?;
    'outer: for _ in 0..250 {
        if grad <= tol {
            break;
        }
        loop {
            let step = matrix_exp(&inner.scale(theta))?;
            let candidate = HpdMatrix::new_unchecked(congruence_raw(&sp.sqrt, step.matrix()));
            let (sp_c, inner_c, grad_c) = gradient(&candidate)?;
            if grad_c < grad {
                mu = candidate;
                sp = sp_c;
                inner = inner_c;
                grad = grad_c;
                break;
            }
            theta *= 0.5;
            if theta < 1.0 / 1024.0 {
                // Gradient stalled at its noise floor; keep the best point.
                break 'outer;
            }
        }
    }
    Ok(mu)
}

/// Recursive midpoint mean of a dyadic-length sample: pairwise geodesic
/// midpoints cascaded down to a single point.
pub fn midpoint_mean(points: &[HpdMatrix]) -> Result<HpdMatrix> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !points.len().is_power_of_two() {
        return Err(Error::NotDyadic(points.len()));
    }
    let mut level = points.to_vec();
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len() / 2);
        for pair in level.chunks(2) {
            next.push(midpoint(MetricKind::Riemannian, &pair[0], &pair[1])?);
        }
        level = next;
    }
    Ok(level.pop().unwrap())
}
