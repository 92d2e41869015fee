//! Shared helpers for the integration and acceptance suites.
//!
//! Each test binary compiles its own copy, so not every helper is used by
//! every binary.
#![allow(dead_code)]

use hpdwave::linalg::HpdMatrix;
use hpdwave::manifold::{exp_map, geodesic, HpdCurve, MetricKind};
use hpdwave::rng::{random_hermitian, random_hpd, Rng64};

pub fn random_curve(rng: &mut Rng64, n: usize, d: usize, amp: f64) -> HpdCurve {
    HpdCurve::new((0..n).map(|_| random_hpd(rng, d, amp)).collect()).unwrap()
}

/// Samples of a geodesic between two random points.
pub fn geodesic_curve(rng: &mut Rng64, n: usize, d: usize, amp: f64) -> HpdCurve {
    let a = random_hpd(rng, d, amp);
    let b = random_hpd(rng, d, amp);
    HpdCurve::new(
        (0..n)
            .map(|l| geodesic(MetricKind::Riemannian, &a, &b, l as f64 / n as f64).unwrap())
            .collect(),
    )
    .unwrap()
}

/// Samples of an order-2 interpolation polynomial through three random points.
pub fn quadratic_curve(rng: &mut Rng64, n: usize, d: usize, amp: f64) -> HpdCurve {
    let pts: Vec<HpdMatrix> = (0..3).map(|_| random_hpd(rng, d, amp)).collect();
    let xs = [0.0, 0.5, 1.0];
    HpdCurve::new(
        (0..n)
            .map(|l| {
                hpdwave::wavelet::neville(&pts, &xs, l as f64 / n as f64, MetricKind::Riemannian)
                    .unwrap()
            })
            .collect(),
    )
    .unwrap()
}

/// A random locally-smooth midpoint configuration: a short geodesic segment
/// of log-length `span` with a smooth Hermitian perturbation of size `eps`,
/// the regime coarse midpoints live in at the scales where the order-N
/// window operates.
pub fn near_geodesic_config(
    rng: &mut Rng64,
    count: usize,
    d: usize,
    span: f64,
    eps: f64,
) -> Vec<HpdMatrix> {
    let a = random_hpd(rng, d, 0.5);
    let dir = random_hermitian(rng, d, 1.0);
    let dir = dir.scale(span / dir.frobenius_norm());
    let h1 = random_hermitian(rng, d, eps);
    let h2 = random_hermitian(rng, d, eps);
    (0..count)
        .map(|i| {
            let t = i as f64 / count.max(2) as f64;
            let step = dir
                .scale(t)
                .add(&h1.scale((std::f64::consts::PI * t).sin()))
                .add(&h2.scale((2.0 * std::f64::consts::PI * t).cos()));
            exp_map(&a, &step).unwrap()
        })
        .collect()
}

/// Independent scalar average-interpolation lifting transform (the d = 1
/// Euclidean oracle). Predictions come from Lagrange evaluation of
/// right-anchored cumulative averages, not from the library's code paths.
pub struct ScalarAi {
    pub root: f64,
    /// `levels[j-1][k]` is the coefficient of scale `j`, location `k`.
    pub levels: Vec<Vec<f64>>,
}

pub fn scalar_ai_forward(values: &[f64], order: usize) -> ScalarAi {
    assert!(values.len().is_power_of_two());
    let j_max = values.len().trailing_zeros() as usize;
    let mut pyramid = vec![values.to_vec()];
    for _ in 0..j_max {
        let finer = pyramid.last().unwrap();
        pyramid.push(finer.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect());
    }
    pyramid.reverse();

    let mut levels = Vec::new();
    for j in 1..=j_max {
        let coarse = &pyramid[j - 1];
        let fine = &pyramid[j];
        let mut n_eff = order.min(coarse.len());
        if n_eff % 2 == 0 {
            n_eff -= 1;
        }
        let scale = 2.0_f64.powf(-(j as f64) / 2.0);
        let mut level = Vec::with_capacity(coarse.len());
        for k in 0..coarse.len() {
            let predicted = scalar_predict_odd(coarse, k, n_eff);
            level.push(scale * (fine[2 * k + 1] - predicted));
        }
        levels.push(level);
    }
    ScalarAi {
        root: pyramid[0][0],
        levels,
    }
}

fn scalar_predict_odd(coarse: &[f64], k: usize, order: usize) -> f64 {
    if order == 1 {
        return coarse[k];
    }
    let half = (order - 1) / 2;
    let i0 = k.saturating_sub(half).min(coarse.len() - order);
    let window = &coarse[i0..i0 + order];
    let m = k - i0;
    let r = order - 1 - m;
    // Right-anchored cumulative means at integer abscissae.
    let cums: Vec<f64> = (0..order)
        .map(|i| window[i..].iter().sum::<f64>() / (order - i) as f64)
        .collect();
    let t = m as f64 + 0.5;
    let interpolated = lagrange_eval(&cums, t);
    if r == 0 {
        interpolated
    } else {
        (1.0 + 2.0 * r as f64) * interpolated - 2.0 * r as f64 * cums[m + 1]
    }
}

/// Lagrange interpolation with nodes 0, 1, ..., len-1.
fn lagrange_eval(values: &[f64], x: f64) -> f64 {
    let n = values.len();
    let mut acc = 0.0;
    for i in 0..n {
        let mut basis = 1.0;
        for j in 0..n {
            if i != j {
                basis *= (x - j as f64) / (i as f64 - j as f64);
            }
        }
        acc += values[i] * basis;
    }
    acc
}

/// Ordinary least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    cov / var
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
