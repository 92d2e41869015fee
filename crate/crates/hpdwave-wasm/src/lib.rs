//! Browser demo: simulate a multivariate time series from an analytic HPD
//! spectrum, form the bias-corrected multitaper periodogram, and explore
//! wavelet trace thresholding interactively.

use wasm_bindgen::prelude::*;

use hpdwave::manifold::{HpdCurve, MetricKind};
use hpdwave::shrinkage::{apply_labels, cpress_prune, trace_pyramid, LabelTree, NoiseModel};
use hpdwave::simulate::{
    cramer_timeseries, isre, make_test_spectrum, SpectrumShape, TestSpectrumSpec,
};
use hpdwave::spectral::{bias_correct, build_tapers, multitaper_periodogram, EstimateOptions};
use hpdwave::wavelet::{forward, inverse, WaveletDecomposition};
use hpdwave::RngSeed;

/// One simulated dataset with its wavelet decomposition, ready for
/// interactive re-thresholding.
#[wasm_bindgen]
pub struct DemoSession {
    truth: HpdCurve,
    periodogram: HpdCurve,
    decomposition: WaveletDecomposition,
    traces: hpdwave::shrinkage::TracePyramid,
    universal: f64,
}

#[wasm_bindgen]
impl DemoSession {
    /// Builds a session: truth spectrum, simulated series, bias-corrected
    /// periodogram, forward transform. `shape` is one of `bumps`, `peaks`,
    /// `smooth`; `metric` one of `riemannian`, `log-euclidean`.
    #[wasm_bindgen(constructor)]
    pub fn new(
        shape: &str,
        n: usize,
        dim: usize,
        seed: u64,
        order: usize,
        metric: &str,
    ) -> Result<DemoSession, JsValue> {
        let shape = SpectrumShape::parse(shape)
            .ok_or_else(|| JsValue::from_str("unknown spectrum shape"))?;
        let metric = MetricKind::parse(metric)
            .filter(|m| matches!(m, MetricKind::Riemannian | MetricKind::LogEuclidean))
            .ok_or_else(|| JsValue::from_str("metric must be riemannian or log-euclidean"))?;
        let err = |e: hpdwave::Error| JsValue::from_str(&e.to_string());

        let truth = make_test_spectrum(&TestSpectrumSpec::new(shape, n, dim)).map_err(err)?;
        let mut rng = RngSeed(seed).stream(0);
        let ts = cramer_timeseries(&truth, 2 * n, &mut rng).map_err(err)?;
        let opts = EstimateOptions {
            tapers: dim,
            order,
            metric,
            ..Default::default()
        };
        let tapers = build_tapers(2 * n, dim, &opts).map_err(err)?;
        let raw = multitaper_periodogram(&ts, &tapers).map_err(err)?;
        let periodogram = bias_correct(&raw.curve, dim, dim, metric).map_err(err)?;
        let decomposition = forward(&periodogram, order, metric).map_err(err)?;
        let traces = trace_pyramid(&decomposition).map_err(err)?;
        let num_scales = periodogram.require_dyadic().map_err(err)? as usize;
        let sigma = hpdwave::shrinkage::noise_variance(
            &NoiseModel::new(dim, dim, num_scales, order).map_err(err)?,
        )
        .map_err(err)?
        .sqrt();
        let universal = hpdwave::shrinkage::universal_threshold(sigma, traces.num_coefficients());
        Ok(DemoSession {
            truth,
            periodogram,
            decomposition,
            traces,
            universal,
        })
    }

    /// The universal threshold of this dataset.
    pub fn universal_threshold(&self) -> f64 {
        self.universal
    }

    /// Re-thresholds at `lambda` and returns per-frequency Frobenius norms
    /// of truth, periodogram and estimate plus summary numbers, as JSON.
    pub fn estimate(&self, lambda: f64) -> Result<String, JsValue> {
        let err = |e: hpdwave::Error| JsValue::from_str(&e.to_string());
        let labels = cpress_prune(&self.traces, lambda);
        let thresholded = apply_labels(&self.decomposition, &labels).map_err(err)?;
        let estimate = inverse(&thresholded).map_err(err)?;
        let isre_est = isre(&estimate, &self.truth).map_err(err)?;
        let isre_raw = isre(&self.periodogram, &self.truth).map_err(err)?;
        Ok(format!(
            "{{\"truth\":{},\"periodogram\":{},\"estimate\":{},\"kept\":{},\"total\":{},\
             \"lambda\":{},\"isre_estimate\":{},\"isre_periodogram\":{}}}",
            norms_json(&self.truth),
            norms_json(&self.periodogram),
            norms_json(&estimate),
            labels.kept_count(),
            self.traces.num_coefficients(),
            json_f64(lambda),
            json_f64(isre_est),
            json_f64(isre_raw),
        ))
    }

    /// Whitened-coefficient traces with their keep/kill state at `lambda`,
    /// as JSON: one array of `{scale, location, trace, kept}` per scale.
    pub fn coefficients(&self, lambda: f64) -> String {
        let labels: LabelTree = cpress_prune(&self.traces, lambda);
        let mut out = String::from("[");
        for j in 1..=self.traces.num_scales() {
            if j > 1 {
                out.push(',');
            }
            out.push('[');
            for (k, &t) in self.traces.level(j).iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                out.push_str(&format!(
                    "{{\"trace\":{},\"kept\":{}}}",
                    json_f64(t),
                    labels.keep(j, k)
                ));
            }
            out.push(']');
        }
        out.push(']');
        out
    }
}

fn norms_json(curve: &HpdCurve) -> String {
    let values: Vec<String> = curve
        .points()
        .iter()
        .map(|p| json_f64(p.matrix().frobenius_norm()))
        .collect();
    format!("[{}]", values.join(","))
}

fn json_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        "null".to_string()
    }
}
