//! Command-line interface binding the estimation pipeline into
//! reproducible batch workflows.
//!
//! Exit codes: 0 success, 2 usage error, 3 i/o or format error,
//! 4 numerical/pipeline error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use hpdwave::io as fio;
use hpdwave::manifold::MetricKind;
use hpdwave::simulate::{
    make_test_spectrum, run_benchmark, BenchmarkConfig, EstimatorSpec, SpectrumShape,
    TestSpectrumSpec,
};
use hpdwave::spectral::{
    bias_correct, build_tapers, denoise_spectrum, multitaper_periodogram, EstimateOptions,
    TaperKind, ThresholdPolicy,
};
use hpdwave::wavelet;
use hpdwave::RngSeed;

const USAGE: &str = "\
hpdwave - wavelet estimation for curves of Hermitian positive definite matrices

USAGE:
    hpdwave simulate  --spectrum <bumps|peaks|smooth> --n <len> --d <dim> --T <samples>
                      --seed <u64> --out-spectrum <file> --out-ts <file>
    hpdwave estimate  --in <tsv> --B <tapers> --order <N> --metric <name>
                      --policy <universal|cpress:L|cv> [--truncate-dyadic]
                      [--taper <dpss|sine>] [--nw <float>] [--emit-traces <csv>]
                      --out <file>
    hpdwave transform --in <hpdc> (--forward | --inverse) [--order <N>]
                      [--metric <name>] --out <file>
    hpdwave benchmark --config <file> --out <csv>

Metrics: riemannian, log-euclidean, cholesky, euclidean.
Curves are binary HPDC files; time series are TSV with header t\\tch0\\t...;
benchmark configs are key=value lines (spectrum, n, d, replicates, seed, B,
order, metric, policy, estimators).
Set HPDWAVE_THREADS to cap parallelism (0 = auto).
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let code = match run(&args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    };
    ExitCode::from(code)
}

struct CliError {
    code: u8,
    message: String,
}

fn usage_err(msg: impl Into<String>) -> CliError {
    CliError {
        code: 2,
        message: msg.into(),
    }
}

fn io_err(msg: impl Into<String>) -> CliError {
    CliError {
        code: 3,
        message: msg.into(),
    }
}

fn pipeline_err(stage: &str, e: impl std::fmt::Display) -> CliError {
    CliError {
        code: 4,
        message: format!("{stage}: {e}"),
    }
}

fn run(args: &[String]) -> Result<(), CliError> {
    match args.first().map(String::as_str) {
        Some("simulate") => cmd_simulate(&args[1..]),
        Some("estimate") => cmd_estimate(&args[1..]),
        Some("transform") => cmd_transform(&args[1..]),
        Some("benchmark") => cmd_benchmark(&args[1..]),
        Some("--help") | Some("-h") | Some("help") => {
            print!("{USAGE}");
            Ok(())
        }
        Some(other) => Err(usage_err(format!("unknown subcommand {other:?}\n{USAGE}"))),
        None => Err(usage_err(USAGE)),
    }
}

/// Long-form `--key value` flag parsing; boolean flags take no value.
struct Flags {
    pairs: Vec<(String, Option<String>)>,
}

impl Flags {
    fn parse(args: &[String], booleans: &[&str]) -> Result<Flags, CliError> {
        let mut pairs = Vec::new();
        let mut i = 0;
        while i < args.len() {
            let arg = &args[i];
            let key = arg
                .strip_prefix("--")
                .ok_or_else(|| usage_err(format!("expected a --flag, got {arg:?}")))?;
            if booleans.contains(&key) {
                pairs.push((key.to_string(), None));
                i += 1;
            } else {
                let value = args
                    .get(i + 1)
                    .ok_or_else(|| usage_err(format!("--{key} needs a value")))?;
                pairs.push((key.to_string(), Some(value.clone())));
                i += 2;
            }
        }
        Ok(Flags { pairs })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.pairs
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .and_then(|(_, v)| v.as_deref())
    }

    fn has(&self, key: &str) -> bool {
        self.pairs.iter().any(|(k, _)| k == key)
    }

    fn require(&self, key: &str) -> Result<&str, CliError> {
        self.get(key)
            .ok_or_else(|| usage_err(format!("missing required flag --{key}")))
    }

    fn parse_num<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError> {
        let raw = self.require(key)?;
        raw.parse()
            .map_err(|_| usage_err(format!("--{key}: cannot parse {raw:?}")))
    }
}

/// Writes through a temp file in the target directory, then renames.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = PathBuf::from(dir);
    tmp.push(format!(
        ".hpdwave-tmp-{}-{}",
        std::process::id(),
        path.file_name().and_then(|f| f.to_str()).unwrap_or("out")
    ));
    let mut file = fs::File::create(&tmp)
        .map_err(|e| io_err(format!("cannot create {}: {e}", tmp.display())))?;
    file.write_all(bytes)
        .and_then(|_| file.sync_all())
        .map_err(|e| io_err(format!("cannot write {}: {e}", tmp.display())))?;
    drop(file);
    fs::rename(&tmp, path)
        .map_err(|e| io_err(format!("cannot rename into {}: {e}", path.display())))
}

fn parse_metric(flags: &Flags) -> Result<MetricKind, CliError> {
    match flags.get("metric") {
        None => Ok(MetricKind::Riemannian),
        Some(name) => {
            MetricKind::parse(name).ok_or_else(|| usage_err(format!("unknown metric {name:?}")))
        }
    }
}

fn parse_policy(raw: &str) -> Result<ThresholdPolicy, CliError> {
    if raw == "universal" {
        Ok(ThresholdPolicy::Universal)
    } else if raw == "cv" {
        Ok(ThresholdPolicy::CrossValidation(None))
    } else if let Some(rest) = raw.strip_prefix("cpress:") {
        let lambda: f64 = rest
            .parse()
            .map_err(|_| usage_err(format!("cpress penalty {rest:?} is not a number")))?;
        if lambda < 0.0 {
            return Err(usage_err("cpress penalty must be nonnegative"));
        }
        Ok(ThresholdPolicy::Cpress(lambda))
    } else {
        Err(usage_err(format!(
            "unknown policy {raw:?} (universal | cpress:L | cv)"
        )))
    }
}

fn cmd_simulate(args: &[String]) -> Result<(), CliError> {
    let flags = Flags::parse(args, &[])?;
    let shape = SpectrumShape::parse(flags.require("spectrum")?)
        .ok_or_else(|| usage_err("unknown --spectrum (bumps | peaks | smooth)"))?;
    let n: usize = flags.parse_num("n")?;
    let d: usize = flags.parse_num("d")?;
    let series_len: usize = flags.parse_num("T")?;
    let seed: u64 = flags.parse_num("seed")?;
    let out_spectrum = PathBuf::from(flags.require("out-spectrum")?);
    let out_ts = PathBuf::from(flags.require("out-ts")?);

    if !n.is_power_of_two() {
        return Err(usage_err(format!(
            "--n {n} must be a power of two (dyadic grid)"
        )));
    }
    if series_len != 2 * n {
        return Err(usage_err(format!(
            "--T must equal 2 * n = {} (got {series_len})",
            2 * n
        )));
    }

    let spec = TestSpectrumSpec::new(shape, n, d);
    let truth = make_test_spectrum(&spec).map_err(|e| pipeline_err("spectrum generation", e))?;
    let ts = hpdwave::simulate::cramer_timeseries(&truth, series_len, &mut RngSeed(seed).stream(0))
        .map_err(|e| pipeline_err("series synthesis", e))?;

    let mut buf = Vec::new();
    fio::write_curve(&mut buf, &truth, None).map_err(|e| io_err(e.to_string()))?;
    write_atomic(&out_spectrum, &buf)?;

    let mut tsv = Vec::new();
    fio::write_timeseries(&mut tsv, &ts).map_err(|e| io_err(e.to_string()))?;
    write_atomic(&out_ts, &tsv)?;
    Ok(())
}

fn cmd_estimate(args: &[String]) -> Result<(), CliError> {
    let flags = Flags::parse(args, &["truncate-dyadic"])?;
    let input = PathBuf::from(flags.require("in")?);
    let tapers: usize = flags.parse_num("B")?;
    let order: usize = flags.parse_num("order")?;
    if order % 2 == 0 || order == 0 {
        return Err(usage_err("--order must be an odd positive integer"));
    }
    let metric = parse_metric(&flags)?;
    let policy = parse_policy(flags.require("policy")?)?;
    let taper_kind = match flags.get("taper") {
        None | Some("dpss") => TaperKind::Dpss,
        Some("sine") => TaperKind::Sine,
        Some(other) => return Err(usage_err(format!("unknown taper family {other:?}"))),
    };
    let time_bandwidth = match flags.get("nw") {
        None => None,
        Some(raw) => Some(
            raw.parse::<f64>()
                .map_err(|_| usage_err(format!("--nw: cannot parse {raw:?}")))?,
        ),
    };
    let out = PathBuf::from(flags.require("out")?);

    let bytes = fs::read(&input).map_err(|e| io_err(format!("{}: {e}", input.display())))?;
    let mut ts = fio::read_timeseries(&mut bytes.as_slice()).map_err(|e| io_err(e.to_string()))?;
    if flags.has("truncate-dyadic") {
        ts = ts.truncate_dyadic();
    } else if ts.len() % 2 != 0 || !(ts.len() / 2).is_power_of_two() {
        return Err(usage_err(format!(
            "series length {} gives a non-dyadic frequency grid; pass --truncate-dyadic to \
             clip to the largest dyadic prefix",
            ts.len()
        )));
    }

    let d = ts.dim();
    let opts = EstimateOptions {
        tapers,
        order,
        metric,
        policy,
        taper_kind,
        time_bandwidth,
    };
    let taper_set =
        build_tapers(ts.len(), tapers, &opts).map_err(|e| pipeline_err("taper construction", e))?;
    let raw =
        multitaper_periodogram(&ts, &taper_set).map_err(|e| pipeline_err("periodogram", e))?;
    let corrected = bias_correct(&raw.curve, d, tapers, metric)
        .map_err(|e| pipeline_err("bias correction", e))?;
    let denoised =
        denoise_spectrum(&corrected, d, tapers, &opts).map_err(|e| pipeline_err("denoising", e))?;

    let mut buf = Vec::new();
    fio::write_curve(&mut buf, &denoised.curve, Some(metric)).map_err(|e| io_err(e.to_string()))?;
    write_atomic(&out, &buf)?;

    if let Some(path) = flags.get("emit-traces") {
        let csv = fio::traces_csv(&denoised.traces, &denoised.labels);
        write_atomic(&PathBuf::from(path), csv.as_bytes())?;
    }
    Ok(())
}

fn cmd_transform(args: &[String]) -> Result<(), CliError> {
    let flags = Flags::parse(args, &["forward", "inverse"])?;
    let input = PathBuf::from(flags.require("in")?);
    let out = PathBuf::from(flags.require("out")?);
    let forward_mode = flags.has("forward");
    let inverse_mode = flags.has("inverse");
    if forward_mode == inverse_mode {
        return Err(usage_err("pass exactly one of --forward or --inverse"));
    }

    let bytes = fs::read(&input).map_err(|e| io_err(format!("{}: {e}", input.display())))?;
    if forward_mode {
        let order: usize = flags.parse_num("order")?;
        if order % 2 == 0 || order == 0 {
            return Err(usage_err("--order must be an odd positive integer"));
        }
        let metric = parse_metric(&flags)?;
        let (curve, _) =
            fio::read_curve(&mut bytes.as_slice()).map_err(|e| io_err(e.to_string()))?;
        let dec =
            wavelet::forward(&curve, order, metric).map_err(|e| pipeline_err("transform", e))?;
        let mut buf = Vec::new();
        fio::write_decomposition(&mut buf, &dec).map_err(|e| io_err(e.to_string()))?;
        write_atomic(&out, &buf)?;
    } else {
        let dec =
            fio::read_decomposition(&mut bytes.as_slice()).map_err(|e| io_err(e.to_string()))?;
        let curve = wavelet::inverse(&dec).map_err(|e| pipeline_err("transform", e))?;
        let mut buf = Vec::new();
        fio::write_curve(&mut buf, &curve, Some(dec.metric()))
            .map_err(|e| io_err(e.to_string()))?;
        write_atomic(&out, &buf)?;
    }
    Ok(())
}

fn cmd_benchmark(args: &[String]) -> Result<(), CliError> {
    let flags = Flags::parse(args, &[])?;
    let config_path = PathBuf::from(flags.require("config")?);
    let out = PathBuf::from(flags.require("out")?);
    let text = fs::read_to_string(&config_path)
        .map_err(|e| io_err(format!("{}: {e}", config_path.display())))?;
    let config = parse_benchmark_config(&text)?;
    let table = run_benchmark(&config).map_err(|e| pipeline_err("benchmark", e))?;
    write_atomic(&out, fio::benchmark_csv(&table).as_bytes())?;
    for s in table.summarize() {
        println!(
            "{}: n={} mean={:.6} median={:.6} q25={:.6} q75={:.6}",
            s.estimator, s.count, s.mean, s.median, s.q25, s.q75
        );
    }
    Ok(())
}

/// Key = value configuration text for the benchmark runner.
fn parse_benchmark_config(text: &str) -> Result<BenchmarkConfig, CliError> {
    let mut kv = std::collections::BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            usage_err(format!("config line {}: expected key = value", lineno + 1))
        })?;
        kv.insert(key.trim().to_string(), value.trim().to_string());
    }
    let get = |key: &str| -> Result<&str, CliError> {
        kv.get(key)
            .map(String::as_str)
            .ok_or_else(|| usage_err(format!("config is missing key {key:?}")))
    };
    let num = |key: &str| -> Result<usize, CliError> {
        get(key)?
            .parse()
            .map_err(|_| usage_err(format!("config key {key:?} is not a number")))
    };

    let shape = SpectrumShape::parse(get("spectrum")?)
        .ok_or_else(|| usage_err("config spectrum must be bumps | peaks | smooth"))?;
    let n = num("n")?;
    let d = num("d")?;
    let replicates = num("replicates")?;
    let seed: u64 = get("seed")?
        .parse()
        .map_err(|_| usage_err("config seed is not a u64"))?;
    let tapers = num("B")?;
    let order = num("order")?;
    let metric =
        MetricKind::parse(get("metric")?).ok_or_else(|| usage_err("config metric is unknown"))?;
    let policy = parse_policy(get("policy")?)?;

    let mut estimators = Vec::new();
    for item in get("estimators")?.split(',') {
        let item = item.trim();
        if item == "raw" {
            estimators.push(EstimatorSpec::RawPeriodogram);
        } else if item == "wavelet" {
            estimators.push(EstimatorSpec::Wavelet);
        } else if let Some(k) = item.strip_prefix("nn:") {
            let k: usize = k
                .parse()
                .map_err(|_| usage_err(format!("estimator {item:?}: bad neighbor count")))?;
            estimators.push(EstimatorSpec::NearestNeighbor(k));
        } else {
            return Err(usage_err(format!("unknown estimator {item:?}")));
        }
    }
    if estimators.is_empty() {
        return Err(usage_err("config estimators list is empty"));
    }

    Ok(BenchmarkConfig {
        spectrum: TestSpectrumSpec::new(shape, n, d),
        replicates,
        seed: RngSeed(seed),
        options: EstimateOptions {
            tapers,
            order,
            metric,
            policy,
            ..Default::default()
        },
        estimators,
    })
}
