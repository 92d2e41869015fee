//! File formats: the HPDC binary curve container, a decomposition variant
//! of it, TSV time series, and RFC 4180 CSV emission.
//!
//! HPDC layout (little-endian): magic `HPDC`, version byte `0x01`, `u32`
//! matrix dimension, `u64` number of matrices, flags byte (bit 0: metric
//! tag present, bit 1: decomposition payload), optional metric tag byte,
//! then each matrix as row-major `(re: f64, im: f64)` entry pairs. Curve
//! payloads hold the matrices in frequency order. Decomposition payloads
//! are preceded by two extra bytes (refinement order, number of scales)
//! and hold the coarsest midpoint followed by, per scale and location, the
//! prediction base point and the coefficient.

use std::io::{self, Read, Write};

use num_complex::Complex64;

use crate::error::Error;
use crate::linalg::{ComplexMatrix, HermitianMatrix, HpdMatrix};
use crate::manifold::{HpdCurve, MetricKind};
use crate::spectral::TimeSeries;
use crate::wavelet::{WaveletCoeff, WaveletDecomposition};

const MAGIC: &[u8; 4] = b"HPDC";
const VERSION: u8 = 0x01;
const FLAG_METRIC: u8 = 0b01;
const FLAG_DECOMPOSITION: u8 = 0b10;

/// Errors arising while reading the binary/text formats.
#[derive(Debug)]
pub enum FormatError {
    Io(io::Error),
    /// Structural problem in the bytes themselves.
    Malformed(String),
    /// Bytes parsed but the payload violates a numerical invariant.
    Invalid(Error),
}

impl std::fmt::Display for FormatError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FormatError::Io(e) => write!(f, "i/o error: {e}"),
            FormatError::Malformed(msg) => write!(f, "malformed file: {msg}"),
            FormatError::Invalid(e) => write!(f, "invalid payload: {e}"),
        }
    }
}

impl std::error::Error for FormatError {}

impl From<io::Error> for FormatError {
    fn from(e: io::Error) -> Self {
        FormatError::Io(e)
    }
}

impl From<Error> for FormatError {
    fn from(e: Error) -> Self {
        FormatError::Invalid(e)
    }
}

fn metric_tag(metric: MetricKind) -> u8 {
    match metric {
        MetricKind::Riemannian => 0,
        MetricKind::LogEuclidean => 1,
        MetricKind::Cholesky => 2,
        MetricKind::Euclidean => 3,
    }
}

fn metric_from_tag(tag: u8) -> Result<MetricKind, FormatError> {
    Ok(match tag {
        0 => MetricKind::Riemannian,
        1 => MetricKind::LogEuclidean,
        2 => MetricKind::Cholesky,
        3 => MetricKind::Euclidean,
        other => {
            return Err(FormatError::Malformed(format!(
                "unknown metric tag {other}"
            )))
        }
    })
}

fn write_matrix(w: &mut impl Write, m: &ComplexMatrix) -> io::Result<()> {
    for z in m.data() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_matrix(r: &mut impl Read, dim: usize) -> Result<ComplexMatrix, FormatError> {
    let mut entries = Vec::with_capacity(dim * dim);
    let mut buf = [0u8; 8];
    for _ in 0..dim * dim {
        r.read_exact(&mut buf)?;
        let re = f64::from_le_bytes(buf);
        r.read_exact(&mut buf)?;
        let im = f64::from_le_bytes(buf);
        entries.push(Complex64::new(re, im));
    }
    ComplexMatrix::from_rows(dim, &entries).map_err(FormatError::from)
}

struct Header {
    dim: usize,
    count: usize,
    metric: Option<MetricKind>,
    decomposition: bool,
}

fn write_header(w: &mut impl Write, h: &Header) -> io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&[VERSION])?;
    w.write_all(&(h.dim as u32).to_le_bytes())?;
    w.write_all(&(h.count as u64).to_le_bytes())?;
    let mut flags = 0u8;
    if h.metric.is_some() {
        flags |= FLAG_METRIC;
    }
    if h.decomposition {
        flags |= FLAG_DECOMPOSITION;
    }
    w.write_all(&[flags])?;
    if let Some(m) = h.metric {
        w.write_all(&[metric_tag(m)])?;
    }
    Ok(())
}

fn read_header(r: &mut impl Read) -> Result<Header, FormatError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(FormatError::Malformed("bad magic bytes".into()));
    }
    let mut byte = [0u8; 1];
    r.read_exact(&mut byte)?;
    if byte[0] != VERSION {
        return Err(FormatError::Malformed(format!(
            "unknown version {}",
            byte[0]
        )));
    }
    let mut dim_buf = [0u8; 4];
    r.read_exact(&mut dim_buf)?;
    let dim = u32::from_le_bytes(dim_buf) as usize;
    let mut count_buf = [0u8; 8];
    r.read_exact(&mut count_buf)?;
    let count = u64::from_le_bytes(count_buf) as usize;
    r.read_exact(&mut byte)?;
    let flags = byte[0];
    let metric = if flags & FLAG_METRIC != 0 {
        r.read_exact(&mut byte)?;
        Some(metric_from_tag(byte[0])?)
    } else {
        None
    };
    if dim == 0 || dim > 1 << 16 || count == 0 {
        return Err(FormatError::Malformed(format!(
            "implausible dimensions: d={dim}, n={count}"
        )));
    }
    Ok(Header {
        dim,
        count,
        metric: metric.filter(|_| flags & FLAG_METRIC != 0),
        decomposition: flags & FLAG_DECOMPOSITION != 0,
    })
}

/// Writes a curve, optionally tagged with the metric it is meant for.
pub fn write_curve(
    w: &mut impl Write,
    curve: &HpdCurve,
    metric: Option<MetricKind>,
) -> io::Result<()> {
    write_header(
        w,
        &Header {
            dim: curve.dim(),
            count: curve.len(),
            metric,
            decomposition: false,
        },
    )?;
    for p in curve.points() {
        write_matrix(w, p.matrix())?;
    }
    Ok(())
}

/// Reads a curve; every matrix is validated HPD.
pub fn read_curve(r: &mut impl Read) -> Result<(HpdCurve, Option<MetricKind>), FormatError> {
    let header = read_header(r)?;
    if header.decomposition {
        return Err(FormatError::Malformed(
            "file holds a decomposition, not a curve".into(),
        ));
    }
    let mut points = Vec::with_capacity(header.count);
    for _ in 0..header.count {
        let m = read_matrix(r, header.dim)?;
        points.push(HpdMatrix::from_matrix(m)?);
    }
    expect_eof(r)?;
    Ok((HpdCurve::new(points)?, header.metric))
}

/// Writes a wavelet decomposition: coarsest midpoint, then per coefficient
/// its base point and residual.
pub fn write_decomposition(w: &mut impl Write, dec: &WaveletDecomposition) -> io::Result<()> {
    write_header(
        w,
        &Header {
            dim: dec.dim(),
            count: 1 + 2 * dec.num_coefficients(),
            metric: Some(dec.metric()),
            decomposition: true,
        },
    )?;
    w.write_all(&[dec.order() as u8, dec.num_scales() as u8])?;
    write_matrix(w, dec.root().matrix())?;
    for j in 1..=dec.num_scales() {
        for coeff in dec.level(j) {
            write_matrix(w, &coeff.base)?;
            write_matrix(w, &coeff.delta)?;
        }
    }
    Ok(())
}

/// Reads a wavelet decomposition written by [`write_decomposition`].
pub fn read_decomposition(r: &mut impl Read) -> Result<WaveletDecomposition, FormatError> {
    let header = read_header(r)?;
    if !header.decomposition {
        return Err(FormatError::Malformed(
            "file holds a curve, not a decomposition".into(),
        ));
    }
    let metric = header
        .metric
        .ok_or_else(|| FormatError::Malformed("decomposition lacks a metric tag".into()))?;
    let mut two = [0u8; 2];
    r.read_exact(&mut two)?;
    let (order, num_scales) = (two[0] as usize, two[1] as usize);
    if order % 2 == 0 {
        return Err(FormatError::Malformed(format!("even order {order}")));
    }
    let expected = 1 + 2 * ((1usize << num_scales) - 1);
    if header.count != expected {
        return Err(FormatError::Malformed(format!(
            "matrix count {} does not match {num_scales} scales",
            header.count
        )));
    }
    let root = HpdMatrix::from_matrix(read_matrix(r, header.dim)?)?;
    let mut levels = Vec::with_capacity(num_scales);
    for j in 1..=num_scales {
        let mut level = Vec::with_capacity(1 << (j - 1));
        for _ in 0..1 << (j - 1) {
            let base = read_matrix(r, header.dim)?;
            let delta = read_matrix(r, header.dim)?;
            level.push(WaveletCoeff { delta, base });
        }
        levels.push(level);
    }
    expect_eof(r)?;
    Ok(WaveletDecomposition::from_parts(
        metric, order, header.dim, root, levels,
    ))
}

fn expect_eof(r: &mut impl Read) -> Result<(), FormatError> {
    let mut probe = [0u8; 1];
    match r.read(&mut probe)? {
        0 => Ok(()),
        _ => Err(FormatError::Malformed("trailing bytes".into())),
    }
}

/// Serializes a time series as TSV: header `t\tch0\t...`, then one row per
/// sample with 17-significant-digit floats (exact f64 round trip).
pub fn write_timeseries(w: &mut impl Write, ts: &TimeSeries) -> io::Result<()> {
    write!(w, "t")?;
    for c in 0..ts.dim() {
        write!(w, "\tch{c}")?;
    }
    writeln!(w)?;
    for t in 0..ts.len() {
        write!(w, "{t}")?;
        for c in 0..ts.dim() {
            write!(w, "\t{:.16e}", ts.channel(c)[t])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Parses the TSV format written by [`write_timeseries`].
pub fn read_timeseries(r: &mut impl Read) -> Result<TimeSeries, FormatError> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| FormatError::Malformed("empty file".into()))?;
    let cols: Vec<&str> = header.split('\t').collect();
    if cols.first() != Some(&"t") || cols.len() < 2 {
        return Err(FormatError::Malformed("bad TSV header".into()));
    }
    let dim = cols.len() - 1;
    let mut data: Vec<Vec<f64>> = vec![Vec::new(); dim];
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != dim + 1 {
            return Err(FormatError::Malformed(format!(
                "row {} has {} fields, expected {}",
                lineno + 2,
                fields.len(),
                dim + 1
            )));
        }
        for (c, field) in fields[1..].iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                FormatError::Malformed(format!("bad float {:?} in row {}", field, lineno + 2))
            })?;
            data[c].push(v);
        }
    }
    TimeSeries::new(data).map_err(FormatError::from)
}

/// Quotes a CSV field per RFC 4180 when needed.
pub fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Benchmark rows as a tidy CSV table.
pub fn benchmark_csv(table: &crate::simulate::BenchmarkTable) -> String {
    let mut out = String::from("replicate,estimator,params,isre\n");
    for row in &table.rows {
        let isre = match row.isre {
            Some(v) => format!("{v:.17e}"),
            None => "NA".to_string(),
        };
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.replicate,
            csv_field(&row.estimator),
            csv_field(&row.params),
            isre
        ));
    }
    out
}

/// Trace/label diagnostics of a thresholding run as CSV.
pub fn traces_csv(
    traces: &crate::shrinkage::TracePyramid,
    labels: &crate::shrinkage::LabelTree,
) -> String {
    let mut out = String::from("scale,location,trace,kept\n");
    for j in 1..=traces.num_scales() {
        for (k, &d) in traces.level(j).iter().enumerate() {
            out.push_str(&format!(
                "{j},{k},{d:.17e},{}\n",
                if labels.keep(j, k) { 1 } else { 0 }
            ));
        }
    }
    out
}

/// Reconstructs a Hermitian-typed view of stored entries (used by tests and
/// tooling reading decomposition files).
pub fn hermitian_from_entries(m: &ComplexMatrix) -> HermitianMatrix {
    HermitianMatrix::symmetrize(m.clone())
}
