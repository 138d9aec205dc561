//! CSV and `key=value` artifacts. Floats are written with 17 significant
//! digits, `.` as decimal separator and `\n` line endings.

use std::fs;
use std::io::Write;
use std::path::Path;

use tempfile::NamedTempFile;

use crate::basis::{BasisKind, MomentVector};
use crate::diagnostics::DiagnosticsReport;
use crate::error::{Error, Result};
use crate::logistic::HistogramDensity;

pub const MOMENTS_HEADER: [&str; 2] = ["i", "mu"];
pub const HISTOGRAM_HEADER: [&str; 2] = ["x_center", "density"];
pub const SWEEP_HEADER: [&str; 10] = [
    "function",
    "M",
    "n_g",
    "delta1",
    "delta2",
    "entropy",
    "d_kl",
    "d_v",
    "kl_bound",
    "gap_width",
];

/// Lossless text form of a binary64 value.
pub fn format_float(value: f64) -> String {
    format!("{value:.16e}")
}

/// Writes `contents` to a temporary file next to `path` and renames it into
/// place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut file = NamedTempFile::new_in(dir)?;
    file.write_all(contents)?;
    file.as_file().sync_all()?;
    file.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn csv_bytes(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(&row)?;
    }
    writer.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Reads a CSV with exactly the given header, returning its records.
fn read_csv(path: &Path, what: &'static str, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let text = fs::read_to_string(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let found: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if found != header {
        return Err(Error::Malformed {
            what,
            message: format!(
                "expected header {}, found {}",
                header.join(","),
                found.join(",")
            ),
        });
    }
    reader.records().map(|r| r.map_err(Error::from)).collect()
}

fn parse_field<T: std::str::FromStr>(
    record: &csv::StringRecord,
    column: usize,
    what: &'static str,
    line: usize,
) -> Result<T> {
    let text = record.get(column).unwrap_or("");
    text.parse().map_err(|_| Error::Malformed {
        what,
        message: format!("row {line}: cannot parse '{text}'"),
    })
}

pub fn moments_csv(mu: &MomentVector) -> Result<Vec<u8>> {
    csv_bytes(
        &MOMENTS_HEADER,
        mu.values()
            .iter()
            .enumerate()
            .map(|(i, m)| vec![i.to_string(), format_float(*m)]),
    )
}

pub fn write_moments(path: &Path, mu: &MomentVector) -> Result<()> {
    write_atomic(path, &moments_csv(mu)?)
}

/// Reads an `i,mu` file whose indices must run `0, 1, …, M` in order.
pub fn read_moments(path: &Path, kind: BasisKind) -> Result<MomentVector> {
    const WHAT: &str = "moments file";
    let records = read_csv(path, WHAT, &MOMENTS_HEADER)?;
    if records.is_empty() {
        return Err(Error::Malformed {
            what: WHAT,
            message: "no moment rows".into(),
        });
    }
    let mut values = Vec::with_capacity(records.len());
    for (row, record) in records.iter().enumerate() {
        let i: usize = parse_field(record, 0, WHAT, row + 1)?;
        if i != row {
            return Err(Error::Malformed {
                what: WHAT,
                message: format!("row {}: expected index {row}, found {i}", row + 1),
            });
        }
        let mu: f64 = parse_field(record, 1, WHAT, row + 1)?;
        if !mu.is_finite() {
            return Err(Error::Malformed {
                what: WHAT,
                message: format!("row {}: moment is not finite", row + 1),
            });
        }
        values.push(mu);
    }
    MomentVector::new(kind, values)
}

/// Nodal values as stored in `recon.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalTable {
    pub x: Vec<f64>,
    pub f_exact: Option<Vec<f64>>,
    pub rho: Vec<f64>,
}

pub fn reconstruction_csv(x: &[f64], f_exact: Option<&[f64]>, rho: &[f64]) -> Result<Vec<u8>> {
    match f_exact {
        Some(f) => csv_bytes(
            &["x", "f_exact", "rho"],
            (0..x.len())
                .map(|j| vec![format_float(x[j]), format_float(f[j]), format_float(rho[j])]),
        ),
        None => csv_bytes(
            &["x", "rho"],
            (0..x.len()).map(|j| vec![format_float(x[j]), format_float(rho[j])]),
        ),
    }
}

pub fn write_reconstruction(
    path: &Path,
    x: &[f64],
    f_exact: Option<&[f64]>,
    rho: &[f64],
) -> Result<()> {
    write_atomic(path, &reconstruction_csv(x, f_exact, rho)?)
}

/// Reads either `x,rho` or `x,f_exact,rho`.
pub fn read_reconstruction(path: &Path) -> Result<NodalTable> {
    const WHAT: &str = "reconstruction file";
    let text = fs::read_to_string(path)?;
    let with_exact = text.lines().next().map(str::trim) == Some("x,f_exact,rho");
    let header: &[&str] = if with_exact {
        &["x", "f_exact", "rho"]
    } else {
        &["x", "rho"]
    };
    let records = read_csv(path, WHAT, header)?;
    let mut table = NodalTable {
        x: Vec::new(),
        f_exact: with_exact.then(Vec::new),
        rho: Vec::new(),
    };
    for (row, record) in records.iter().enumerate() {
        table.x.push(parse_field(record, 0, WHAT, row + 1)?);
        if let Some(f) = table.f_exact.as_mut() {
            f.push(parse_field(record, 1, WHAT, row + 1)?);
        }
        table
            .rho
            .push(parse_field(record, header.len() - 1, WHAT, row + 1)?);
    }
    Ok(table)
}

pub fn write_histogram(path: &Path, histogram: &HistogramDensity) -> Result<()> {
    let bytes = csv_bytes(
        &HISTOGRAM_HEADER,
        histogram
            .bin_centers()
            .iter()
            .zip(histogram.densities())
            .map(|(x, d)| vec![format_float(*x), format_float(*d)]),
    )?;
    write_atomic(path, &bytes)
}

/// Reads `x_center,density` for equal-width bins and rebuilds the edges.
pub fn read_histogram(path: &Path) -> Result<HistogramDensity> {
    const WHAT: &str = "histogram file";
    let records = read_csv(path, WHAT, &HISTOGRAM_HEADER)?;
    let mut centers = Vec::new();
    let mut densities = Vec::new();
    for (row, record) in records.iter().enumerate() {
        centers.push(parse_field::<f64>(record, 0, WHAT, row + 1)?);
        densities.push(parse_field::<f64>(record, 1, WHAT, row + 1)?);
    }
    if centers.len() < 2 {
        return Err(Error::Malformed {
            what: WHAT,
            message: "need at least two bins".into(),
        });
    }
    let width = (centers[centers.len() - 1] - centers[0]) / (centers.len() - 1) as f64;
    let mut edges: Vec<f64> = centers.iter().map(|c| c - width / 2.0).collect();
    edges.push(centers[centers.len() - 1] + width / 2.0);
    HistogramDensity::new(edges, densities)
}

/// `key=value` lines.
pub fn report_text(entries: &[(String, String)]) -> String {
    entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

pub fn write_report(path: &Path, entries: &[(String, String)]) -> Result<()> {
    write_atomic(path, report_text(entries).as_bytes())
}

pub fn read_report(path: &Path) -> Result<Vec<(String, String)>> {
    fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(n, line)| match line.split_once('=') {
            Some((k, v)) => Ok((k.trim().to_owned(), v.trim().to_owned())),
            None => Err(Error::Malformed {
                what: "report",
                message: format!("line {}: expected key=value", n + 1),
            }),
        })
        .collect()
}

/// Report entries for a diagnostics run.
pub fn diagnostics_entries(report: &DiagnosticsReport) -> Vec<(String, String)> {
    let mut entries = vec![
        ("delta1".to_owned(), format_float(report.delta1)),
        ("delta2".to_owned(), format_float(report.delta2)),
        ("entropy".to_owned(), format_float(report.entropy)),
        ("d_kl".to_owned(), format_float(report.d_kl)),
        ("d_v".to_owned(), format_float(report.d_v)),
        (
            "kl_lower_bound".to_owned(),
            format_float(report.kl_lower_bound),
        ),
        (
            "bound_satisfied".to_owned(),
            report.bound_satisfied.to_string(),
        ),
    ];
    if let Some(gap) = &report.gap {
        entries.extend([
            ("gap_epsilon".to_owned(), format_float(gap.epsilon)),
            ("gap_left".to_owned(), format_float(gap.left_edge)),
            ("gap_right".to_owned(), format_float(gap.right_edge)),
            ("gap_width".to_owned(), format_float(gap.width)),
            ("gap_cell_width".to_owned(), format_float(gap.cell_width)),
        ]);
    }
    entries
}

/// One row of the sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub function: String,
    pub order: usize,
    pub nodes: usize,
    pub report: DiagnosticsReport,
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<Vec<u8>> {
    csv_bytes(
        &SWEEP_HEADER,
        rows.iter().map(|r| {
            vec![
                r.function.clone(),
                r.order.to_string(),
                r.nodes.to_string(),
                format_float(r.report.delta1),
                format_float(r.report.delta2),
                format_float(r.report.entropy),
                format_float(r.report.d_kl),
                format_float(r.report.d_v),
                format_float(r.report.kl_lower_bound),
                format_float(r.report.gap.as_ref().map_or(f64::NAN, |g| g.width)),
            ]
        }),
    )
}
