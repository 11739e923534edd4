//! CSV tables: convergence records, per-curve slopes and sampled solutions.

use std::io::Write;

use wghp_core::verify::ConvergenceRecord;
use wghp_core::weak::WeakFunction;

use crate::error::CliError;

pub const RECORD_HEADER: [&str; 10] =
    ["regime", "eps1", "eps2", "p", "N", "dof", "err_rel_percent", "err_abs", "ref_degree", "wall_ms"];
pub const SLOPE_HEADER: [&str; 4] = ["eps1", "eps2", "regime", "slope"];
pub const SOLUTION_HEADER: [&str; 4] = ["kind", "element", "x", "u"];

/// Points sampled per element in the solution table.
pub const SAMPLES_PER_ELEMENT: usize = 200;

/// 17 significant digits.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_error(e: csv::Error) -> std::io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::other(format!("{other:?}")),
    }
}

fn write_table<W: Write>(out: W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()
}

pub fn record_row(r: &ConvergenceRecord) -> Vec<String> {
    vec![
        r.regime.tag().to_string(),
        fmt_float(r.eps1),
        fmt_float(r.eps2),
        r.p.to_string(),
        r.elements.to_string(),
        r.dof.to_string(),
        fmt_float(r.err_rel_percent()),
        fmt_float(r.err_abs),
        r.ref_degree.to_string(),
        fmt_float(r.wall_ms),
    ]
}

pub fn write_records<W: Write>(out: W, records: &[ConvergenceRecord]) -> std::io::Result<()> {
    write_table(out, &RECORD_HEADER, records.iter().map(record_row))
}

/// One fitted curve of a convergence sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveSlope {
    pub eps1: f64,
    pub eps2: f64,
    pub regime: &'static str,
    /// Least-squares slope of `log10(err_rel)` against `p`; `None` when fewer
    /// than two rows succeeded.
    pub slope: Option<f64>,
}

pub fn write_slopes<W: Write>(out: W, slopes: &[CurveSlope]) -> std::io::Result<()> {
    write_table(
        out,
        &SLOPE_HEADER,
        slopes.iter().map(|s| {
            vec![
                fmt_float(s.eps1),
                fmt_float(s.eps2),
                s.regime.to_string(),
                fmt_float(s.slope.unwrap_or(f64::NAN)),
            ]
        }),
    )
}

/// `(element, x, u₀(x))` at `SAMPLES_PER_ELEMENT` equispaced points per
/// element, endpoints included.
pub fn sample_interior(u: &WeakFunction) -> Vec<(usize, f64, f64)> {
    let mut out = Vec::with_capacity(u.mesh().num_elements() * SAMPLES_PER_ELEMENT);
    for (e, iv) in u.mesh().elements().enumerate() {
        let poly = u.element(e);
        for i in 0..SAMPLES_PER_ELEMENT {
            let x = if i + 1 == SAMPLES_PER_ELEMENT {
                iv.b
            } else {
                iv.a + iv.width() * i as f64 / (SAMPLES_PER_ELEMENT - 1) as f64
            };
            out.push((e, x, poly.eval(x)));
        }
    }
    out
}

/// Sampled `u₀` rows (`kind = interior`, column `element`) followed by the
/// node values (`kind = node`, column holding the node index).
pub fn write_solution<W: Write>(out: W, u: &WeakFunction) -> std::io::Result<()> {
    let interior = sample_interior(u)
        .into_iter()
        .map(|(e, x, v)| vec!["interior".to_string(), e.to_string(), fmt_float(x), fmt_float(v)]);
    let nodes = u
        .mesh()
        .nodes()
        .iter()
        .zip(u.vb())
        .enumerate()
        .map(|(i, (x, v))| vec!["node".to_string(), i.to_string(), fmt_float(*x), fmt_float(*v)]);
    write_table(out, &SOLUTION_HEADER, interior.chain(nodes))
}

/// Writes `bytes` to `path`, or to standard output when `path` is `None`.
pub fn emit(path: Option<&std::path::Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::io(p, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes).and_then(|_| stdout.flush()).map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

/// `run.csv` becomes `run-slopes.csv`.
pub fn slopes_path(out: &std::path::Path) -> std::path::PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}-slopes.{}", ext.to_string_lossy()),
        None => format!("{stem}-slopes"),
    };
    out.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use wghp_core::mesh::Mesh;
    use wghp_core::problem::Regime;

    fn record(p: usize, err: f64) -> ConvergenceRecord {
        ConvergenceRecord {
            regime: Regime::ReactionConvectionDiffusion,
            eps1: 1e-5,
            eps2: 1e-2,
            p,
            elements: 3,
            dof: 3 * (p + 1) + 2,
            err_rel: err,
            err_abs: err,
            err_rel_p: err,
            ref_degree: 2 * p,
            wall_ms: 0.0,
            failure: None,
        }
    }

    #[test]
    fn float_format_has_17_significant_digits() {
        assert_eq!(fmt_float(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
        assert_eq!("1.0000000000000001e-1".parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn records_table_layout() {
        let mut buf = Vec::new();
        write_records(&mut buf, &[record(2, 0.5), record(4, 0.25)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.split_terminator('\n').collect();
        assert_eq!(lines[0], RECORD_HEADER.join(","));
        assert_eq!(lines.len(), 3);
        assert!(lines.iter().all(|l| l.split(',').count() == 10));
        assert!(!text.contains('\r'));
        assert!(lines[1].starts_with("RCD,1.0000000000000001e-5,"));
    }

    #[test]
    fn failed_rows_print_nan() {
        let mut r = record(2, f64::NAN);
        r.failure = Some("boom".into());
        let row = record_row(&r);
        assert_eq!(row[6], "NaN");
    }

    #[test]
    fn solution_table_counts() {
        let mesh = Mesh::new(vec![0.0, 0.5, 1.0]).unwrap();
        let u = WeakFunction::zero(mesh, 2).unwrap();
        let mut buf = Vec::new();
        write_solution(&mut buf, &u).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.split_terminator('\n').collect();
        assert_eq!(lines.len(), 1 + 2 * SAMPLES_PER_ELEMENT + 3);
        assert_eq!(lines.last().unwrap(), &"node,2,1.0000000000000000e0,0.0000000000000000e0");
    }

    #[test]
    fn slopes_path_naming() {
        assert_eq!(slopes_path(std::path::Path::new("/tmp/run.csv")), std::path::Path::new("/tmp/run-slopes.csv"));
        assert_eq!(slopes_path(std::path::Path::new("out")), std::path::Path::new("out-slopes"));
    }
}
