//! CSV rendering of simulation traces and a matching gnuplot script.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use coreg_core::sim::SimTrace;

/// Column names: `t,sigma,e{i}_{r}…,obs_err_{i}…`.
pub fn trace_header(error_dims: &[usize], observers: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string(), "sigma".to_string()];
    for (i, &p) in error_dims.iter().enumerate() {
        cols.extend((1..=p).map(|r| format!("e{}_{r}", i + 1)));
    }
    cols.extend((1..=observers).map(|i| format!("obs_err_{i}")));
    cols
}

/// Shortest decimal that parses back to the same `f64`.
fn number(out: &mut String, v: f64) {
    // Debug picks the shortest round-trip digits and switches to an exponent
    // for very small or large magnitudes
    let _ = write!(out, "{v:?}");
}

/// Renders the trace as CSV text with LF line endings.
pub fn trace_csv(trace: &SimTrace) -> String {
    let observers = trace
        .observer_errors
        .first()
        .map_or(trace.agent_count(), Vec::len);
    let mut out = trace_header(&trace.error_dims, observers).join(",");
    out.push('\n');
    for r in 0..trace.len() {
        number(&mut out, trace.times[r]);
        let _ = write!(out, ",{}", trace.sigma[r]);
        let obs = trace.observer_errors.get(r).map_or(&[][..], Vec::as_slice);
        for &v in trace.errors[r].iter().chain(obs) {
            out.push(',');
            number(&mut out, v);
        }
        out.push('\n');
    }
    out
}

pub fn write_trace_csv(trace: &SimTrace, path: &Path) -> io::Result<()> {
    fs::write(path, trace_csv(trace))
        .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

/// A gnuplot script plotting every tracking-error column of `csv_path`
/// against time on a log scale.
pub fn gnuplot_script(csv_path: &str, error_dims: &[usize]) -> String {
    let header = trace_header(error_dims, 0);
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set xlabel 't'");
    let _ = writeln!(s, "set ylabel '|e|'");
    let _ = writeln!(s, "set logscale y");
    let plots: Vec<String> = (3..=header.len())
        .map(|col| format!("'{csv_path}' using 1:(abs(${col})) with lines"))
        .collect();
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    s
}
