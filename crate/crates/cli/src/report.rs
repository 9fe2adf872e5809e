//! CSV and markdown rendering of reports and AP traces.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use transversality::altproj::APTrace;

use crate::run::Report;

pub const COLUMNS: [&str; 9] = ["scenario", "quantity", "value", "bias", "expected", "tolerance", "pass", "margin", "runtime_ms"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Markdown,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Markdown => "md",
        }
    }
}

/// Shortest representation that parses back to the same float.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn fields(report: &Report) -> impl Iterator<Item = [String; 9]> + '_ {
    report.rows.iter().map(|r| {
        [
            r.scenario.clone(),
            r.quantity.clone(),
            num(r.value),
            r.bias.clone(),
            opt(r.expected),
            opt(r.tolerance),
            r.pass.map(|p| p.to_string()).unwrap_or_default(),
            opt(r.margin),
            opt(r.runtime_ms),
        ]
    })
}

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(COLUMNS).expect("in-memory write");
            for f in fields(report) {
                w.write_record(&f).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
        }
        Format::Markdown => {
            let mut s = format!("| {} |\n|{}\n", COLUMNS.join(" | "), "---|".repeat(COLUMNS.len()));
            for f in fields(report) {
                let cells: Vec<String> = f.iter().map(|c| c.replace('|', "\\|")).collect();
                let _ = writeln!(s, "| {} |", cells.join(" | "));
            }
            let m = &report.summary;
            let _ = writeln!(
                s,
                "\n{} scenarios, {} rows: {} passed, {} failed, {} unchecked",
                m.scenarios, m.rows, m.passed, m.failed, m.unchecked
            );
            s
        }
    }
}

pub fn emit_report(report: &Report, format: Format, path: impl AsRef<Path>) -> io::Result<()> {
    std::fs::write(path, render(report, format))
}

/// Per-iterate CSV: `k, x_1..x_n, d_int, step_norm`, where `step_norm` is
/// `‖x_{k+1} − x_k‖` (blank on the last iterate).
pub fn render_trace(trace: &APTrace) -> String {
    let n = trace.x_seq.first().map_or(0, |x| x.dim());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["k".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.extend(["d_int".to_string(), "step_norm".to_string()]);
    w.write_record(&header).expect("in-memory write");
    for (k, x) in trace.x_seq.iter().enumerate() {
        let mut rec = vec![k.to_string()];
        rec.extend(x.coords().iter().map(|c| num(*c)));
        rec.push(trace.d_int.get(k).map(|d| num(*d)).unwrap_or_default());
        rec.push(trace.x_seq.get(k + 1).map(|y| num(x.dist(y))).unwrap_or_default());
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}
