//! CSV and JSON rendering of run records. Every float is written as
//! `{:.16e}` (17 significant digits), so fixtures compare byte for byte.

use std::io;

use num_complex::Complex64;
use recur_core::recurrence::Exact;
use serde::Serialize;

use crate::run::{Outputs, RunRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn exact(e: &Exact) -> String {
    format!("{}/{}", e.num, e.den)
}

/// Header row, data rows, and trailing `# key=value` summary pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub summary: Vec<(&'static str, String)>,
}

fn complex_rows<'a>(it: impl Iterator<Item = (u64, &'a Complex64)>) -> Vec<Vec<String>> {
    it.map(|(n, z)| vec![n.to_string(), float(z.re), float(z.im)]).collect()
}

pub fn table(record: &RunRecord) -> Table {
    let mut t = match &record.outputs {
        Outputs::Average { report } | Outputs::Cube { report, .. } => Table {
            columns: vec!["n", "re", "im"],
            rows: complex_rows(report.checkpoints.iter().map(|(n, z)| (*n, z))),
            summary: vec![("oscillation", float(report.oscillation))],
        },
        Outputs::AverageL2 { horizon, grid, value } => Table {
            columns: vec!["horizon", "grid", "l2"],
            rows: vec![vec![horizon.to_string(), grid.to_string(), float(*value)]],
            summary: vec![],
        },
        Outputs::Gowers { window, norm } => Table {
            columns: vec!["window", "k", "value", "method"],
            rows: vec![vec![window.to_string(), norm.k.to_string(), float(norm.value), format!("{:?}", norm.method)]],
            summary: vec![],
        },
        Outputs::Scan { report, .. } => {
            let rows = match &report.values {
                Some(values) => (1..=report.horizon)
                    .zip(values)
                    .map(|(n, v)| vec![n.to_string(), float(*v), report.good_set.contains(n as i64).to_string()])
                    .collect(),
                None => report.good_set.iter().map(|n| vec![n.to_string(), String::new(), "true".into()]).collect(),
            };
            Table {
                columns: vec!["n", "value", "pass"],
                rows,
                summary: vec![
                    ("threshold", float(report.threshold)),
                    ("good", report.good_set.len().to_string()),
                    ("max_gap", report.max_gap.to_string()),
                ],
            }
        }
        Outputs::Behrend { size, has_3ap, construction, members, .. } => Table {
            columns: vec!["member"],
            rows: members.iter().map(|m| vec![m.to_string()]).collect(),
            summary: vec![
                ("size", size.to_string()),
                ("has_3ap", has_3ap.to_string()),
                ("construction", format!("{construction:?}").replace([' ', ','], "")),
            ],
        },
        Outputs::Apcount { report } => Table {
            columns: vec!["d", "count"],
            rows: report.counts_by_difference.iter().map(|(d, c)| vec![d.to_string(), c.to_string()]).collect(),
            summary: vec![("k", report.k.to_string()), ("total", report.total.to_string())],
        },
        Outputs::Qc5 { window, size, witness } => Table {
            columns: vec!["a", "b", "c", "v0", "v1", "v2", "v3", "v4"],
            rows: witness
                .iter()
                .map(|w| {
                    let mut row = vec![w.a.to_string(), w.b.to_string(), w.c.to_string()];
                    row.extend(w.values().iter().map(i64::to_string));
                    row
                })
                .collect(),
            summary: vec![("window", window.to_string()), ("size", size.to_string())],
        },
        Outputs::Counterexample { report: r } => {
            let mut rows = vec![
                vec!["l".into(), r.l.to_string(), r.l.to_string()],
                vec!["m_b".into(), exact(&r.m_b), float(r.m_b.value())],
                vec!["mu_a".into(), exact(&r.mu_a), float(r.mu_a.value())],
                vec!["integral".into(), exact(&r.integral), float(r.integral.value())],
                vec!["sup_intersection".into(), exact(&r.sup_intersection), float(r.sup_intersection.value())],
                vec!["bound".into(), exact(&r.bound), float(r.bound.value())],
                vec!["n_checked".into(), r.n_checked.to_string(), r.n_checked.to_string()],
                vec!["best_ell".into(), r.best_ell.to_string(), r.best_ell.to_string()],
            ];
            rows.push(vec!["within_bound".into(), r.within_bound.to_string(), u8::from(r.within_bound).to_string()]);
            Table {
                columns: vec!["field", "exact", "value"],
                rows,
                summary: vec![("e", r.e.iter().map(u64::to_string).collect::<Vec<_>>().join(" "))],
            }
        }
        Outputs::Weyl { horizon, average, haar, .. } => Table {
            columns: vec!["horizon", "re", "im", "haar_re", "haar_im"],
            rows: vec![vec![horizon.to_string(), float(average.re), float(average.im), float(haar.re), float(haar.im)]],
            summary: vec![],
        },
        Outputs::Multicorrelation { series, spectrum } => Table {
            columns: vec!["n", "re", "im"],
            rows: complex_rows((0u64..).zip(&series.values)),
            summary: spectrum
                .iter()
                .flat_map(|s| {
                    let atoms = s
                        .atoms
                        .iter()
                        .map(|a| format!("{}:{}", float(a.frequency.to_f64()), float(a.weight)))
                        .collect::<Vec<_>>()
                        .join(" ");
                    [("atoms", atoms), ("continuous_part_mass", float(s.continuous_part_mass))]
                })
                .collect(),
        },
    };
    t.summary.push(("pass", record.pass.to_string()));
    t
}

pub fn write_csv<W: io::Write>(record: &RunRecord, out: W) -> io::Result<()> {
    let t = table(record);
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    w.write_record(&t.columns)?;
    for row in &t.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    let mut out = w.into_inner().map_err(|e| e.into_error())?;
    let summary: Vec<String> = t.summary.iter().map(|(k, v)| format!("{k}={v}")).collect();
    writeln!(out, "# {}", summary.join(","))
}

/// `serde_json` formatter writing floats with 17 significant digits.
struct FixedFloats;

impl serde_json::ser::Formatter for FixedFloats {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{}", float(value))
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn write_json<W: io::Write>(record: &RunRecord, mut out: W) -> io::Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFloats);
    record.serialize(&mut ser)?;
    writeln!(out)
}

pub fn emit(record: &RunRecord, format: Format) -> Vec<u8> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => write_csv(record, &mut buf),
        Format::Json => write_json(record, &mut buf),
    }
    .expect("writing to memory");
    buf
}
