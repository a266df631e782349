//! Trajectory and grid serialization.
//!
//! CSV columns are fixed: `t`, then `p1..pm`, `q1..qn`, `x1..xm`, `y1..yn`,
//! then `energy,kl,tv,dg,dissipation,w_min`. Floats use 17 significant
//! digits so doubles round-trip exactly. Missing values are empty fields.

use std::io::Write;

use anyhow::Context;
use omwu_core::dynamics::StepRecord;
use serde::Serialize;

use crate::manifest::Format;

/// Shortest exact text for a double: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn trajectory_header(m: usize, n: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for (prefix, len) in [("p", m), ("q", n), ("x", m), ("y", n)] {
        h.extend((1..=len).map(|i| format!("{prefix}{i}")));
    }
    h.extend(["energy", "kl", "tv", "dg", "dissipation", "w_min"].map(String::from));
    h
}

#[derive(Serialize)]
struct NdjsonRecord<'a> {
    t: usize,
    p: &'a [f64],
    q: &'a [f64],
    x: &'a [f64],
    y: &'a [f64],
    energy: f64,
    kl: Option<f64>,
    tv: Option<f64>,
    dg: f64,
    dissipation: f64,
    w_min: f64,
}

pub enum TrajectoryWriter<W: Write> {
    Csv(Box<csv::Writer<W>>),
    Ndjson(W),
}

impl<W: Write> TrajectoryWriter<W> {
    pub fn new(inner: W, format: Format, m: usize, n: usize) -> anyhow::Result<Self> {
        Ok(match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(inner);
                w.write_record(trajectory_header(m, n))?;
                TrajectoryWriter::Csv(Box::new(w))
            }
            Format::Ndjson => TrajectoryWriter::Ndjson(inner),
        })
    }

    pub fn write(&mut self, r: &StepRecord) -> anyhow::Result<()> {
        match self {
            TrajectoryWriter::Csv(w) => {
                let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
                let mut row = vec![r.t.to_string()];
                row.extend(r.w.p().iter().chain(r.w.q()).chain(&r.z.x).chain(&r.z.y).map(|&v| fmt_f64(v)));
                row.extend([fmt_f64(r.energy), opt(r.kl), opt(r.tv), fmt_f64(r.dg), fmt_f64(r.dissipation), fmt_f64(r.w_min)]);
                w.write_record(&row)?;
            }
            TrajectoryWriter::Ndjson(w) => {
                let rec = NdjsonRecord {
                    t: r.t,
                    p: r.w.p(),
                    q: r.w.q(),
                    x: &r.z.x,
                    y: &r.z.y,
                    energy: r.energy,
                    kl: r.kl,
                    tv: r.tv,
                    dg: r.dg,
                    dissipation: r.dissipation,
                    w_min: r.w_min,
                };
                serde_json::to_writer(&mut *w, &rec)?;
                w.write_all(b"\n")?;
            }
        }
        Ok(())
    }

    pub fn finish(self) -> anyhow::Result<()> {
        match self {
            TrajectoryWriter::Csv(mut w) => w.flush()?,
            TrajectoryWriter::Ndjson(mut w) => w.flush()?,
        }
        Ok(())
    }
}

/// Pretty JSON with a trailing newline.
pub fn write_json(path: &std::path::Path, value: &impl Serialize) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
