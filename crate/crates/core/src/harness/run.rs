//! Sweep execution and result tables.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Mode, SweepPoint};
use super::sim::simulate;
use crate::error::{Error, Result};
use crate::metrics::{batch_stats, BatchStats};
use crate::rng::SeedStream;

/// CSV header, in column order.
pub const COLUMNS: [&str; 13] = [
    "beta", "enob", "format", "symbol_rate", "seed", "batch", "snr_db_x", "snr_db_y", "snr_db", "gmi_4d", "se", "mode", "flags",
];

/// One `(sweep point, mode, seed, batch)` cell. Failed cells keep NaN
/// metrics and a non-empty `flags`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub beta: f64,
    pub enob: f64,
    pub format: usize,
    pub symbol_rate: f64,
    pub seed: u64,
    pub batch: usize,
    pub snr_db_x: f64,
    pub snr_db_y: f64,
    pub snr_db: f64,
    pub gmi_4d: f64,
    pub se: f64,
    pub mode: Mode,
    pub flags: String,
}

impl ResultRow {
    pub fn is_flagged(&self) -> bool {
        !self.flags.is_empty()
    }

    fn sort_key(&self, other: &Self) -> std::cmp::Ordering {
        self.beta
            .total_cmp(&other.beta)
            .then(self.enob.total_cmp(&other.enob))
            .then(self.format.cmp(&other.format))
            .then(self.symbol_rate.total_cmp(&other.symbol_rate))
            .then(self.seed.cmp(&other.seed))
            .then(self.batch.cmp(&other.batch))
            .then(self.mode.cmp(&other.mode))
    }

    /// Numeric payload of the row equals `other` to within `rel` relative error.
    pub fn approx_eq(&self, other: &Self, rel: f64) -> bool {
        let close = |a: f64, b: f64| (a.is_nan() && b.is_nan()) || a == b || (a - b).abs() <= rel * a.abs().max(b.abs());
        close(self.beta, other.beta)
            && close(self.enob, other.enob)
            && self.format == other.format
            && close(self.symbol_rate, other.symbol_rate)
            && self.seed == other.seed
            && self.batch == other.batch
            && close(self.snr_db_x, other.snr_db_x)
            && close(self.snr_db_y, other.snr_db_y)
            && close(self.snr_db, other.snr_db)
            && close(self.gmi_4d, other.gmi_4d)
            && close(self.se, other.se)
            && self.mode == other.mode
            && self.flags == other.flags
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn flagged(&self) -> usize {
        self.rows.iter().filter(|r| r.is_flagged()).count()
    }

    /// Mean and spread over seeds and batches per `(sweep point, mode)`,
    /// ignoring flagged rows. Returns `(point, mode, snr stats, gmi stats)`.
    pub fn summarize(&self) -> Vec<(SweepPoint, Mode, BatchStats, BatchStats)> {
        let mut out: Vec<(SweepPoint, Mode, Vec<f64>, Vec<f64>)> = Vec::new();
        for r in self.rows.iter().filter(|r| !r.is_flagged()) {
            let p = SweepPoint { beta: r.beta, enob: r.enob, format: r.format, symbol_rate: r.symbol_rate };
            match out.iter_mut().find(|e| e.0 == p && e.1 == r.mode) {
                Some(e) => {
                    e.2.push(r.snr_db);
                    e.3.push(r.gmi_4d);
                }
                None => out.push((p, r.mode, vec![r.snr_db], vec![r.gmi_4d])),
            }
        }
        out.into_iter().map(|(p, m, s, g)| (p, m, batch_stats(&s), batch_stats(&g))).collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOptions {
    /// Replaces the configured seed list with `[seed]`.
    pub seed_override: Option<u64>,
    /// Worker threads; `None` uses all cores.
    pub jobs: Option<usize>,
}

fn flag_for(e: &Error) -> &'static str {
    match e {
        Error::SyncFailure { .. } => "sync_failure",
        Error::FoeRange { .. } => "foe_range",
        Error::Diverged { .. } => "diverged",
        _ => "error",
    }
}

/// Seed stream of one `(seed, batch)` realization.
pub fn batch_stream(seed: u64, batch: usize) -> SeedStream {
    SeedStream::new(seed).child(&format!("batch/{batch}"))
}

fn run_cell(cfg: &ExperimentConfig, point: &SweepPoint, seed: u64, batch: usize) -> Vec<ResultRow> {
    let row = |mode: Mode, m: Option<(f64, f64, f64, f64, f64)>, flags: String| {
        let (x, y, s, g, se) = m.unwrap_or((f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN));
        ResultRow {
            beta: point.beta,
            enob: point.enob,
            format: point.format,
            symbol_rate: point.symbol_rate,
            seed,
            batch,
            snr_db_x: x,
            snr_db_y: y,
            snr_db: s,
            gmi_4d: g,
            se,
            mode,
            flags,
        }
    };
    let setup = match cfg.link(point) {
        Ok(s) => s,
        Err(e) => return cfg.sweep.modes.iter().map(|&m| row(m, None, flag_for(&e).into())).collect(),
    };
    let realization = match simulate::<f64>(&setup, &batch_stream(seed, batch)) {
        Ok(r) => r,
        Err(e) => return cfg.sweep.modes.iter().map(|&m| row(m, None, flag_for(&e).into())).collect(),
    };
    cfg.sweep
        .modes
        .iter()
        .map(|&mode| match realization.receive(mode.receiver(), &setup.dsp) {
            Ok((rep, out)) => {
                let flags = if out.diagnostics.cycle_slips.is_empty() { String::new() } else { "cycle_slip".into() };
                row(mode, Some((rep.snr_db_x, rep.snr_db_y, rep.snr_db, rep.gmi_bits_per_4d, rep.se_bits_per_s_hz)), flags)
            }
            Err(e) => row(mode, None, flag_for(&e).into()),
        })
        .collect()
}

/// Runs every cell of the sweep. The output is sorted by sweep keys, then
/// seed, batch and mode, so it does not depend on the degree of parallelism.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ResultTable> {
    let mut cfg = cfg.clone();
    if let Some(s) = opts.seed_override {
        cfg.seeds = vec![s];
    }
    cfg.validate()?;
    let mut jobs = Vec::new();
    for point in cfg.grid() {
        for &seed in &cfg.seeds {
            for batch in 0..cfg.batches {
                jobs.push((point, seed, batch));
            }
        }
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.jobs {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let mut rows: Vec<ResultRow> =
        pool.install(|| jobs.par_iter().flat_map_iter(|(p, s, b)| run_cell(&cfg, p, *s, *b)).collect());
    rows.sort_by(|a, b| a.sort_key(b));
    Ok(ResultTable { rows })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    JsonLines,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json-lines" | "jsonl" => Ok(OutputFormat::JsonLines),
            other => Err(Error::Parse(format!("unknown output format {other:?}"))),
        }
    }
}

fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v}")
    }
}

fn csv_record(r: &ResultRow) -> [String; 13] {
    [
        fmt_f64(r.beta),
        fmt_f64(r.enob),
        r.format.to_string(),
        fmt_f64(r.symbol_rate),
        r.seed.to_string(),
        r.batch.to_string(),
        fmt_f64(r.snr_db_x),
        fmt_f64(r.snr_db_y),
        fmt_f64(r.snr_db),
        fmt_f64(r.gmi_4d),
        fmt_f64(r.se),
        r.mode.as_str().into(),
        r.flags.clone(),
    ]
}

fn json_value(v: f64) -> serde_json::Value {
    // JSON has no NaN or infinities
    serde_json::Number::from_f64(v).map(serde_json::Value::Number).unwrap_or(serde_json::Value::Null)
}

fn json_record(r: &ResultRow) -> serde_json::Value {
    let mut m = serde_json::Map::new();
    m.insert("beta".into(), json_value(r.beta));
    m.insert("enob".into(), json_value(r.enob));
    m.insert("format".into(), r.format.into());
    m.insert("symbol_rate".into(), json_value(r.symbol_rate));
    m.insert("seed".into(), r.seed.into());
    m.insert("batch".into(), r.batch.into());
    m.insert("snr_db_x".into(), json_value(r.snr_db_x));
    m.insert("snr_db_y".into(), json_value(r.snr_db_y));
    m.insert("snr_db".into(), json_value(r.snr_db));
    m.insert("gmi_4d".into(), json_value(r.gmi_4d));
    m.insert("se".into(), json_value(r.se));
    m.insert("mode".into(), r.mode.as_str().into());
    m.insert("flags".into(), r.flags.clone().into());
    serde_json::Value::Object(m)
}

/// Serializes the table.
pub fn write_results<W: Write>(table: &ResultTable, format: OutputFormat, mut out: W) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(COLUMNS).map_err(|e| Error::Io(e.into()))?;
            for r in &table.rows {
                w.write_record(csv_record(r)).map_err(|e| Error::Io(e.into()))?;
            }
            w.flush()?;
        }
        OutputFormat::JsonLines => {
            for r in &table.rows {
                serde_json::to_writer(&mut out, &json_record(r)).map_err(|e| Error::Io(e.into()))?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

/// Writes the table to `path` (`-` for standard output).
pub fn emit_results(table: &ResultTable, format: OutputFormat, path: &Path) -> Result<()> {
    if path.as_os_str() == "-" {
        let stdout = std::io::stdout();
        return write_results(table, format, stdout.lock());
    }
    let file = std::fs::File::create(path)?;
    write_results(table, format, std::io::BufWriter::new(file))
}

fn parse_f64(s: &str, col: &str) -> Result<f64> {
    s.parse::<f64>().map_err(|_| Error::Parse(format!("column {col}: not a number: {s:?}")))
}

fn parse_int<I: std::str::FromStr>(s: &str, col: &str) -> Result<I> {
    s.parse::<I>().map_err(|_| Error::Parse(format!("column {col}: not an integer: {s:?}")))
}

/// Parses a CSV table written by [`write_results`].
pub fn parse_csv<R: std::io::Read>(input: R) -> Result<ResultTable> {
    let mut reader = csv::Reader::from_reader(input);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    if header != COLUMNS {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let f = |i: usize| parse_f64(&rec[i], COLUMNS[i]);
        rows.push(ResultRow {
            beta: f(0)?,
            enob: f(1)?,
            format: parse_int(&rec[2], COLUMNS[2])?,
            symbol_rate: f(3)?,
            seed: parse_int(&rec[4], COLUMNS[4])?,
            batch: parse_int(&rec[5], COLUMNS[5])?,
            snr_db_x: f(6)?,
            snr_db_y: f(7)?,
            snr_db: f(8)?,
            gmi_4d: f(9)?,
            se: f(10)?,
            mode: Mode::parse(&rec[11])?,
            flags: rec[12].to_string(),
        });
    }
    Ok(ResultTable { rows })
}

/// Parses a json-lines table written by [`write_results`].
pub fn parse_json_lines<R: std::io::BufRead>(input: R) -> Result<ResultTable> {
    let mut rows = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: serde_json::Value = serde_json::from_str(&line).map_err(|e| Error::Parse(e.to_string()))?;
        let num = |k: &str| -> Result<f64> {
            match v.get(k) {
                Some(serde_json::Value::Null) => Ok(f64::NAN),
                Some(x) => x.as_f64().ok_or_else(|| Error::Parse(format!("field {k} is not a number"))),
                None => Err(Error::Parse(format!("missing field {k}"))),
            }
        };
        let int = |k: &str| -> Result<u64> { v.get(k).and_then(|x| x.as_u64()).ok_or_else(|| Error::Parse(format!("field {k} is not an integer"))) };
        let text = |k: &str| -> Result<String> {
            v.get(k).and_then(|x| x.as_str()).map(String::from).ok_or_else(|| Error::Parse(format!("field {k} is not a string")))
        };
        rows.push(ResultRow {
            beta: num("beta")?,
            enob: num("enob")?,
            format: int("format")? as usize,
            symbol_rate: num("symbol_rate")?,
            seed: int("seed")?,
            batch: int("batch")? as usize,
            snr_db_x: num("snr_db_x")?,
            snr_db_y: num("snr_db_y")?,
            snr_db: num("snr_db")?,
            gmi_4d: num("gmi_4d")?,
            se: num("se")?,
            mode: Mode::parse(&text("mode")?)?,
            flags: text("flags")?,
        });
    }
    Ok(ResultTable { rows })
}

/// Reads a table from disk, choosing the parser from the extension
/// (`.csv` or anything else for json-lines).
pub fn load_results(path: &Path) -> Result<ResultTable> {
    let file = std::fs::File::open(path)?;
    if path.extension().and_then(|e| e.to_str()) == Some("csv") {
        parse_csv(file)
    } else {
        parse_json_lines(std::io::BufReader::new(file))
    }
}
