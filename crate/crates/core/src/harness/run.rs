//! Running a configured experiment and writing its CSV and manifest outputs.
//!
//! Numbers are written with `{:.16e}` so reruns compare byte for byte. An
//! infinite SDR (synthesized field equal to the desired one) is written as
//! `null`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::evaluation::{error_map, Experiment, FrequencyResult, SdrSeries};

pub const THREADS_ENV: &str = "SFR_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub index: usize,
    pub path: String,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequency_hz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
    pub created: String,
    pub threads: usize,
    pub files: Vec<OutputFile>,
}

/// What a run produces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunMode {
    /// Sweep, drive signals at every frequency, and maps at the field
    /// frequencies.
    Full,
    /// Only the SDR sweep.
    SweepOnly,
    /// Drive signals and maps at the given frequency only.
    Field(f64),
}

/// Pool size from `SFR_THREADS`; 0 or unset means one thread per core.
pub fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(0),
        Ok(s) if s.trim().is_empty() => Ok(0),
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::config(THREADS_ENV, format!("expected a nonnegative integer, got `{s}`"))),
    }
}

/// Runs `f` on a dedicated pool of `threads` workers (0 = automatic).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}

pub fn config_hash(config: &ExperimentConfig) -> String {
    let canonical = serde_json::to_vec(config).expect("config serializes");
    hex::encode(Sha256::digest(&canonical))
}

pub fn format_sdr(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".to_string()
    }
}

pub fn sdr_csv(series: &SdrSeries) -> String {
    let mut s = String::from("frequency_hz");
    for m in &series.methods {
        s.push(',');
        s.push_str(m);
    }
    s.push('\n');
    for (i, f) in series.frequencies.iter().enumerate() {
        write!(s, "{f:.16e}").unwrap();
        for col in &series.values {
            s.push(',');
            s.push_str(&format_sdr(col[i]));
        }
        s.push('\n');
    }
    s
}

fn freq_tag(f: f64) -> String {
    let t = format!("{f}");
    t.replace('.', "p")
}

struct Writer {
    dir: PathBuf,
    files: Vec<OutputFile>,
}

impl Writer {
    fn write(&mut self, name: String, kind: &str, method: Option<&str>, f: Option<f64>, body: &str) -> Result<()> {
        let path = self.dir.join(&name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        self.files.push(OutputFile {
            index: self.files.len(),
            path: name,
            kind: kind.to_string(),
            method: method.map(str::to_string),
            frequency_hz: f,
        });
        Ok(())
    }

    fn drives(&mut self, r: &FrequencyResult) -> Result<()> {
        for m in &r.methods {
            let mut s = String::from("source,re,im\n");
            for (i, d) in m.drive.d.iter().enumerate() {
                writeln!(s, "{i},{:.16e},{:.16e}", d.re, d.im).unwrap();
            }
            let name = format!("drive_{}_{}.csv", m.name, freq_tag(r.frequency_hz));
            self.write(name, "drive", Some(&m.name), Some(r.frequency_hz), &s)?;
        }
        Ok(())
    }

    fn maps(&mut self, r: &FrequencyResult) -> Result<()> {
        let tag = freq_tag(r.frequency_hz);
        let mut s = String::from("x,y,re,im\n");
        for (p, v) in r.desired.grid.points().iter().zip(&r.desired.values) {
            writeln!(s, "{:.16e},{:.16e},{:.16e},{:.16e}", p.x(), p.y(), v.re, v.im).unwrap();
        }
        self.write(format!("field_desired_{tag}.csv"), "field", None, Some(r.frequency_hz), &s)?;
        for m in &r.methods {
            let mut s = String::from("x,y,re,im\n");
            for (p, v) in m.field.grid.points().iter().zip(&m.field.values) {
                writeln!(s, "{:.16e},{:.16e},{:.16e},{:.16e}", p.x(), p.y(), v.re, v.im).unwrap();
            }
            self.write(format!("field_{}_{tag}.csv", m.name), "field", Some(&m.name), Some(r.frequency_hz), &s)?;

            let err = error_map(&m.field, &r.desired)?;
            let mut s = String::from("x,y,sq_err\n");
            for (p, v) in err.grid.points().iter().zip(&err.values) {
                writeln!(s, "{:.16e},{:.16e},{:.16e}", p.x(), p.y(), v).unwrap();
            }
            self.write(format!("error_{}_{tag}.csv", m.name), "error", Some(&m.name), Some(r.frequency_hz), &s)?;
        }
        Ok(())
    }
}

/// Builds and runs `config`, writing outputs to `out_dir` on a pool of
/// `threads` workers (0 = automatic).
pub fn run(config: &ExperimentConfig, out_dir: &Path, threads: usize, mode: RunMode) -> Result<Manifest> {
    let experiment = config.build()?;
    let frequencies = match mode {
        RunMode::Field(f) => {
            if !(f.is_finite() && f > 0.0) {
                return Err(Error::config("freq", "must be positive"));
            }
            vec![f]
        }
        _ => config.frequency_list()?,
    };
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut w = Writer {
        dir: out_dir.to_path_buf(),
        files: Vec::new(),
    };
    with_threads(threads, || run_in_pool(config, &experiment, &frequencies, mode, &mut w))??;

    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: config_hash(config),
        created: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        threads: rayon_threads(threads),
        files: w.files,
    };
    let path = out_dir.join("manifest.json");
    let body = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, body + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

fn rayon_threads(threads: usize) -> usize {
    if threads == 0 {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    } else {
        threads
    }
}

fn run_in_pool(
    config: &ExperimentConfig,
    experiment: &Experiment,
    frequencies: &[f64],
    mode: RunMode,
    w: &mut Writer,
) -> Result<()> {
    use rayon::prelude::*;
    match mode {
        RunMode::SweepOnly => {
            let series = experiment.sweep(frequencies)?;
            w.write("sdr_sweep.csv".into(), "sdr_sweep", None, None, &sdr_csv(&series))
        }
        RunMode::Field(_) => {
            let r = experiment.evaluate_frequency(frequencies[0])?;
            w.drives(&r)?;
            w.maps(&r)
        }
        RunMode::Full => {
            // Results are written in frequency order after the parallel solve.
            let results: Vec<FrequencyResult> = frequencies
                .par_iter()
                .map(|&f| experiment.evaluate_frequency(f))
                .collect::<Result<_>>()?;
            let series = SdrSeries {
                frequencies: frequencies.to_vec(),
                methods: experiment.methods.iter().map(|m| m.name.clone()).collect(),
                values: (0..experiment.methods.len())
                    .map(|m| results.iter().map(|r| r.methods[m].sdr).collect())
                    .collect(),
            };
            w.write("sdr_sweep.csv".into(), "sdr_sweep", None, None, &sdr_csv(&series))?;
            for r in &results {
                w.drives(r)?;
            }
            for &f in &config.field_frequencies {
                let r = match results.iter().find(|r| (r.frequency_hz - f).abs() < 1e-9) {
                    Some(r) => r.clone(),
                    None => experiment.evaluate_frequency(f)?,
                };
                w.maps(&r)?;
            }
            Ok(())
        }
    }
}
