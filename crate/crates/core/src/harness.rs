//! Experiment sweeps over optimizer × size × noise × instance, with their
//! configuration, persistence and post-processing into resilience fits.
//!
//! Every run draws from its own stream derived from
//! `(master_seed, optimizer, n, noise index, instance)`, so results do not
//! depend on the number of workers or on scheduling.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitlab::{self, DecayFamily, FitReport, FitSpace, ResilienceProfile, TanhFit};
use crate::losses::{LossFunction, LossKind};
use crate::metrics::{self, ArReference, SolvabilityStat};
use crate::noise::{NoiseSpec, NoisyLoss};
use crate::optimizers::{self, OptimizerSpec, PluginRegistry};
use crate::problems::{generate_random_qubo, qubo_to_ising};
use crate::rng;

pub const SWEEP_SCHEMA_VERSION: &str = "vqscale-sweep/1";
pub const CELLS_SCHEMA_VERSION: &str = "vqscale-cells/1";
pub const MANIFEST_SCHEMA_VERSION: &str = "vqscale-manifest/1";

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "VQSCALE_WORKERS";

/// Stream tag for problem instances, shared by all cells.
const INSTANCE_TAG: u64 = 0x1757;

/// Noise columns of a sweep. The noiseless column comes first.
/// Omitted fields of a given `[noise]` table are empty; an omitted table
/// is the default grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseGrid {
    #[serde(default = "yes")]
    pub none: bool,
    #[serde(default)]
    pub sigmas: Vec<f64>,
    /// `[lo, hi, count]`, appended after `sigmas`.
    #[serde(default)]
    pub sigma_logspace: Option<(f64, f64, usize)>,
    #[serde(default)]
    pub shots: Vec<u64>,
}

fn yes() -> bool {
    true
}

impl Default for NoiseGrid {
    fn default() -> Self {
        Self { none: true, sigmas: Vec::new(), sigma_logspace: Some((1e-3, 1e1, 16)), shots: Vec::new() }
    }
}

impl NoiseGrid {
    pub fn specs(&self) -> Vec<NoiseSpec> {
        let mut out = Vec::new();
        if self.none {
            out.push(NoiseSpec::None);
        }
        let mut sig = self.sigmas.clone();
        if let Some((lo, hi, k)) = self.sigma_logspace {
            sig.extend(fitlab::logspace(lo, hi, k));
        }
        out.extend(sig.into_iter().map(|sigma| NoiseSpec::Gaussian { sigma }));
        out.extend(self.shots.iter().map(|&n_shots| NoiseSpec::Shots { n_shots }));
        out
    }
}

fn default_optimizers() -> Vec<OptimizerSpec> {
    OptimizerSpec::defaults()
}

fn default_n_grid() -> Vec<usize> {
    (3..=10).collect()
}

fn default_thresholds() -> Vec<f64> {
    metrics::DEFAULT_THRESHOLDS.to_vec()
}

fn default_instances() -> usize {
    100
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_loss")]
    pub loss: LossKind,
    #[serde(default = "default_n_grid")]
    pub n_grid: Vec<usize>,
    #[serde(default)]
    pub noise: NoiseGrid,
    #[serde(default = "default_optimizers")]
    pub optimizers: Vec<OptimizerSpec>,
    #[serde(default = "default_instances")]
    pub instances: usize,
    #[serde(default = "default_thresholds")]
    pub thresholds: Vec<f64>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
}

fn default_loss() -> LossKind {
    LossKind::Benqo
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            master_seed: 0,
            loss: default_loss(),
            n_grid: default_n_grid(),
            noise: NoiseGrid::default(),
            optimizers: default_optimizers(),
            instances: default_instances(),
            thresholds: default_thresholds(),
            output_dir: default_output(),
        }
    }
}

fn line_of(text: &str, offset: usize) -> u64 {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() as u64 + 1
}

impl ExperimentConfig {
    /// TOML: top-level keys, a `[noise]` table and `[[optimizers]]`
    /// entries tagged by `kind`.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse {
            line: e.span().map_or(0, |s| line_of(text, s.start)),
            message: e.message().to_string(),
        })?;
        Ok(cfg)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line() as u64, message: e.to_string() })
    }

    /// JSON for a `.json` extension, TOML otherwise.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self, registry: &PluginRegistry) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_grid.is_empty() {
            return bad("n_grid is empty".into());
        }
        if let Some(&n) = self.n_grid.iter().find(|&&n| n == 0 || n > crate::problems::MAX_ENUMERATION_BITS) {
            return bad(format!("n = {n} outside 1..={}", crate::problems::MAX_ENUMERATION_BITS));
        }
        if self.loss == LossKind::Qaoa && self.n_grid.iter().any(|n| n % 2 == 1) {
            return bad("QAOA requires n to be even for every grid entry".into());
        }
        let specs = self.noise.specs();
        if specs.is_empty() {
            return bad("noise grid is empty".into());
        }
        for s in &specs {
            s.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.optimizers.is_empty() {
            return bad("optimizer list is empty".into());
        }
        let mut ids = std::collections::BTreeSet::new();
        for o in &self.optimizers {
            o.validate(registry)?;
            if !ids.insert(o.id().to_string()) {
                return bad(format!("optimizer '{}' listed twice", o.id()));
            }
        }
        if self.instances == 0 {
            return bad("instances must be at least 1".into());
        }
        if self.thresholds.is_empty() || self.thresholds.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return bad("thresholds must be a nonempty list in [0, 1]".into());
        }
        Ok(())
    }

    /// Thresholds sorted descending, so success indicators are monotone
    /// along the list.
    pub fn sorted_thresholds(&self) -> Vec<f64> {
        let mut t = self.thresholds.clone();
        t.sort_by(|a, b| b.total_cmp(a));
        t.dedup();
        t
    }
}

/// Worker count from [`WORKERS_ENV`], if set.
pub fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) | Err(_) => Err(Error::Config(format!("{WORKERS_ENV} must be a positive integer, got '{v}'"))),
            Ok(k) => Ok(Some(k)),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellPlan {
    pub optimizer: String,
    pub n: usize,
    pub noise_index: usize,
    pub noise: NoiseSpec,
    pub runs: usize,
}

/// Cells in output order.
pub fn plan(cfg: &ExperimentConfig) -> Vec<CellPlan> {
    let specs = cfg.noise.specs();
    let mut out = Vec::new();
    for o in &cfg.optimizers {
        for &n in &cfg.n_grid {
            for (k, s) in specs.iter().enumerate() {
                out.push(CellPlan { optimizer: o.id().to_string(), n, noise_index: k, noise: *s, runs: cfg.instances });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub optimizer: String,
    pub n: usize,
    pub noise_index: usize,
    pub noise: NoiseSpec,
    pub instance: usize,
    pub instance_seed: u64,
    /// Success indicators, one per threshold in descending order.
    pub x: Vec<u8>,
    pub final_ar: f64,
    pub best_loss: f64,
    pub n_calls: usize,
    pub budget_exhausted: bool,
    pub clamp_events: usize,
    /// Failure message; the indicators are 0 for failed runs.
    pub error: Option<String>,
    /// Not persisted in the records file.
    #[serde(skip)]
    pub wall_time_s: f64,
}

/// Seed of problem instance `instance` at size `n`.
pub fn instance_seed(master: u64, n: usize, instance: usize) -> u64 {
    rng::derive_seed(master, &[INSTANCE_TAG, n as u64, instance as u64])
}

struct Task<'a> {
    opt: &'a OptimizerSpec,
    n: usize,
    noise_index: usize,
    noise: NoiseSpec,
    instance: usize,
}

fn run_task(cfg: &ExperimentConfig, thresholds: &[f64], registry: &PluginRegistry, t: &Task) -> SweepRecord {
    let start = Instant::now();
    let seed = instance_seed(cfg.master_seed, t.n, t.instance);
    let mut rec = SweepRecord {
        optimizer: t.opt.id().to_string(),
        n: t.n,
        noise_index: t.noise_index,
        noise: t.noise,
        instance: t.instance,
        instance_seed: seed,
        x: vec![0; thresholds.len()],
        final_ar: f64::NAN,
        best_loss: f64::NAN,
        n_calls: 0,
        budget_exhausted: false,
        clamp_events: 0,
        error: None,
        wall_time_s: 0.0,
    };
    let outcome = (|| -> Result<()> {
        let ising = qubo_to_ising(&generate_random_qubo(t.n, seed)?);
        let f = LossFunction::new(cfg.loss, ising)?;
        let reference = ArReference::from_table(f.ising(), f.energy_table())?;
        let mut stream = rng::stream(
            cfg.master_seed,
            &[t.opt.stream_id(), t.n as u64, t.noise_index as u64, t.instance as u64],
        );
        let theta0 = optimizers::init_params(f.n_params(), &mut stream);
        let opt_seed: u64 = stream.random();
        let noise_stream = rng::stream_from_seed(stream.random());
        let mut oracle = NoisyLoss::new(&f, t.noise, noise_stream)?;
        let run = optimizers::run(t.opt, &mut oracle, &theta0, registry, opt_seed)?;
        rec.clamp_events = oracle.clamp_events();
        let probs = f.candidate_distribution(&run.theta_final)?;
        let best = metrics::most_probable_state(&probs)?;
        let ar = reference.ratio(f.ising().energy(best)?);
        rec.final_ar = ar;
        rec.x = thresholds.iter().map(|&th| u8::from(metrics::meets_threshold(ar, th))).collect();
        rec.best_loss = run.best_loss;
        rec.n_calls = run.n_calls;
        rec.budget_exhausted = run.flags.budget_exhausted;
        Ok(())
    })();
    if let Err(e) = outcome {
        rec.error = Some(e.to_string());
    }
    rec.wall_time_s = start.elapsed().as_secs_f64();
    rec
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub optimizer: String,
    pub n: usize,
    pub noise_index: usize,
    pub noise: NoiseSpec,
    pub runs: usize,
    pub failures: usize,
    /// One per threshold, over successful runs.
    pub solvability: Vec<SolvabilityStat>,
    pub mean_ar: f64,
    pub mean_calls: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub thresholds: Vec<f64>,
    pub records: Vec<SweepRecord>,
    pub cells: Vec<CellStats>,
}

/// Runs every cell of the configuration. Failures of single runs are kept
/// as records with an error message; only an invalid configuration or a
/// pool that cannot be built aborts.
pub fn run_sweep(cfg: &ExperimentConfig, registry: &PluginRegistry, workers: Option<usize>) -> Result<SweepOutput> {
    cfg.validate(registry)?;
    let thresholds = cfg.sorted_thresholds();
    let specs = cfg.noise.specs();
    let mut tasks = Vec::new();
    for opt in &cfg.optimizers {
        for &n in &cfg.n_grid {
            for (noise_index, &noise) in specs.iter().enumerate() {
                for instance in 0..cfg.instances {
                    tasks.push(Task { opt, n, noise_index, noise, instance });
                }
            }
        }
    }
    let work = || tasks.par_iter().map(|t| run_task(cfg, &thresholds, registry, t)).collect::<Vec<_>>();
    let mut records = match workers {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::ResourceLimit(e.to_string()))?
            .install(work),
        None => work(),
    };
    let order: BTreeMap<&str, usize> =
        cfg.optimizers.iter().enumerate().map(|(i, o)| (o.id(), i)).collect();
    records.sort_by_key(|r| (order[r.optimizer.as_str()], r.n, r.noise_index, r.instance));
    let cells = cell_stats(&records, &thresholds)?;
    Ok(SweepOutput { thresholds, records, cells })
}

/// Groups consecutive records of one cell.
pub fn cell_stats(records: &[SweepRecord], thresholds: &[f64]) -> Result<Vec<CellStats>> {
    let mut out = Vec::new();
    for group in records.chunk_by(|a, b| a.optimizer == b.optimizer && a.n == b.n && a.noise_index == b.noise_index) {
        let ok: Vec<&SweepRecord> = group.iter().filter(|r| r.error.is_none()).collect();
        let solvability = if ok.is_empty() {
            Vec::new()
        } else {
            thresholds
                .iter()
                .enumerate()
                .map(|(k, &t)| metrics::solvability(t, &ok.iter().map(|r| r.x[k]).collect::<Vec<_>>()))
                .collect::<Result<Vec<_>>>()?
        };
        let mean = |f: &dyn Fn(&SweepRecord) -> f64| {
            if ok.is_empty() {
                f64::NAN
            } else {
                ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64
            }
        };
        let first = &group[0];
        out.push(CellStats {
            optimizer: first.optimizer.clone(),
            n: first.n,
            noise_index: first.noise_index,
            noise: first.noise,
            runs: group.len(),
            failures: group.len() - ok.len(),
            solvability,
            mean_ar: mean(&|r| r.final_ar),
            mean_calls: mean(&|r| r.n_calls as f64),
        });
    }
    Ok(out)
}

fn fmt_threshold(t: f64) -> String {
    format!("x_{t}")
}

const FIXED_COLUMNS: [&str; 9] =
    ["schema_version", "optimizer", "n", "noise_kind", "noise_level", "noise_index", "instance", "instance_seed", "final_ar"];
const TAIL_COLUMNS: [&str; 5] = ["best_loss", "n_calls", "budget_exhausted", "clamp_events", "error"];

fn header(thresholds: &[f64]) -> Vec<String> {
    FIXED_COLUMNS
        .iter()
        .map(|s| s.to_string())
        .chain(thresholds.iter().map(|&t| fmt_threshold(t)))
        .chain(TAIL_COLUMNS.iter().map(|s| s.to_string()))
        .collect()
}

fn noise_from_columns(kind: &str, level: &str) -> std::result::Result<NoiseSpec, String> {
    let spec = match kind {
        "none" => NoiseSpec::None,
        "gaussian" => NoiseSpec::Gaussian { sigma: level.parse().map_err(|_| format!("bad sigma '{level}'"))? },
        "shots" => NoiseSpec::Shots { n_shots: level.parse().map_err(|_| format!("bad shot count '{level}'"))? },
        other => return Err(format!("unknown noise kind '{other}'")),
    };
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

fn noise_level_text(s: &NoiseSpec) -> String {
    match *s {
        NoiseSpec::None => "0".into(),
        NoiseSpec::Gaussian { sigma } => format!("{sigma}"),
        NoiseSpec::Shots { n_shots } => n_shots.to_string(),
    }
}

/// Records as CSV. Floats use the shortest round-trip representation, so
/// identical runs give identical bytes.
pub fn write_records<W: Write>(w: W, records: &[SweepRecord], thresholds: &[f64]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header(thresholds))?;
    for r in records {
        if r.x.len() != thresholds.len() {
            return Err(Error::invalid("record indicator count differs from threshold count"));
        }
        let mut row = vec![
            SWEEP_SCHEMA_VERSION.to_string(),
            r.optimizer.clone(),
            r.n.to_string(),
            r.noise.kind_name().to_string(),
            noise_level_text(&r.noise),
            r.noise_index.to_string(),
            r.instance.to_string(),
            r.instance_seed.to_string(),
            format!("{}", r.final_ar),
        ];
        row.extend(r.x.iter().map(u8::to_string));
        row.extend([
            format!("{}", r.best_loss),
            r.n_calls.to_string(),
            r.budget_exhausted.to_string(),
            r.clamp_events.to_string(),
            r.error.clone().unwrap_or_default(),
        ]);
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads records written by [`write_records`]. Returns the thresholds
/// recovered from the header along with the records.
pub fn read_records<R: Read>(r: R) -> Result<(Vec<f64>, Vec<SweepRecord>)> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(r);
    let head = rd.headers().map_err(|e| Error::Parse { line: 1, message: e.to_string() })?.clone();
    let parse_err = |line: u64, message: String| Error::Parse { line, message };
    if head.get(0) != Some("schema_version") {
        return Err(parse_err(1, "first column must be schema_version".into()));
    }
    let nfix = FIXED_COLUMNS.len();
    if head.len() < nfix + TAIL_COLUMNS.len() + 1 {
        return Err(parse_err(1, format!("expected at least {} columns", nfix + TAIL_COLUMNS.len() + 1)));
    }
    let nt = head.len() - nfix - TAIL_COLUMNS.len();
    let mut thresholds = Vec::with_capacity(nt);
    for (i, name) in head.iter().enumerate() {
        let want = if i < nfix {
            Some(FIXED_COLUMNS[i])
        } else if i >= nfix + nt {
            Some(TAIL_COLUMNS[i - nfix - nt])
        } else {
            let t = name
                .strip_prefix("x_")
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| parse_err(1, format!("column '{name}' is not an indicator column x_<t>")))?;
            thresholds.push(t);
            None
        };
        if let Some(w) = want {
            if name != w {
                return Err(parse_err(1, format!("column {} is '{name}', expected '{w}'", i + 1)));
            }
        }
    }
    let mut records = Vec::new();
    for row in rd.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let version = &row[0];
        if version != SWEEP_SCHEMA_VERSION {
            return Err(Error::SchemaVersion { expected: SWEEP_SCHEMA_VERSION.into(), found: version.into() });
        }
        let num = |i: usize| -> Result<u64> {
            row[i].parse().map_err(|_| parse_err(line, format!("column {} '{}' is not an integer", &head[i], &row[i])))
        };
        let real = |i: usize| -> Result<f64> {
            row[i].parse().map_err(|_| parse_err(line, format!("column {} '{}' is not a number", &head[i], &row[i])))
        };
        let x = (0..nt)
            .map(|k| match &row[nfix + k] {
                "0" => Ok(0u8),
                "1" => Ok(1u8),
                v => Err(parse_err(line, format!("indicator '{v}' is not 0 or 1"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let tail = nfix + nt;
        let budget_exhausted = match &row[tail + 2] {
            "true" => true,
            "false" => false,
            v => return Err(parse_err(line, format!("'{v}' is not a boolean"))),
        };
        let error = (!row[tail + 4].is_empty()).then(|| row[tail + 4].to_string());
        records.push(SweepRecord {
            optimizer: row[1].to_string(),
            n: num(2)? as usize,
            noise: noise_from_columns(&row[3], &row[4]).map_err(|m| parse_err(line, m))?,
            noise_index: num(5)? as usize,
            instance: num(6)? as usize,
            instance_seed: num(7)?,
            final_ar: real(8)?,
            x,
            best_loss: real(tail)?,
            n_calls: num(tail + 1)? as usize,
            budget_exhausted,
            clamp_events: num(tail + 3)? as usize,
            error,
            wall_time_s: 0.0,
        });
    }
    Ok((thresholds, records))
}

pub fn save_records(path: &Path, records: &[SweepRecord], thresholds: &[f64]) -> Result<()> {
    write_records(std::fs::File::create(path)?, records, thresholds)
}

pub fn load_records(path: &Path) -> Result<(Vec<f64>, Vec<SweepRecord>)> {
    read_records(std::fs::File::open(path)?)
}

/// Per-cell summary: `p_hat` and its standard error per threshold.
pub fn write_cells<W: Write>(w: W, cells: &[CellStats], thresholds: &[f64]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut head: Vec<String> =
        ["schema_version", "optimizer", "n", "noise_kind", "noise_level", "noise_index", "runs", "failures"]
            .iter()
            .map(|s| s.to_string())
            .collect();
    for &t in thresholds {
        head.push(format!("p_hat_{t}"));
        head.push(format!("std_err_{t}"));
    }
    head.extend(["mean_ar".into(), "mean_calls".into()]);
    out.write_record(&head)?;
    for c in cells {
        let mut row = vec![
            CELLS_SCHEMA_VERSION.to_string(),
            c.optimizer.clone(),
            c.n.to_string(),
            c.noise.kind_name().into(),
            noise_level_text(&c.noise),
            c.noise_index.to_string(),
            c.runs.to_string(),
            c.failures.to_string(),
        ];
        for k in 0..thresholds.len() {
            match c.solvability.get(k) {
                Some(s) => row.extend([format!("{}", s.p_hat), format!("{}", s.std_err)]),
                None => row.extend(["NaN".into(), "NaN".into()]),
            }
        }
        row.extend([format!("{}", c.mean_ar), format!("{}", c.mean_calls)]);
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Wall-clock seconds per run, kept apart from the deterministic records.
pub fn write_timings<W: Write>(w: W, records: &[SweepRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["optimizer", "n", "noise_index", "instance", "wall_time_s"])?;
    for r in records {
        out.write_record([
            r.optimizer.clone(),
            r.n.to_string(),
            r.noise_index.to_string(),
            r.instance.to_string(),
            format!("{:.6}", r.wall_time_s),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Reproducibility record written next to every artifact set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: String,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub master_seed: u64,
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, master_seed: u64, config: serde_json::Value, outputs: Vec<String>) -> Self {
        Self {
            schema_version: MANIFEST_SCHEMA_VERSION.into(),
            tool: "vqscale".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            master_seed,
            config,
            outputs,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

/// Writes records, cell summary, timings and manifest into `dir`.
pub fn persist_sweep(dir: &Path, cfg: &ExperimentConfig, out: &SweepOutput) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let paths = [dir.join("records.csv"), dir.join("cells.csv"), dir.join("timings.csv")];
    save_records(&paths[0], &out.records, &out.thresholds)?;
    write_cells(std::fs::File::create(&paths[1])?, &out.cells, &out.thresholds)?;
    write_timings(std::fs::File::create(&paths[2])?, &out.records)?;
    let names = paths.iter().filter_map(|p| p.file_name()).map(|s| s.to_string_lossy().into_owned()).collect();
    let manifest = Manifest::new("sweep", cfg.master_seed, serde_json::to_value(cfg)?, names);
    let mpath = dir.join("manifest.json");
    manifest.save(&mpath)?;
    let mut all = paths.to_vec();
    all.push(mpath);
    Ok(all)
}

/// One optimizer and size: the sigmoid over Gaussian noise levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub optimizer: String,
    pub n: usize,
    pub threshold: f64,
    pub sigmas: Vec<f64>,
    pub p_hats: Vec<f64>,
    pub fit: Option<TanhFit>,
    pub resilience: Option<ResilienceProfile>,
    pub error: Option<String>,
}

/// Fits the sigmoid of each `(optimizer, n)` at threshold index `t_index`,
/// using the Gaussian cells only.
pub fn resilience_boundaries(cells: &[CellStats], thresholds: &[f64], t_index: usize) -> Result<Vec<BoundaryPoint>> {
    let t = *thresholds
        .get(t_index)
        .ok_or_else(|| Error::invalid(format!("threshold index {t_index} out of range")))?;
    let mut groups: BTreeMap<(String, usize), Vec<&CellStats>> = BTreeMap::new();
    for c in cells {
        if matches!(c.noise, NoiseSpec::Gaussian { .. }) && !c.solvability.is_empty() {
            groups.entry((c.optimizer.clone(), c.n)).or_default().push(c);
        }
    }
    let mut out = Vec::new();
    for ((optimizer, n), mut cs) in groups {
        cs.sort_by(|a, b| a.noise.level().total_cmp(&b.noise.level()));
        let sigmas: Vec<f64> = cs.iter().map(|c| c.noise.level()).collect();
        let p_hats: Vec<f64> = cs.iter().map(|c| c.solvability[t_index].p_hat).collect();
        let runs = cs.iter().map(|c| c.runs - c.failures).min().unwrap_or(1);
        let weights = fitlab::solvability_sigmas(&p_hats, runs);
        let (fit, resilience, error) = match fitlab::fit_tanh(&sigmas, &p_hats, Some(&weights)) {
            Ok(f) => {
                let r = fitlab::resilience_metrics(&f)?;
                (Some(f), Some(r), None)
            }
            Err(e) => (None, None, Some(e.to_string())),
        };
        out.push(BoundaryPoint { optimizer, n, threshold: t, sigmas, p_hats, fit, resilience, error });
    }
    Ok(out)
}

/// Uncensored `(n, σ*)` per optimizer, ready for decay fits.
pub fn boundary_curves(points: &[BoundaryPoint]) -> Vec<(String, Vec<(f64, f64)>)> {
    let mut m: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for p in points {
        if let Some(r) = p.resilience.filter(|r| !r.censored) {
            m.entry(p.optimizer.clone()).or_default().push((p.n as f64, r.sigma_star));
        }
    }
    m.into_iter().collect()
}

/// Sigmoid fits plus the decay table, as emitted by the `fit` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFitReport {
    pub schema_version: String,
    pub threshold: f64,
    pub boundaries: Vec<BoundaryPoint>,
    pub decay: FitReport,
}

pub fn fit_sweep(cells: &[CellStats], thresholds: &[f64], t_index: usize, space: FitSpace) -> Result<SweepFitReport> {
    let boundaries = resilience_boundaries(cells, thresholds, t_index)?;
    let decay = fitlab::decay_report(&boundary_curves(&boundaries), space);
    Ok(SweepFitReport {
        schema_version: fitlab::FIT_SCHEMA_VERSION.into(),
        threshold: thresholds[t_index],
        boundaries,
        decay,
    })
}

/// Looks up one decay fit in a report.
pub fn decay_entry<'a>(r: &'a FitReport, optimizer: &str, family: DecayFamily) -> Option<&'a fitlab::FitReportEntry> {
    r.entries.iter().find(|e| e.optimizer == optimizer && e.family == family)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ExperimentConfig {
        ExperimentConfig {
            master_seed: 7,
            n_grid: vec![3, 4],
            noise: NoiseGrid { none: true, sigmas: vec![0.1], sigma_logspace: None, shots: vec![64] },
            optimizers: vec![OptimizerSpec::ngd(), OptimizerSpec::Nft(Default::default())],
            instances: 3,
            ..Default::default()
        }
    }

    fn csv_bytes(out: &SweepOutput) -> Vec<u8> {
        let mut b = Vec::new();
        write_records(&mut b, &out.records, &out.thresholds).unwrap();
        b
    }

    #[test]
    fn default_grid_shape() {
        let c = ExperimentConfig::default();
        let specs = c.noise.specs();
        assert_eq!(specs.len(), 17);
        assert_eq!(specs[0], NoiseSpec::None);
        assert_eq!(c.n_grid, (3..=10).collect::<Vec<_>>());
        assert_eq!(c.instances, 100);
        c.validate(&PluginRegistry::new()).unwrap();
    }

    #[test]
    fn plan_matches_records() {
        let cfg = tiny();
        let p = plan(&cfg);
        assert_eq!(p.len(), 2 * 2 * 3);
        let out = run_sweep(&cfg, &PluginRegistry::new(), Some(2)).unwrap();
        assert_eq!(out.records.len(), 12 * 3);
        assert_eq!(out.cells.len(), 12);
        for (c, pl) in out.cells.iter().zip(&p) {
            assert_eq!((c.optimizer.as_str(), c.n, c.noise_index), (pl.optimizer.as_str(), pl.n, pl.noise_index));
        }
        for r in &out.records {
            assert!(r.error.is_none(), "{:?}", r.error);
            assert!(r.x.windows(2).all(|w| w[0] <= w[1]));
            if r.optimizer == "ngd" {
                assert_eq!(r.n_calls, (2 * r.n + 1) * 20);
            } else {
                assert!(r.n_calls <= 1024);
            }
        }
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let cfg = tiny();
        let reg = PluginRegistry::new();
        let a = run_sweep(&cfg, &reg, Some(1)).unwrap();
        let b = run_sweep(&cfg, &reg, Some(4)).unwrap();
        assert_eq!(csv_bytes(&a), csv_bytes(&b));
    }

    #[test]
    fn csv_round_trip() {
        let out = run_sweep(&tiny(), &PluginRegistry::new(), None).unwrap();
        let bytes = csv_bytes(&out);
        let (t, recs) = read_records(bytes.as_slice()).unwrap();
        assert_eq!(t, out.thresholds);
        assert_eq!(recs.len(), out.records.len());
        for (a, b) in recs.iter().zip(&out.records) {
            assert_eq!(SweepRecord { wall_time_s: 0.0, ..b.clone() }, *a);
        }
    }

    #[test]
    fn empty_is_header_only() {
        let t = metrics::DEFAULT_THRESHOLDS;
        let mut b = Vec::new();
        write_records(&mut b, &[], &t).unwrap();
        let s = String::from_utf8(b).unwrap();
        assert_eq!(s.lines().count(), 1);
        let (tt, recs) = read_records(s.as_bytes()).unwrap();
        assert!(recs.is_empty());
        assert_eq!(tt, t.to_vec());
    }

    #[test]
    fn load_errors() {
        let out = run_sweep(
            &ExperimentConfig { instances: 1, n_grid: vec![3], optimizers: vec![OptimizerSpec::ngd()], ..tiny() },
            &PluginRegistry::new(),
            None,
        )
        .unwrap();
        let s = String::from_utf8(csv_bytes(&out)).unwrap();
        let wrong = s.replace(SWEEP_SCHEMA_VERSION, "vqscale-sweep/0");
        assert!(matches!(read_records(wrong.as_bytes()), Err(Error::SchemaVersion { .. })));
        let mut lines: Vec<String> = s.lines().map(String::from).collect();
        lines[2] = lines[2].replacen(",3,", ",three,", 1);
        match read_records(lines.join("\n").as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(read_records("a,b\n1,2\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn config_formats() {
        let text = r#"
master_seed = 5
loss = "vqe2l"
n_grid = [3, 4]
instances = 2

[noise]
none = true
sigmas = [0.1, 1.0]
shots = [256]

[[optimizers]]
kind = "ngd"
k_max = 10

[[optimizers]]
kind = "spsa"
iterations = 50
"#;
        let c = ExperimentConfig::from_toml_str(text).unwrap();
        assert_eq!(c.master_seed, 5);
        assert_eq!(c.loss, LossKind::Vqe2l);
        assert_eq!(c.noise.specs().len(), 4);
        assert_eq!(c.optimizers[0], OptimizerSpec::Ngd { k_max: 10 });
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(ExperimentConfig::from_json_str(&json).unwrap(), c);
        let back = ExperimentConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, c);

        match ExperimentConfig::from_toml_str("master_seed = 1\n\nbogus = 3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let reg = PluginRegistry::new();
        assert!(ExperimentConfig { instances: 0, ..tiny() }.validate(&reg).is_err());
        assert!(ExperimentConfig { n_grid: vec![], ..tiny() }.validate(&reg).is_err());
        assert!(ExperimentConfig { loss: LossKind::Qaoa, n_grid: vec![3], ..tiny() }.validate(&reg).is_err());
        let dup = ExperimentConfig { optimizers: vec![OptimizerSpec::ngd(), OptimizerSpec::ngd()], ..tiny() };
        assert!(dup.validate(&reg).is_err());
    }

    fn single_flip_minima(m: &crate::problems::IsingModel) -> usize {
        let t = m.energy_table().unwrap();
        (0..t.len()).filter(|&i| (0..m.n()).all(|b| t[i ^ (1 << b)] >= t[i])).count()
    }

    #[test]
    fn noiseless_nft_reaches_a_single_flip_minimum() {
        let cfg = ExperimentConfig {
            master_seed: 1,
            n_grid: vec![3],
            noise: NoiseGrid { none: true, sigmas: vec![], sigma_logspace: None, shots: vec![] },
            optimizers: vec![OptimizerSpec::Nft(Default::default())],
            instances: 100,
            ..Default::default()
        };
        let out = run_sweep(&cfg, &PluginRegistry::new(), None).unwrap();
        // exact coordinate minimization ends on a vertex that no single flip
        // improves, so a unique such vertex is always found
        let mut unique = 0;
        for r in &out.records {
            let m = qubo_to_ising(&generate_random_qubo(r.n, r.instance_seed).unwrap());
            if single_flip_minima(&m) == 1 {
                unique += 1;
                assert_eq!(r.x[0], 1, "instance {}", r.instance);
            }
        }
        assert!(unique > 0);
        // regression bound from the first trusted run (0.69)
        assert!(out.cells[0].solvability[0].p_hat >= 0.6, "{:?}", out.cells[0].solvability[0]);
    }

    #[test]
    fn instances_shared_across_cells() {
        let out = run_sweep(&tiny(), &PluginRegistry::new(), None).unwrap();
        let seeds = |opt: &str, k: usize| -> Vec<u64> {
            out.records.iter().filter(|r| r.optimizer == opt && r.noise_index == k).map(|r| r.instance_seed).collect()
        };
        assert_eq!(seeds("ngd", 0), seeds("nft", 2));
    }
}
