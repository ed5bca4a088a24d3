//! `vqscale` command line.
//!
//! Exit status: 0 on success, 1 for usage and configuration errors, 2 when
//! a command fails while running.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use vqscale::fitlab::{self, DecayFamily, FitSpace};
use vqscale::harness::{self, ExperimentConfig, Manifest};
use vqscale::losses::{self, LossKind};
use vqscale::noise::{self, PARAM_RANGE};
use vqscale::optimizers::PluginRegistry;
use vqscale::problems::{self, generate_random_qubo, qubo_to_ising};
use vqscale::{metrics, rng, selfcheck, stats};

#[derive(Parser)]
#[command(name = "vqscale", version, about = "Noise-resilience scaling experiments for variational optimizers")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = harness::WORKERS_ENV)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write seeded random QUBO instances with their exact optima.
    Gen(GenArgs),
    /// Loss and gradient variance over uniformly drawn parameters.
    Variance(VarianceArgs),
    /// Run an optimizer × size × noise × instance sweep.
    Sweep(SweepArgs),
    /// Fit sigmoids and decay laws to sweep output.
    Fit(FitArgs),
    /// Project required shot counts against the sampling ceiling.
    Project(ProjectArgs),
    /// Classical solution-space profile and shot-noise error structure.
    Profile(ProfileArgs),
    /// Run the built-in oracle and invariant checks.
    Validate,
}

#[derive(Args)]
struct GenArgs {
    /// Sizes, as `a..b` (inclusive) or a comma list.
    #[arg(long, default_value = "3..10")]
    n: String,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out/gen")]
    out: PathBuf,
}

#[derive(Args)]
struct VarianceArgs {
    /// Loss kinds; all three when omitted.
    #[arg(long, value_delimiter = ',')]
    loss: Vec<LossKind>,
    #[arg(long, default_value = "3..12")]
    n: String,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Instances averaged per size.
    #[arg(long, default_value_t = 1)]
    instances: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also scan partial-derivative variances.
    #[arg(long)]
    gradient: bool,
    /// Smallest size entering the decay fits.
    #[arg(long, default_value_t = 8)]
    fit_min_n: usize,
    #[arg(long, default_value = "out/variance")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML or JSON experiment file; built-in defaults otherwise.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    instances: Option<usize>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the cell plan and exit.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Args)]
struct FitArgs {
    /// Sweep directory or its records.csv.
    #[arg(long)]
    input: PathBuf,
    /// Success threshold whose solvability is fitted.
    #[arg(long, default_value_t = 1.0)]
    threshold: f64,
    #[arg(long, value_enum, default_value_t = Space::Linear)]
    space: Space,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Space {
    Linear,
    Log,
}

#[derive(Args)]
struct ProjectArgs {
    #[arg(long, default_value_t = 3)]
    n_min: u32,
    #[arg(long, default_value_t = 100)]
    n_max: u32,
    /// Decay families; all when omitted.
    #[arg(long, value_delimiter = ',')]
    family: Vec<DecayFamily>,
    /// Circuit depth for the runtime bound.
    #[arg(long, default_value_t = 1.0)]
    depth: f64,
    /// Gate time in seconds.
    #[arg(long, default_value_t = 100e-9)]
    t_gate: f64,
    /// NGD iterations in the call model.
    #[arg(long, default_value_t = 20.0)]
    k_max: f64,
    /// Prefactor of the sampling-error model `k·exp(rate·n)/√shots`.
    #[arg(long, default_value_t = fitlab::DEFAULT_FS_MODEL.k)]
    fs_k: f64,
    #[arg(long, default_value_t = fitlab::DEFAULT_FS_MODEL.rate)]
    fs_rate: f64,
    #[arg(long, default_value = "out/project")]
    out: PathBuf,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long, default_value = "3..10")]
    n: String,
    #[arg(long, default_value_t = 100)]
    instances: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Thresholds for the solution-space fractions.
    #[arg(long, value_delimiter = ',', default_value = "1,0.99,0.95,0.9")]
    thresholds: Vec<f64>,
    /// Size of the shot-noise error decomposition.
    #[arg(long, default_value_t = 6)]
    error_n: usize,
    #[arg(long, default_value_t = 1024)]
    shots: u64,
    #[arg(long, default_value_t = 100)]
    points: usize,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value = "out/profile")]
    out: PathBuf,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<vqscale::Error> for Failure {
    fn from(e: vqscale::Error) -> Self {
        use vqscale::Error as E;
        match e {
            E::Config(_) | E::Parse { .. } | E::InvalidArgument(_) | E::SchemaVersion { .. } => {
                Failure::Usage(e.into())
            }
            other => Failure::Runtime(other.into()),
        }
    }
}

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

type Out<T = ()> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Out {
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(usage(anyhow!("--workers / {} must be at least 1", harness::WORKERS_ENV)));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| Failure::Runtime(e.into()))?;
    }
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Variance(a) => variance(a),
        Command::Sweep(a) => sweep(a),
        Command::Fit(a) => fit(a),
        Command::Project(a) => project(a),
        Command::Profile(a) => profile(a),
        Command::Validate => validate(),
    }
}

/// `a..b` inclusive, or `a,b,c`.
fn parse_sizes(s: &str) -> Out<Vec<usize>> {
    let bad = || usage(anyhow!("size list '{s}' is not `a..b` or a comma list"));
    let v: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        (a..=b).collect()
    } else {
        s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect::<Out<_>>()?
    };
    if v.is_empty() || v.contains(&0) {
        return Err(bad());
    }
    Ok(v)
}

fn create_dir(dir: &Path) -> Out {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Out {
    let text = serde_json::to_string_pretty(value).map_err(anyhow::Error::from)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn csv_writer(path: &Path) -> Out<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display())).map_err(Failure::Runtime)
}

fn finish(dir: &Path, command: &str, seed: u64, config: serde_json::Value, outputs: &[&str]) -> Out {
    let m = Manifest::new(command, seed, config, outputs.iter().map(|s| s.to_string()).collect());
    m.save(&dir.join("manifest.json"))?;
    for o in outputs {
        println!("wrote {}", dir.join(o).display());
    }
    Ok(())
}

fn gen(a: GenArgs) -> Out {
    let sizes = parse_sizes(&a.n)?;
    if sizes.iter().any(|&n| n > problems::MAX_ENUMERATION_BITS) {
        return Err(usage(anyhow!("sizes above {} cannot be solved exactly", problems::MAX_ENUMERATION_BITS)));
    }
    create_dir(&a.out)?;
    let mut index = csv_writer(&a.out.join("instances.csv"))?;
    index.write_record(["file", "n", "instance", "seed", "c_min", "offset", "argmin"]).map_err(anyhow::Error::from)?;
    for &n in &sizes {
        for k in 0..a.count {
            let seed = harness::instance_seed(a.seed, n, k);
            let q = generate_random_qubo(n, seed)?;
            let m = qubo_to_ising(&q);
            let sol = problems::brute_force_solve(&m)?;
            let name = format!("qubo_n{n}_i{k}.txt");
            std::fs::write(a.out.join(&name), q.to_text()).context("writing instance")?;
            let argmin: Vec<String> = sol.argmin.iter().map(ToString::to_string).collect();
            index
                .write_record([
                    name,
                    n.to_string(),
                    k.to_string(),
                    seed.to_string(),
                    format!("{}", sol.c_min),
                    format!("{}", m.offset()),
                    argmin.join(" "),
                ])
                .map_err(anyhow::Error::from)?;
        }
    }
    index.flush().context("writing index")?;
    let cfg = serde_json::json!({ "n": sizes, "count": a.count, "seed": a.seed });
    finish(&a.out, "gen", a.seed, cfg, &["instances.csv"])
}

#[derive(Serialize)]
struct VarianceFit {
    kind: LossKind,
    quantity: &'static str,
    min_n: usize,
    fits: Vec<fitlab::DecayFit>,
}

fn variance(a: VarianceArgs) -> Out {
    let sizes = parse_sizes(&a.n)?;
    let kinds = if a.loss.is_empty() { LossKind::ALL.to_vec() } else { a.loss.clone() };
    if a.instances == 0 || a.samples < 2 {
        return Err(usage(anyhow!("need at least 1 instance and 2 samples")));
    }
    create_dir(&a.out)?;
    let mut w = csv_writer(&a.out.join("variance.csv"))?;
    w.write_record(["kind", "n", "instances", "samples", "loss_variance", "gradient_variance"])
        .map_err(anyhow::Error::from)?;
    let mut fits = Vec::new();
    for &kind in &kinds {
        let mut curve = Vec::new();
        for &n in &sizes {
            if kind == LossKind::Qaoa && n % 2 == 1 {
                eprintln!("note: skipping QAOA at odd n={n}");
                continue;
            }
            let (mut lv, mut gv) = (0.0, 0.0);
            for s in 0..a.instances {
                let f = noise::scan_instance(kind, n, rng::derive_seed(a.seed, &[s]))?;
                let mut r = rng::stream(a.seed, &[kind as u64, n as u64, s]);
                let v = losses::loss_variance_scan(&f, a.samples, PARAM_RANGE, a.gradient, &mut r)?;
                lv += v.loss_variance / a.instances as f64;
                gv += v.gradient_variance.unwrap_or(f64::NAN) / a.instances as f64;
            }
            w.write_record([
                kind.to_string(),
                n.to_string(),
                a.instances.to_string(),
                a.samples.to_string(),
                format!("{lv}"),
                format!("{gv}"),
            ])
            .map_err(anyhow::Error::from)?;
            curve.push((n, lv, gv));
        }
        let window: Vec<_> = curve.iter().filter(|c| c.0 >= a.fit_min_n).collect();
        let quantities: &[(&str, fn(&(usize, f64, f64)) -> f64)] =
            &[("loss", |c| c.1), ("gradient", |c| c.2)];
        for &(q, get) in quantities.iter().take(if a.gradient { 2 } else { 1 }) {
            let ns: Vec<f64> = window.iter().map(|c| c.0 as f64).collect();
            let vs: Vec<f64> = window.iter().map(|c| get(c)).collect();
            let fs = [DecayFamily::Pl, DecayFamily::Exp]
                .iter()
                .filter_map(|&fam| fitlab::fit_decay(&ns, &vs, fam, FitSpace::Linear).ok())
                .collect();
            fits.push(VarianceFit { kind, quantity: q, min_n: a.fit_min_n, fits: fs });
        }
    }
    w.flush().context("writing variance.csv")?;
    write_json(&a.out.join("variance_fits.json"), &fits)?;
    let cfg = serde_json::json!({
        "loss": kinds, "n": sizes, "samples": a.samples, "instances": a.instances,
        "gradient": a.gradient, "fit_min_n": a.fit_min_n, "range": [PARAM_RANGE.0, PARAM_RANGE.1],
    });
    finish(&a.out, "variance", a.seed, cfg, &["variance.csv", "variance_fits.json"])
}

fn sweep(a: SweepArgs) -> Out {
    let mut cfg = match &a.config {
        Some(p) => {
            if !p.exists() {
                return Err(usage(anyhow!("config file {} not found", p.display())));
            }
            ExperimentConfig::from_path(p)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(s) = a.seed {
        cfg.master_seed = s;
    }
    if let Some(k) = a.instances {
        cfg.instances = k;
    }
    if let Some(o) = a.out {
        cfg.output_dir = o;
    }
    let registry = PluginRegistry::new();
    cfg.validate(&registry)?;
    if a.dry_run {
        return print_plan(&cfg).or_else(|e| match e.kind() {
            std::io::ErrorKind::BrokenPipe => Ok(()),
            _ => Err(Failure::Runtime(e.into())),
        });
    }
    let out = harness::run_sweep(&cfg, &registry, None)?;
    let paths = harness::persist_sweep(&cfg.output_dir, &cfg, &out)?;
    let failures: usize = out.cells.iter().map(|c| c.failures).sum();
    if failures > 0 {
        eprintln!("warning: {failures} runs failed; see the error column of records.csv");
    }
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn print_plan(cfg: &ExperimentConfig) -> std::io::Result<()> {
    use std::io::Write;
    let plan = harness::plan(cfg);
    let runs: usize = plan.iter().map(|c| c.runs).sum();
    let mut w = std::io::BufWriter::new(std::io::stdout().lock());
    writeln!(
        w,
        "{} cells, {runs} runs, loss {}, seed {}, output {}",
        plan.len(),
        cfg.loss,
        cfg.master_seed,
        cfg.output_dir.display()
    )?;
    for c in &plan {
        writeln!(w, "{:<8} n={:<3} noise[{}]={:<16} runs={}", c.optimizer, c.n, c.noise_index, c.noise.to_string(), c.runs)?;
    }
    w.flush()
}

fn fit(a: FitArgs) -> Out {
    let records_path = if a.input.is_dir() { a.input.join("records.csv") } else { a.input.clone() };
    if !records_path.exists() {
        return Err(usage(anyhow!("{} not found", records_path.display())));
    }
    let (thresholds, records) = harness::load_records(&records_path)?;
    let t_index = thresholds
        .iter()
        .position(|&t| (t - a.threshold).abs() < 1e-12)
        .ok_or_else(|| usage(anyhow!("threshold {} not in sweep thresholds {thresholds:?}", a.threshold)))?;
    let cells = harness::cell_stats(&records, &thresholds)?;
    let space = match a.space {
        Space::Linear => FitSpace::Linear,
        Space::Log => FitSpace::Log,
    };
    let report = harness::fit_sweep(&cells, &thresholds, t_index, space)?;
    let dir = a.out.unwrap_or_else(|| records_path.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf));
    create_dir(&dir)?;
    write_json(&dir.join("fits.json"), &report)?;
    let mut w = csv_writer(&dir.join("boundaries.csv"))?;
    w.write_record(["optimizer", "n", "sigma_star", "m_star", "sigma_res", "censored", "p_u", "p_l", "b", "c"])
        .map_err(anyhow::Error::from)?;
    for b in &report.boundaries {
        let (r, f) = match (&b.resilience, &b.fit) {
            (Some(r), Some(f)) => (r, f),
            _ => continue,
        };
        w.write_record([
            b.optimizer.clone(),
            b.n.to_string(),
            format!("{}", r.sigma_star),
            format!("{}", r.m_star),
            r.sigma_res.map_or("NaN".into(), |s| format!("{s}")),
            r.censored.to_string(),
            format!("{}", f.p_u),
            format!("{}", f.p_l),
            format!("{}", f.b),
            format!("{}", f.c),
        ])
        .map_err(anyhow::Error::from)?;
    }
    w.flush().context("writing boundaries.csv")?;
    for e in &report.decay.entries {
        println!(
            "{:<8} {:<4} k*={:.4}±{:.4} γ*={:.4}±{:.4} mse={:.3e}{}",
            e.optimizer,
            e.family,
            e.k_star,
            e.k_err,
            e.gamma_star,
            e.gamma_err,
            e.mse,
            if e.best { " *" } else { "" }
        );
    }
    let cfg = serde_json::json!({
        "input": records_path, "threshold": a.threshold,
        "space": match space { FitSpace::Linear => "linear", FitSpace::Log => "log" },
    });
    finish(&dir, "fit", 0, cfg, &["fits.json", "boundaries.csv"])
}

#[derive(Serialize)]
struct ProjectionReport {
    schema_version: &'static str,
    depth: f64,
    t_gate: f64,
    projections: Vec<fitlab::Projection>,
}

fn project(a: ProjectArgs) -> Out {
    if a.n_min < 2 || a.n_min > a.n_max {
        return Err(usage(anyhow!("need 2 <= n_min <= n_max")));
    }
    let fams = if a.family.is_empty() { DecayFamily::ALL.to_vec() } else { a.family.clone() };
    if !(a.fs_k > 0.0 && a.fs_k.is_finite() && a.fs_rate.is_finite()) {
        return Err(usage(anyhow!("--fs-k must be positive and --fs-rate finite")));
    }
    let calls = fitlab::CallModel { iterations: a.k_max, ..fitlab::NGD_CALLS };
    let fs = fitlab::FsModel { k: a.fs_k, rate: a.fs_rate };
    create_dir(&a.out)?;
    let mut w = csv_writer(&a.out.join("projection.csv"))?;
    w.write_record([
        "family",
        "n",
        "eps_star",
        "required_shots",
        "shot_ceiling",
        "ceiling_feasible",
        "advantage_possible",
        "runtime_s",
    ])
    .map_err(anyhow::Error::from)?;
    let mut projections = Vec::new();
    for fam in fams {
        let p = fitlab::project_shots(&fitlab::default_eps_star(fam), &fs, &calls, a.n_min..=a.n_max)?;
        for r in &p.rows {
            let rt = fitlab::runtime_lower_bound(r.required_shots, calls.calls(f64::from(r.n)), a.depth, a.t_gate)?;
            w.write_record([
                fam.to_string(),
                r.n.to_string(),
                format!("{}", r.eps_star),
                format!("{}", r.required_shots),
                format!("{}", r.shot_ceiling),
                r.ceiling_feasible.to_string(),
                r.advantage_possible.to_string(),
                format!("{rt}"),
            ])
            .map_err(anyhow::Error::from)?;
        }
        match p.window_opens {
            Some(n) => println!("{fam}: window opens at n >= {n}"),
            None => println!("{fam}: no window in range"),
        }
        projections.push(p);
    }
    w.flush().context("writing projection.csv")?;
    let rep = ProjectionReport { schema_version: fitlab::FIT_SCHEMA_VERSION, depth: a.depth, t_gate: a.t_gate, projections };
    write_json(&a.out.join("projection.json"), &rep)?;
    let cfg = serde_json::json!({
        "n_min": a.n_min, "n_max": a.n_max, "depth": a.depth, "t_gate": a.t_gate, "k_max": a.k_max,
        "fs_k": a.fs_k, "fs_rate": a.fs_rate,
    });
    finish(&a.out, "project", 0, cfg, &["projection.csv", "projection.json"])
}

fn profile(a: ProfileArgs) -> Out {
    let sizes = parse_sizes(&a.n)?;
    if a.instances == 0 {
        return Err(usage(anyhow!("instances must be at least 1")));
    }
    if a.thresholds.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(usage(anyhow!("thresholds must lie in [0, 1]")));
    }
    create_dir(&a.out)?;
    let mut fw = csv_writer(&a.out.join("solution_space.csv"))?;
    fw.write_record(["n", "t", "mean_fraction", "std_fraction", "random_guess_p_opt"]).map_err(anyhow::Error::from)?;
    let mut hw = csv_writer(&a.out.join("loss_histogram.csv"))?;
    hw.write_record(["n", "bin_center", "fraction"]).map_err(anyhow::Error::from)?;
    for &n in &sizes {
        let mut fractions = vec![Vec::new(); a.thresholds.len()];
        let mut hist: Vec<(f64, f64)> = Vec::new();
        let mut guess = 0.0;
        for k in 0..a.instances {
            let m = qubo_to_ising(&generate_random_qubo(n, harness::instance_seed(a.seed, n, k))?);
            let p = problems::solution_space_profile(&m, &a.thresholds)?;
            for (acc, f) in fractions.iter_mut().zip(&p.fractions) {
                acc.push(*f);
            }
            if hist.is_empty() {
                hist = p.histogram.iter().map(|&(c, _)| (c, 0.0)).collect();
            }
            for (h, (_, v)) in hist.iter_mut().zip(&p.histogram) {
                h.1 += v / a.instances as f64;
            }
            guess += problems::brute_force_solve(&m)?.argmin.len() as f64 / (1u64 << n) as f64 / a.instances as f64;
        }
        for (t, fs) in a.thresholds.iter().zip(&fractions) {
            let sd = if fs.len() > 1 { stats::sample_std(fs) } else { 0.0 };
            fw.write_record([n.to_string(), format!("{t}"), format!("{}", stats::mean(fs)), format!("{sd}"), format!("{guess}")])
                .map_err(anyhow::Error::from)?;
        }
        for (c, v) in hist {
            hw.write_record([n.to_string(), format!("{c}"), format!("{v}")]).map_err(anyhow::Error::from)?;
        }
    }
    fw.flush().context("writing solution_space.csv")?;
    hw.flush().context("writing loss_histogram.csv")?;

    let f = noise::scan_instance(LossKind::Benqo, a.error_n, a.seed)?;
    let ep = noise::error_decomposition(&f, a.points, a.samples, a.shots, &mut rng::stream(a.seed, &[a.error_n as u64]))?;
    let med = stats::median(&ep.points.iter().map(|p| p.0).collect::<Vec<_>>());
    println!(
        "error std ≈ {:.3e} + {:.3e}·|L̂| at n={} with {} shots (median |L̂| = {med:.3})",
        ep.intercept, ep.slope, a.error_n, a.shots
    );
    write_json(&a.out.join("error_profile.json"), &ep)?;
    let cfg = serde_json::json!({
        "n": sizes, "instances": a.instances, "thresholds": a.thresholds, "error_n": a.error_n,
        "shots": a.shots, "points": a.points, "samples": a.samples,
        "default_thresholds": metrics::DEFAULT_THRESHOLDS,
    });
    finish(&a.out, "profile", a.seed, cfg, &["solution_space.csv", "loss_histogram.csv", "error_profile.json"])
}

fn validate() -> Out {
    let checks = selfcheck::run_all();
    for c in &checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    if failed > 0 {
        return Err(Failure::Runtime(anyhow!("{failed} of {} checks failed", checks.len())));
    }
    Ok(())
}
