//! Noise channels on top of exact losses, the relative absolute error and
//! finite-sampling error characterization.
//!
//! Gaussian noise is added to the normalized loss and is not clipped.
//! Shot noise samples the circuit output: a multinomial over basis states
//! for VQE2L and QAOA, a binomial over the ancilla for BENQO.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::{draw_uniform_thetas, Evaluation, LossFunction, LossKind};
use crate::optimizers::LossOracle;
use crate::problems::{generate_random_qubo, qubo_to_ising};
use crate::rng::{self, Stream};
use crate::simstate::sample_from_probabilities;
use crate::stats::{self, LineFit};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    None,
    Gaussian { sigma: f64 },
    Shots { n_shots: u64 },
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseSpec::Gaussian { sigma } if !(sigma >= 0.0 && sigma.is_finite()) => {
                Err(Error::invalid(format!("sigma must be finite and >= 0 (got {sigma})")))
            }
            NoiseSpec::Shots { n_shots: 0 } => Err(Error::invalid("n_shots must be at least 1")),
            _ => Ok(()),
        }
    }

    /// `"none"`, `"gaussian"` or `"shots"`.
    pub fn kind_name(&self) -> &'static str {
        match self {
            NoiseSpec::None => "none",
            NoiseSpec::Gaussian { .. } => "gaussian",
            NoiseSpec::Shots { .. } => "shots",
        }
    }

    /// σ or the shot count; 0 for the noiseless channel.
    pub fn level(&self) -> f64 {
        match *self {
            NoiseSpec::None => 0.0,
            NoiseSpec::Gaussian { sigma } => sigma,
            NoiseSpec::Shots { n_shots } => n_shots as f64,
        }
    }

    fn needs_probs(&self) -> bool {
        matches!(self, NoiseSpec::Shots { .. })
    }
}

impl std::fmt::Display for NoiseSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            NoiseSpec::None => f.write_str("none"),
            NoiseSpec::Gaussian { sigma } => write!(f, "gaussian:{sigma}"),
            NoiseSpec::Shots { n_shots } => write!(f, "shots:{n_shots}"),
        }
    }
}

impl std::str::FromStr for NoiseSpec {
    type Err = Error;

    /// Parses `none`, `gaussian:<σ>` (or `sigma:<σ>`) and `shots:<n>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("none") {
            return Ok(NoiseSpec::None);
        }
        let (k, v) = s
            .split_once(':')
            .ok_or_else(|| Error::invalid(format!("noise spec '{s}' is not none, gaussian:<σ> or shots:<n>")))?;
        let spec = match k {
            "gaussian" | "sigma" => NoiseSpec::Gaussian {
                sigma: v.parse().map_err(|_| Error::invalid(format!("bad sigma '{v}'")))?,
            },
            "shots" => NoiseSpec::Shots {
                n_shots: v.parse().map_err(|_| Error::invalid(format!("bad shot count '{v}'")))?,
            },
            _ => return Err(Error::invalid(format!("unknown noise kind '{k}'"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Applies a channel to one circuit output. Returns the noisy normalized
/// loss and whether a BENQO estimate had to be clamped into `[-1, 1]`.
pub fn apply_noise<R: Rng + ?Sized>(
    f: &LossFunction,
    e: &Evaluation,
    spec: &NoiseSpec,
    rng: &mut R,
) -> Result<(f64, bool)> {
    match *spec {
        NoiseSpec::None => Ok((f.normalize(f.loss_of(e)?), false)),
        NoiseSpec::Gaussian { sigma } => {
            let exact = f.normalize(f.loss_of(e)?);
            let d = Normal::new(0.0, sigma).map_err(|err| Error::invalid(err.to_string()))?;
            Ok((exact + d.sample(rng), false))
        }
        NoiseSpec::Shots { n_shots } => match e {
            Evaluation::Benqo { u } => {
                let p0 = ((1.0 + u) / 2.0).clamp(0.0, 1.0);
                let k = Binomial::new(n_shots, p0)
                    .map_err(|err| Error::invalid(err.to_string()))?
                    .sample(rng);
                let est = 2.0 * k as f64 / n_shots as f64 - 1.0;
                let clamped = est.abs() > 1.0;
                let est = Evaluation::Benqo { u: est.clamp(-1.0, 1.0) };
                Ok((f.normalize(f.loss_of(&est)?), clamped))
            }
            Evaluation::Diagonal { probs: Some(p), .. } => {
                let counts = sample_from_probabilities(p, n_shots as usize, rng)?;
                let total: f64 = counts
                    .iter()
                    .zip(f.energy_table())
                    .map(|(&c, &en)| c as f64 * en)
                    .sum();
                Ok((f.normalize(total / n_shots as f64), false))
            }
            Evaluation::Diagonal { probs: None, .. } => {
                Err(Error::invalid("shot noise needs the output distribution"))
            }
        },
    }
}

/// One noisy evaluation of the normalized loss.
pub fn noisy_loss<R: Rng + ?Sized>(
    f: &LossFunction,
    theta: &[f64],
    spec: &NoiseSpec,
    rng: &mut R,
) -> Result<f64> {
    spec.validate()?;
    let e = f.evaluate(theta, spec.needs_probs())?;
    Ok(apply_noise(f, &e, spec, rng)?.0)
}

/// A loss function behind a noise channel, owning its random stream.
pub struct NoisyLoss<'f> {
    f: &'f LossFunction,
    spec: NoiseSpec,
    rng: Stream,
    clamp_events: usize,
}

impl<'f> NoisyLoss<'f> {
    pub fn new(f: &'f LossFunction, spec: NoiseSpec, rng: Stream) -> Result<Self> {
        spec.validate()?;
        Ok(Self { f, spec, rng, clamp_events: 0 })
    }

    /// BENQO shot estimates that fell outside `[-1, 1]`.
    pub fn clamp_events(&self) -> usize {
        self.clamp_events
    }

    fn observe(&mut self, e: &Evaluation) -> Result<f64> {
        let (v, clamped) = apply_noise(self.f, e, &self.spec, &mut self.rng)?;
        self.clamp_events += usize::from(clamped);
        Ok(v)
    }
}

impl LossOracle for NoisyLoss<'_> {
    fn n_params(&self) -> usize {
        self.f.n_params()
    }

    fn value(&mut self, theta: &[f64]) -> Result<f64> {
        let e = self.f.evaluate(theta, self.spec.needs_probs())?;
        self.observe(&e)
    }

    /// Parameter shifts on noisy observations. QAOA expands into its
    /// gate-level shifts, so it spends more than `2n` evaluations.
    fn gradient(&mut self, theta: &[f64], center: f64) -> Result<(Vec<f64>, usize)> {
        let slope = self.f.outer_slope(center);
        let mut grad = Vec::with_capacity(theta.len());
        let mut calls = 0;
        for i in 0..theta.len() {
            let mut g = 0.0;
            for t in self.f.shift_terms(theta, i, self.spec.needs_probs())? {
                let vp = self.observe(&t.plus)?;
                let vm = self.observe(&t.minus)?;
                g += t.weight * (self.f.inner_of_normalized(vp) - self.f.inner_of_normalized(vm)) / 2.0;
                calls += 2;
            }
            grad.push(slope * g);
        }
        Ok((grad, calls))
    }

    fn to_inner(&self, v: f64) -> f64 {
        self.f.inner_of_normalized(v)
    }

    fn inner_slope(&self, center: f64) -> f64 {
        self.f.outer_slope(center)
    }

    fn is_sinusoidal(&self) -> bool {
        self.f.is_coordinatewise_sinusoidal()
    }
}

/// Relative absolute error `Σ|noisy - exact| / Σ|exact - mean(exact)|`.
pub fn rae(exact: &[f64], noisy: &[f64]) -> Result<f64> {
    if exact.len() != noisy.len() || exact.len() < 2 {
        return Err(Error::invalid("rae needs two sequences of equal length >= 2"));
    }
    let m = stats::mean(exact);
    let den: f64 = exact.iter().map(|x| (x - m).abs()).sum();
    if !(den > 0.0) {
        return Err(Error::Degenerate("exact values are all identical".into()));
    }
    let num: f64 = exact.iter().zip(noisy).map(|(a, b)| (b - a).abs()).sum();
    Ok(num / den)
}

/// RAE of one noisy evaluation at each of `samples` uniform parameter sets
/// in `[-2π, 2π]^n`.
pub fn rae_at<R: Rng + ?Sized>(
    f: &LossFunction,
    spec: &NoiseSpec,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    let thetas = draw_uniform_thetas(f.n_params(), samples, PARAM_RANGE, rng);
    let mut exact = Vec::with_capacity(samples);
    let mut noisy = Vec::with_capacity(samples);
    for t in &thetas {
        let e = f.evaluate(t, spec.needs_probs())?;
        exact.push(f.normalize(f.loss_of(&e)?));
        noisy.push(apply_noise(f, &e, spec, rng)?.0);
    }
    rae(&exact, &noisy)
}

/// Uniform sampling range of parameter sets for scans.
pub const PARAM_RANGE: (f64, f64) = (-2.0 * std::f64::consts::PI, 2.0 * std::f64::consts::PI);

/// `y = k·exp(rate·n)` fitted as a line in `ln y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpFit {
    pub k: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FsScan {
    pub kind: LossKind,
    pub fixed_n: usize,
    pub fixed_shots: u64,
    /// `(n_shots, RAE)` at `fixed_n`.
    pub shots_curve: Vec<(u64, f64)>,
    /// `(n, RAE)` at `fixed_shots`.
    pub n_curve: Vec<(usize, f64)>,
    /// Line through `(ln shots, ln RAE)`.
    pub shots_fit: Option<LineFit>,
    /// Exponential fit of the `n` curve over `n >= min_fit_n`.
    pub n_fit: Option<ExpFit>,
}

/// Problem instance used by scans for size `n`.
pub fn scan_instance(kind: LossKind, n: usize, master_seed: u64) -> Result<LossFunction> {
    let q = generate_random_qubo(n, rng::derive_seed(master_seed, &[n as u64]))?;
    LossFunction::new(kind, qubo_to_ising(&q))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FsScanConfig {
    pub kind: LossKind,
    pub fixed_n: usize,
    pub shots_grid: Vec<u64>,
    pub n_grid: Vec<usize>,
    pub fixed_shots: u64,
    pub samples_per_point: usize,
    pub min_fit_n: usize,
    pub master_seed: u64,
}

impl Default for FsScanConfig {
    fn default() -> Self {
        Self {
            kind: LossKind::Benqo,
            fixed_n: 10,
            shots_grid: (6..=14).map(|k| 1u64 << k).collect(),
            n_grid: (3..=12).collect(),
            fixed_shots: 1024,
            samples_per_point: 1000,
            min_fit_n: 6,
            master_seed: 0,
        }
    }
}

/// RAE against shots at a fixed size and against size at fixed shots.
/// Grid points run in parallel on independent streams.
pub fn fs_error_scan(cfg: &FsScanConfig) -> Result<FsScan> {
    if cfg.shots_grid.is_empty() && cfg.n_grid.is_empty() {
        return Err(Error::invalid("finite-sampling scan needs a nonempty grid"));
    }
    let fixed = if cfg.shots_grid.is_empty() {
        None
    } else {
        Some(scan_instance(cfg.kind, cfg.fixed_n, cfg.master_seed)?)
    };
    let shots_curve = cfg
        .shots_grid
        .par_iter()
        .map(|&s| {
            let f = fixed.as_ref().expect("instance built for nonempty grid");
            let mut r = rng::stream(cfg.master_seed, &[1, cfg.fixed_n as u64, s]);
            Ok((s, rae_at(f, &NoiseSpec::Shots { n_shots: s }, cfg.samples_per_point, &mut r)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let n_curve = cfg
        .n_grid
        .par_iter()
        .map(|&n| {
            let f = scan_instance(cfg.kind, n, cfg.master_seed)?;
            let mut r = rng::stream(cfg.master_seed, &[2, n as u64, cfg.fixed_shots]);
            let spec = NoiseSpec::Shots { n_shots: cfg.fixed_shots };
            Ok((n, rae_at(&f, &spec, cfg.samples_per_point, &mut r)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let (lx, ly): (Vec<f64>, Vec<f64>) = shots_curve
        .iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|&(s, e)| ((s as f64).ln(), e.ln()))
        .unzip();
    let shots_fit = stats::linear_regression(&lx, &ly);
    let (nx, ny): (Vec<f64>, Vec<f64>) = n_curve
        .iter()
        .filter(|&&(n, e)| n >= cfg.min_fit_n && e > 0.0)
        .map(|&(n, e)| (n as f64, e.ln()))
        .unzip();
    let n_fit = stats::linear_regression(&nx, &ny).map(|l| ExpFit { k: l.intercept.exp(), rate: l.slope });
    Ok(FsScan {
        kind: cfg.kind,
        fixed_n: cfg.fixed_n,
        fixed_shots: cfg.fixed_shots,
        shots_curve,
        n_curve,
        shots_fit,
        n_fit,
    })
}

/// Whether shot noise acts additively or multiplicatively.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorProfile {
    /// `(|exact normalized loss|, error std)` per evaluation point.
    pub points: Vec<(f64, f64)>,
    /// Slope `m` of error std against `|loss|`.
    pub slope: f64,
    /// Intercept `t` of the same line.
    pub intercept: f64,
    /// Errors at the first point, with the moments of the Gaussian overlay.
    pub sample_errors: Vec<f64>,
    pub histogram: Vec<(f64, f64)>,
    pub overlay_mean: f64,
    pub overlay_std: f64,
    pub skewness: f64,
}

pub const ERROR_HISTOGRAM_BINS: usize = 30;

/// Error standard deviation at `n_points` uniform parameter sets, each from
/// `samples_per_point` shot-noise evaluations, plus a linear fit of the
/// standard deviation against `|loss|`.
pub fn error_decomposition<R: Rng + ?Sized>(
    f: &LossFunction,
    n_points: usize,
    samples_per_point: usize,
    n_shots: u64,
    rng: &mut R,
) -> Result<ErrorProfile> {
    if n_points < 10 || samples_per_point < 100 {
        return Err(Error::invalid("error decomposition needs >= 10 points and >= 100 samples each"));
    }
    let spec = NoiseSpec::Shots { n_shots };
    spec.validate()?;
    let thetas = draw_uniform_thetas(f.n_params(), n_points, PARAM_RANGE, rng);
    let seeds: Vec<u64> = (0..n_points).map(|_| rng.random()).collect();
    let per_point = thetas
        .par_iter()
        .zip(&seeds)
        .map(|(t, &seed)| {
            let mut r = rng::stream_from_seed(seed);
            let e = f.evaluate(t, true)?;
            let exact = f.normalize(f.loss_of(&e)?);
            let errs = (0..samples_per_point)
                .map(|_| Ok(apply_noise(f, &e, &spec, &mut r)?.0 - exact))
                .collect::<Result<Vec<f64>>>()?;
            Ok((exact, errs))
        })
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(f64, f64)> =
        per_point.iter().map(|(x, errs)| (x.abs(), stats::sample_std(errs))).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
    let (slope, intercept) = match stats::linear_regression(&xs, &ys) {
        Some(l) => (l.slope, l.intercept),
        None => (0.0, stats::mean(&ys)),
    };
    let sample_errors = per_point[0].1.clone();
    let overlay_std = stats::sample_std(&sample_errors);
    Ok(ErrorProfile {
        points,
        slope,
        intercept,
        histogram: density_histogram(&sample_errors, ERROR_HISTOGRAM_BINS),
        overlay_mean: 0.0,
        overlay_std,
        skewness: stats::skewness(&sample_errors),
        sample_errors,
    })
}

/// `(bin center, probability density)` over the data range.
pub fn density_histogram(xs: &[f64], bins: usize) -> Vec<(f64, f64)> {
    if xs.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return vec![(lo, f64::INFINITY)];
    }
    let w = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in xs {
        counts[(((x - lo) / w) as usize).min(bins - 1)] += 1;
    }
    counts
        .iter()
        .enumerate()
        .map(|(i, &c)| (lo + (i as f64 + 0.5) * w, c as f64 / (xs.len() as f64 * w)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::IsingModel;

    fn loss(kind: LossKind, n: usize, seed: u64) -> LossFunction {
        LossFunction::new(kind, qubo_to_ising(&generate_random_qubo(n, seed).unwrap())).unwrap()
    }

    #[test]
    fn parse_and_display() {
        for s in ["none", "gaussian:0.1", "shots:1024"] {
            let spec: NoiseSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("shots:0".parse::<NoiseSpec>().is_err());
        assert!("gaussian:-1".parse::<NoiseSpec>().is_err());
        assert!("bogus".parse::<NoiseSpec>().is_err());
    }

    #[test]
    fn zero_sigma_is_exact() {
        let f = loss(LossKind::Benqo, 4, 1);
        let th = [0.3, -1.0, 2.0, 0.7];
        let mut r = rng::stream(1, &[]);
        let v = noisy_loss(&f, &th, &NoiseSpec::Gaussian { sigma: 0.0 }, &mut r).unwrap();
        assert_eq!(v, f.normalized_loss(&th).unwrap());
        assert_eq!(noisy_loss(&f, &th, &NoiseSpec::None, &mut r).unwrap(), v);
    }

    #[test]
    fn gaussian_moments() {
        let f = loss(LossKind::Vqe2l, 4, 2);
        let th = [0.3, -1.0, 2.0, 0.7];
        let exact = f.normalized_loss(&th).unwrap();
        let mut r = rng::stream(2, &[]);
        let spec = NoiseSpec::Gaussian { sigma: 0.1 };
        let xs: Vec<f64> = (0..100_000).map(|_| noisy_loss(&f, &th, &spec, &mut r).unwrap()).collect();
        assert!((stats::mean(&xs) - exact).abs() < 3.0 * 0.1 / (1e5f64).sqrt());
        assert!((stats::sample_std(&xs) / 0.1 - 1.0).abs() < 0.02);
    }

    #[test]
    fn gaussian_not_clipped() {
        let f = loss(LossKind::Benqo, 3, 2);
        let mut r = rng::stream(3, &[]);
        let spec = NoiseSpec::Gaussian { sigma: 10.0 };
        let outside = (0..200)
            .filter(|_| noisy_loss(&f, &[0.0; 3], &spec, &mut r).unwrap().abs() > 1.0)
            .count();
        assert!(outside > 100);
    }

    #[test]
    fn shots_converge_for_all_kinds() {
        for kind in LossKind::ALL {
            let f = loss(kind, 4, 3);
            let th = [0.4, -0.8, 1.9, 0.1];
            let exact = f.normalized_loss(&th).unwrap();
            let mut r = rng::stream(4, &[kind as u64]);
            let v = noisy_loss(&f, &th, &NoiseSpec::Shots { n_shots: 1_000_000 }, &mut r).unwrap();
            // per-shot loss spread is at most the normalized range, 2
            let se = 1.0 / (1e6f64).sqrt();
            let se = if kind == LossKind::Benqo { se * f.k_scale() / f.l_max() * 2.0 } else { se };
            assert!((v - exact).abs() < 5.0 * se, "{kind}: {v} vs {exact}");
        }
    }

    #[test]
    fn shots_bias_shrinks() {
        let f = loss(LossKind::Benqo, 5, 4);
        let th = [0.4, -0.8, 1.9, 0.1, 2.2];
        let exact = f.normalized_loss(&th).unwrap();
        let mut prev = f64::INFINITY;
        for shots in [64u64, 1024, 16384] {
            let mut r = rng::stream(5, &[shots]);
            let spec = NoiseSpec::Shots { n_shots: shots };
            let xs: Vec<f64> = (0..4000).map(|_| noisy_loss(&f, &th, &spec, &mut r).unwrap()).collect();
            let err = (stats::mean(&xs) - exact).abs();
            assert!(err < prev.max(1e-3), "{shots}: {err}");
            prev = err;
        }
    }

    #[test]
    fn rae_examples() {
        assert!((rae(&[0.0, 1.0, 2.0], &[0.1, 1.1, 2.1]).unwrap() - 0.15).abs() < 1e-12);
        assert_eq!(rae(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0]).unwrap(), 0.0);
        assert!(matches!(rae(&[1.0, 1.0], &[1.0, 2.0]), Err(Error::Degenerate(_))));
        assert!(rae(&[1.0], &[1.0]).is_err());

        let mut r = rng::stream(6, &[]);
        let ex: Vec<f64> = (0..50).map(|_| r.random::<f64>()).collect();
        let no: Vec<f64> = ex.iter().map(|x| x + 0.1 * r.random::<f64>()).collect();
        let base = rae(&ex, &no).unwrap();
        let (a, b) = (-3.5, 2.0);
        let ex2: Vec<f64> = ex.iter().map(|x| a * x + b).collect();
        let no2: Vec<f64> = no.iter().map(|x| a * x + b).collect();
        assert!((rae(&ex2, &no2).unwrap() - base).abs() < 1e-12);
        let (mut pe, mut pn) = (ex.clone(), no.clone());
        pe.reverse();
        pn.reverse();
        assert!((rae(&pe, &pn).unwrap() - base).abs() < 1e-12);
    }

    #[test]
    fn exact_channel_has_zero_rae() {
        let f = loss(LossKind::Benqo, 5, 7);
        assert_eq!(rae_at(&f, &NoiseSpec::None, 100, &mut rng::stream(7, &[])).unwrap(), 0.0);
    }

    #[test]
    fn deterministic_loss_has_zero_error() {
        let f = LossFunction::new(LossKind::Vqe2l, IsingModel::zero(3).unwrap()).unwrap();
        let p = error_decomposition(&f, 10, 100, 256, &mut rng::stream(8, &[])).unwrap();
        assert!(p.points.iter().all(|&(_, s)| s == 0.0));
    }

    #[test]
    fn oracle_gradient_counts_and_stream() {
        let f = loss(LossKind::Benqo, 4, 9);
        let th = [0.1, 0.2, 0.3, 0.4];
        let mut o = NoisyLoss::new(&f, NoiseSpec::None, rng::stream(1, &[])).unwrap();
        let c = o.value(&th).unwrap();
        let (g, calls) = o.gradient(&th, c).unwrap();
        let (want, _) = f.gradient_parameter_shift(&th).unwrap();
        assert_eq!(calls, 8);
        for (a, b) in g.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn histogram_integrates_to_one() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let h = density_histogram(&xs, 20);
        let w = h[1].0 - h[0].0;
        let total: f64 = h.iter().map(|(_, d)| d * w).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
}
