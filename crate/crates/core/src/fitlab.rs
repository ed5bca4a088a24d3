//! Nonlinear least squares and the fits built on it: sigmoidal transitions,
//! resilience metrics, decay of the resilience boundary with problem size,
//! and shot-budget projections.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats;

/// Schema tag embedded in fit reports and projection tables.
pub const FIT_SCHEMA_VERSION: &str = "vqscale-fit/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Row-major `p × p`, `s² (JᵀJ)⁻¹` with `s² = cost / (m - p)`.
    pub covariance: Vec<Vec<f64>>,
    /// Weighted residual sum of squares.
    pub cost: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    /// Index of the winning start point.
    pub start: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Relative cost decrease below which the iteration stops.
    pub ftol: f64,
    /// Relative step size below which the iteration stops.
    pub xtol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iter: 2000, ftol: 1e-15, xtol: 1e-15 }
    }
}

struct Problem<'a, M> {
    model: &'a M,
    xs: &'a [f64],
    ys: &'a [f64],
    w: Vec<f64>,
    bounds: Option<&'a [(f64, f64)]>,
}

impl<M: Fn(f64, &[f64]) -> f64> Problem<'_, M> {
    fn residuals(&self, p: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            self.xs.len(),
            self.xs.iter().zip(self.ys).zip(&self.w).map(|((&x, &y), &w)| w * (y - (self.model)(x, p))),
        )
    }

    /// Central differences of the weighted model, `m × p`.
    fn jacobian(&self, p: &[f64]) -> DMatrix<f64> {
        let (m, k) = (self.xs.len(), p.len());
        let mut j = DMatrix::zeros(m, k);
        let mut q = p.to_vec();
        for c in 0..k {
            let h = f64::EPSILON.cbrt() * p[c].abs().max(1.0);
            q[c] = p[c] + h;
            let up: Vec<f64> = self.xs.iter().map(|&x| (self.model)(x, &q)).collect();
            q[c] = p[c] - h;
            for (r, (&x, &u)) in self.xs.iter().zip(&up).enumerate() {
                j[(r, c)] = self.w[r] * (u - (self.model)(x, &q)) / (2.0 * h);
            }
            q[c] = p[c];
        }
        j
    }

    fn clamp(&self, p: &mut [f64]) {
        if let Some(b) = self.bounds {
            for (v, &(lo, hi)) in p.iter_mut().zip(b) {
                *v = v.clamp(lo, hi);
            }
        }
    }

    fn run(&self, init: &[f64], opts: &LmOptions) -> Option<(Vec<f64>, f64, usize)> {
        let mut p = init.to_vec();
        self.clamp(&mut p);
        let mut r = self.residuals(&p);
        let mut cost = r.norm_squared();
        if !cost.is_finite() {
            return None;
        }
        let mut lambda = 1e-3;
        let mut it = 0;
        while it < opts.max_iter {
            it += 1;
            let j = self.jacobian(&p);
            let jtj = j.transpose() * &j;
            let g = j.transpose() * &r;
            let mut accepted = false;
            while lambda < 1e16 {
                let mut a = jtj.clone();
                for d in 0..a.nrows() {
                    a[(d, d)] += lambda * jtj[(d, d)].max(1e-12);
                }
                let Some(step) = a.cholesky().map(|c| c.solve(&g)) else {
                    lambda *= 10.0;
                    continue;
                };
                let mut trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
                self.clamp(&mut trial);
                let rt = self.residuals(&trial);
                let ct = rt.norm_squared();
                if ct.is_finite() && ct <= cost {
                    let dx = p.iter().zip(&trial).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                    let xn = p.iter().map(|a| a * a).sum::<f64>().sqrt();
                    let df = cost - ct;
                    p = trial;
                    r = rt;
                    cost = ct;
                    lambda = (lambda / 10.0).max(1e-12);
                    accepted = true;
                    if df <= opts.ftol * cost || dx <= opts.xtol * (xn + opts.xtol) || cost < 1e-30 {
                        return Some((p, cost, it));
                    }
                    break;
                }
                lambda *= 10.0;
            }
            if !accepted {
                // no descent direction left
                return Some((p, cost, it));
            }
        }
        Some((p, cost, it))
    }
}

/// Levenberg–Marquardt fit of `model(x, params)` to `(xs, ys)`, started
/// from every entry of `inits`; the lowest final cost wins. `sigmas` are
/// per-point standard errors (weights `1/σ`). Bounds are enforced by
/// clamping each trial step.
pub fn nlls_fit<M: Fn(f64, &[f64]) -> f64>(
    model: &M,
    xs: &[f64],
    ys: &[f64],
    sigmas: Option<&[f64]>,
    inits: &[Vec<f64>],
    bounds: Option<&[(f64, f64)]>,
    opts: &LmOptions,
) -> Result<FitResult> {
    let k = inits.first().map_or(0, Vec::len);
    if k == 0 || inits.iter().any(|p| p.len() != k) {
        return Err(Error::invalid("nlls_fit needs start points of one nonzero length"));
    }
    if xs.len() != ys.len() || xs.len() < k {
        return Err(Error::invalid(format!(
            "nlls_fit needs equal-length data with at least {k} points (got {} and {})",
            xs.len(),
            ys.len()
        )));
    }
    if bounds.is_some_and(|b| b.len() != k) {
        return Err(Error::invalid("bounds length differs from parameter count"));
    }
    let w = match sigmas {
        Some(s) if s.len() != xs.len() => return Err(Error::invalid("sigma length differs from data length")),
        Some(s) if s.iter().any(|&v| !(v > 0.0)) => return Err(Error::invalid("sigmas must be positive")),
        Some(s) => s.iter().map(|v| 1.0 / v).collect(),
        None => vec![1.0; xs.len()],
    };
    let prob = Problem { model, xs, ys, w, bounds };
    let mut best: Option<(Vec<f64>, f64, usize, usize)> = None;
    for (i, init) in inits.iter().enumerate() {
        if let Some((p, c, it)) = prob.run(init, opts) {
            if p.iter().all(|v| v.is_finite()) && best.as_ref().is_none_or(|b| c < b.1) {
                best = Some((p, c, it, i));
            }
        }
    }
    let (params, cost, iterations, start) = best.ok_or_else(|| {
        Error::FitFailure(format!("no start point out of {} produced a finite fit", inits.len()))
    })?;
    let j = prob.jacobian(&params);
    let dof = xs.len().saturating_sub(k);
    let s2 = if dof > 0 { cost / dof as f64 } else { 0.0 };
    let inv = (j.transpose() * &j).try_inverse();
    let covariance: Vec<Vec<f64>> = match inv {
        Some(m) => (0..k).map(|r| (0..k).map(|c| s2 * m[(r, c)]).collect()).collect(),
        None => vec![vec![f64::INFINITY; k]; k],
    };
    let std_errors = (0..k).map(|d| covariance[d][d].abs().sqrt()).collect();
    Ok(FitResult { params, std_errors, covariance, cost, residual_norm: cost.sqrt(), iterations, start })
}

/// `p(σ) = p_l + (p_u - p_l)/2 · (1 - tanh(b ln σ - c))`.
pub fn tanh_curve(sigma: f64, p_u: f64, p_l: f64, b: f64, c: f64) -> f64 {
    tanh_in_log(sigma.ln(), &[p_u, p_l, b, c])
}

fn tanh_in_log(x: f64, p: &[f64]) -> f64 {
    p[1] + (p[0] - p[1]) / 2.0 * (1.0 - (p[2] * x - p[3]).tanh())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TanhFit {
    pub p_u: f64,
    pub p_l: f64,
    pub b: f64,
    pub c: f64,
    pub std_errors: [f64; 4],
    pub covariance: Vec<Vec<f64>>,
    pub residual_norm: f64,
    /// No transition could be fitted (flat data).
    pub censored: bool,
    /// Abscissa range of the data.
    pub range: (f64, f64),
}

impl TanhFit {
    pub fn eval(&self, sigma: f64) -> f64 {
        tanh_curve(sigma, self.p_u, self.p_l, self.b, self.c)
    }
}

/// Standard error floor relative to the worst case `√(1/4N)`.
pub const WEIGHT_FLOOR_FRACTION: f64 = 0.1;

/// Binomial standard errors `√(p(1-p)/N)` with a floor at
/// `0.1·√(0.25/N)` so that `p̂ ∈ {0, 1}` keeps a finite weight.
pub fn solvability_sigmas(p_hats: &[f64], n_runs: usize) -> Vec<f64> {
    let n = n_runs.max(1) as f64;
    let floor = (0.25 / n).sqrt() * WEIGHT_FLOOR_FRACTION;
    p_hats.iter().map(|p| (p * (1.0 - p) / n).sqrt().max(floor)).collect()
}

/// Sigmoid fit in `ln(abscissa)`. Starts from `p_u = max`, `p_l = min`,
/// the midrange crossing for `c/b`, and `b ∈ {0.5, 1, 2, 4}`.
pub fn fit_tanh(abscissa: &[f64], p_hats: &[f64], sigmas: Option<&[f64]>) -> Result<TanhFit> {
    if abscissa.len() != p_hats.len() || abscissa.len() < 4 {
        return Err(Error::invalid("tanh fit needs at least 4 points of matching length"));
    }
    if abscissa.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::invalid("tanh fit abscissa must be positive"));
    }
    let xs: Vec<f64> = abscissa.iter().map(|s| s.ln()).collect();
    let hi = p_hats.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = p_hats.iter().copied().fold(f64::INFINITY, f64::min);
    let range = (
        abscissa.iter().copied().fold(f64::INFINITY, f64::min),
        abscissa.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    if hi - lo < 1e-12 {
        return Ok(TanhFit {
            p_u: hi,
            p_l: lo,
            b: 0.0,
            c: 0.0,
            std_errors: [f64::NAN; 4],
            covariance: Vec::new(),
            residual_norm: 0.0,
            censored: true,
            range,
        });
    }
    let mid = (hi + lo) / 2.0;
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let x_mid = order
        .windows(2)
        .find(|w| (p_hats[w[0]] - mid) * (p_hats[w[1]] - mid) <= 0.0)
        .map(|w| {
            let (x0, x1, y0, y1) = (xs[w[0]], xs[w[1]], p_hats[w[0]], p_hats[w[1]]);
            if (y1 - y0).abs() < 1e-15 { (x0 + x1) / 2.0 } else { x0 + (mid - y0) * (x1 - x0) / (y1 - y0) }
        })
        .unwrap_or_else(|| stats::mean(&xs));
    let inits: Vec<Vec<f64>> = [0.5, 1.0, 2.0, 4.0].iter().map(|&b| vec![hi, lo, b, b * x_mid]).collect();
    let bounds = [(-0.5, 1.5), (-0.5, 1.5), (1e-6, 1e3), (-1e5, 1e5)];
    let fit = nlls_fit(&tanh_in_log, &xs, p_hats, sigmas, &inits, Some(&bounds), &LmOptions::default())?;
    let p = &fit.params;
    Ok(TanhFit {
        p_u: p[0],
        p_l: p[1],
        b: p[2],
        c: p[3],
        std_errors: [fit.std_errors[0], fit.std_errors[1], fit.std_errors[2], fit.std_errors[3]],
        covariance: fit.covariance,
        residual_norm: fit.residual_norm,
        censored: false,
        range,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResilienceProfile {
    /// `exp(c/b)`, the point of steepest descent.
    pub sigma_star: f64,
    /// Slope `dp/dσ` at `σ*`; negative for a falling curve.
    pub m_star: f64,
    /// Where the curve reaches 90% of `p_u`; `None` when it never does.
    pub sigma_res: Option<f64>,
    /// `σ*` lies more than a decade outside the fitted range, or the fit
    /// itself was censored.
    pub censored: bool,
}

impl ResilienceProfile {
    /// `|m*|`, as plotted on a log axis.
    pub fn m_star_magnitude(&self) -> f64 {
        self.m_star.abs()
    }
}

pub fn resilience_metrics(fit: &TanhFit) -> Result<ResilienceProfile> {
    if fit.censored || !(fit.b > 0.0) {
        return Ok(ResilienceProfile {
            sigma_star: f64::NAN,
            m_star: f64::NAN,
            sigma_res: None,
            censored: true,
        });
    }
    let (pu, pl, b, c) = (fit.p_u, fit.p_l, fit.b, fit.c);
    let sigma_star = (c / b).exp();
    let m_star = b * (pl - pu) / 2.0 * (-c / b).exp();
    let sigma_res = if pu > 0.0 && (pu - pl).abs() > 0.0 {
        let t = 1.0 - 2.0 * (0.9 * pu - pl) / (pu - pl);
        (t.abs() < 1.0).then(|| ((c + t.atanh()) / b).exp())
    } else {
        None
    };
    let (lo, hi) = fit.range;
    let censored = !(sigma_star >= lo / 10.0 && sigma_star <= hi * 10.0);
    Ok(ResilienceProfile { sigma_star, m_star, sigma_res, censored })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayFamily {
    /// `k·exp(-γ n)`
    Exp,
    /// `k·n^(-γ)`
    Pl,
    /// `k·ln(n)^(-γ)`
    Log,
}

impl DecayFamily {
    pub const ALL: [DecayFamily; 3] = [DecayFamily::Exp, DecayFamily::Pl, DecayFamily::Log];

    pub fn name(self) -> &'static str {
        match self {
            DecayFamily::Exp => "exp",
            DecayFamily::Pl => "pl",
            DecayFamily::Log => "log",
        }
    }

    /// The regressor in which `ln f` is linear with slope `-γ`.
    pub fn transform(self, n: f64) -> f64 {
        match self {
            DecayFamily::Exp => n,
            DecayFamily::Pl => n.ln(),
            DecayFamily::Log => n.ln().ln(),
        }
    }

    pub fn eval(self, n: f64, k: f64, gamma: f64) -> f64 {
        match self {
            DecayFamily::Exp => k * (-gamma * n).exp(),
            DecayFamily::Pl => k * n.powf(-gamma),
            DecayFamily::Log => k * n.ln().powf(-gamma),
        }
    }
}

impl std::fmt::Display for DecayFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for DecayFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp" => Ok(DecayFamily::Exp),
            "pl" | "power" => Ok(DecayFamily::Pl),
            "log" => Ok(DecayFamily::Log),
            _ => Err(Error::invalid(format!("unknown decay family '{s}'"))),
        }
    }
}

/// Whether decay parameters come from least squares on the values
/// themselves or from a line through their logarithms.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitSpace {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub family: DecayFamily,
    pub k_star: f64,
    pub gamma_star: f64,
    pub k_err: f64,
    pub gamma_err: f64,
    /// `(n, data - model)`.
    pub residuals: Vec<(f64, f64)>,
    /// Mean squared residual over the `n` grid.
    pub mse: f64,
}

impl DecayFit {
    pub fn eval(&self, n: f64) -> f64 {
        self.family.eval(n, self.k_star, self.gamma_star)
    }
}

pub fn fit_decay(ns: &[f64], values: &[f64], family: DecayFamily, space: FitSpace) -> Result<DecayFit> {
    if ns.len() != values.len() || ns.len() < 3 {
        return Err(Error::invalid("decay fit needs at least 3 points of matching length"));
    }
    if values.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::invalid("decay fit needs positive values"));
    }
    let min_n = if family == DecayFamily::Log { 1.0 } else { 0.0 };
    if ns.iter().any(|&n| !(n > min_n)) {
        return Err(Error::invalid(format!("{family} decay needs n > {min_n}")));
    }
    let tx: Vec<f64> = ns.iter().map(|&n| family.transform(n)).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let line = stats::linear_regression(&tx, &ly)
        .ok_or_else(|| Error::FitFailure("log-space regression is degenerate".into()))?;
    let (k, gamma, k_err, gamma_err) = match space {
        FitSpace::Log => {
            let k = line.intercept.exp();
            (k, -line.slope, k * line.intercept_err, line.slope_err)
        }
        FitSpace::Linear => {
            let model = |n: f64, p: &[f64]| family.eval(n, p[0], p[1]);
            let k0 = line.intercept.exp();
            let g0 = -line.slope;
            let inits = vec![vec![k0, g0], vec![k0 * 2.0, g0 * 1.2], vec![k0 * 0.5, g0 * 0.8]];
            let bounds = [(1e-300, f64::INFINITY), (f64::NEG_INFINITY, f64::INFINITY)];
            let fit = nlls_fit(&model, ns, values, None, &inits, Some(&bounds), &LmOptions::default())?;
            (fit.params[0], fit.params[1], fit.std_errors[0], fit.std_errors[1])
        }
    };
    let residuals: Vec<(f64, f64)> =
        ns.iter().zip(values).map(|(&n, &v)| (n, v - family.eval(n, k, gamma))).collect();
    let mse = residuals.iter().map(|(_, e)| e * e).sum::<f64>() / residuals.len() as f64;
    Ok(DecayFit { family, k_star: k, gamma_star: gamma, k_err, gamma_err, residuals, mse })
}

/// `ε*(n) = σ*(n) / √Var(n)`: a Gaussian tolerance on the normalized loss
/// expressed as a relative absolute error.
pub fn convert_to_rae(sigma_stars: &[(f64, f64)], variances: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    if sigma_stars.len() != variances.len() {
        return Err(Error::invalid("σ* and variance curves have different lengths"));
    }
    sigma_stars
        .iter()
        .zip(variances)
        .map(|(&(n, s), &(m, v))| {
            if n != m {
                return Err(Error::invalid(format!("grid mismatch: n={n} against n={m}")));
            }
            if !(v > 0.0) {
                return Err(Error::invalid(format!("variance at n={n} is not positive")));
            }
            Ok((n, s / v.sqrt()))
        })
        .collect()
}

/// `ε*(n) = k · n^a · g_γ(n)` with `g` from a decay family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsStarModel {
    pub family: DecayFamily,
    pub k: f64,
    pub a: f64,
    pub gamma: f64,
}

impl EpsStarModel {
    pub fn eval(&self, n: f64) -> f64 {
        n.powf(self.a) * self.family.eval(n, self.k, self.gamma)
    }
}

/// Default tolerable-RAE boundaries for NGD on BENQO.
pub const DEFAULT_EPS_STAR: [EpsStarModel; 3] = [
    EpsStarModel { family: DecayFamily::Exp, k: 8.5, a: 0.4, gamma: 0.5 },
    EpsStarModel { family: DecayFamily::Pl, k: 22.0, a: 0.0, gamma: 1.8 },
    EpsStarModel { family: DecayFamily::Log, k: 2.5, a: 0.4, gamma: 3.2 },
];

pub fn default_eps_star(family: DecayFamily) -> EpsStarModel {
    DEFAULT_EPS_STAR[family as usize]
}

/// Finite-sampling RAE `ε_FS(n, shots) = k·exp(rate·n) / √shots`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FsModel {
    pub k: f64,
    pub rate: f64,
}

pub const DEFAULT_FS_MODEL: FsModel = FsModel { k: 4.0, rate: 0.04 };

impl FsModel {
    pub fn eps(&self, n: f64, shots: f64) -> f64 {
        self.k * (self.rate * n).exp() / shots.sqrt()
    }

    /// Shots at which `ε_FS` equals `eps`.
    pub fn required_shots(&self, n: f64, eps: f64) -> f64 {
        (self.k * (self.rate * n).exp() / eps).powi(2)
    }
}

/// Loss evaluations of a run as `iterations · (constant + per_param·n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CallModel {
    pub iterations: f64,
    pub constant: f64,
    pub per_param: f64,
}

/// NGD with `k_max = 20`: one loss and `2n` shifted evaluations per step.
pub const NGD_CALLS: CallModel = CallModel { iterations: 20.0, constant: 1.0, per_param: 2.0 };

impl CallModel {
    pub fn calls(&self, n: f64) -> f64 {
        self.iterations * (self.constant + self.per_param * n)
    }

    /// Shots per evaluation above which the run samples more than `2^n`
    /// times in total.
    pub fn shot_ceiling(&self, n: f64) -> f64 {
        n.exp2() / self.calls(n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionRow {
    pub n: u32,
    pub eps_star: f64,
    pub required_shots: f64,
    pub shot_ceiling: f64,
    /// Ceiling reaches one shot per evaluation.
    pub ceiling_feasible: bool,
    /// Required shots fit under the ceiling.
    pub advantage_possible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub schema_version: String,
    pub family: DecayFamily,
    pub eps_star: EpsStarModel,
    pub fs: FsModel,
    pub calls: CallModel,
    pub rows: Vec<ProjectionRow>,
    /// Smallest `n` from which every larger `n` in range allows advantage.
    pub window_opens: Option<u32>,
}

impl Projection {
    pub fn row(&self, n: u32) -> Option<&ProjectionRow> {
        self.rows.iter().find(|r| r.n == n)
    }
}

pub fn project_shots(
    eps_star: &EpsStarModel,
    fs: &FsModel,
    calls: &CallModel,
    n_range: std::ops::RangeInclusive<u32>,
) -> Result<Projection> {
    let mut rows = Vec::new();
    for n in n_range {
        let x = f64::from(n);
        let e = eps_star.eval(x);
        let c = calls.calls(x);
        if !(e > 0.0 && e.is_finite() && c > 0.0) {
            return Err(Error::invalid(format!("models are not positive at n={n}")));
        }
        let required_shots = fs.required_shots(x, e);
        let shot_ceiling = calls.shot_ceiling(x);
        rows.push(ProjectionRow {
            n,
            eps_star: e,
            required_shots,
            shot_ceiling,
            ceiling_feasible: shot_ceiling >= 1.0,
            advantage_possible: required_shots <= shot_ceiling,
        });
    }
    let window_opens = rows
        .iter()
        .rposition(|r| !r.advantage_possible)
        .map_or(rows.first().map(|r| r.n), |i| rows.get(i + 1).map(|r| r.n));
    Ok(Projection {
        schema_version: FIT_SCHEMA_VERSION.to_string(),
        family: eps_star.family,
        eps_star: *eps_star,
        fs: *fs,
        calls: *calls,
        rows,
        window_opens,
    })
}

/// `shots · calls · depth · t_gate` seconds.
pub fn runtime_lower_bound(n_shots: f64, n_calls: f64, depth: f64, t_gate: f64) -> Result<f64> {
    if [n_shots, n_calls, depth, t_gate].iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::invalid("runtime bound needs positive finite factors"));
    }
    Ok(n_shots * n_calls * depth * t_gate)
}

/// One optimizer × family cell of the decay-fit report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReportEntry {
    pub optimizer: String,
    pub family: DecayFamily,
    pub k_star: f64,
    pub k_err: f64,
    pub gamma_star: f64,
    pub gamma_err: f64,
    pub mse: f64,
    /// Lowest MSE among the families for this optimizer.
    pub best: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub schema_version: String,
    pub entries: Vec<FitReportEntry>,
    /// Per optimizer, fit failures keyed by family.
    pub failures: Vec<(String, DecayFamily, String)>,
}

/// Fits all families to each optimizer's `(n, σ*)` boundary.
pub fn decay_report(boundaries: &[(String, Vec<(f64, f64)>)], space: FitSpace) -> FitReport {
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for (name, pts) in boundaries {
        let (ns, ys): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
        let start = entries.len();
        for fam in DecayFamily::ALL {
            match fit_decay(&ns, &ys, fam, space) {
                Ok(f) => entries.push(FitReportEntry {
                    optimizer: name.clone(),
                    family: fam,
                    k_star: f.k_star,
                    k_err: f.k_err,
                    gamma_star: f.gamma_star,
                    gamma_err: f.gamma_err,
                    mse: f.mse,
                    best: false,
                }),
                Err(e) => failures.push((name.clone(), fam, e.to_string())),
            }
        }
        let group = &mut entries[start..];
        if let Some(i) = (0..group.len()).min_by(|&a, &b| group[a].mse.total_cmp(&group[b].mse)) {
            group[i].best = true;
        }
    }
    FitReport { schema_version: FIT_SCHEMA_VERSION.to_string(), entries, failures }
}

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..count).map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64)).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn line_fit() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let f = nlls_fit(&|x, p: &[f64]| p[0] * x + p[1], &xs, &ys, None, &[vec![0.0, 0.0]], None, &LmOptions::default())
            .unwrap();
        assert!((f.params[0] - 2.0).abs() < 1e-9 && (f.params[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bad_inputs() {
        let m = |x: f64, p: &[f64]| p[0] * x;
        let o = LmOptions::default();
        assert!(nlls_fit(&m, &[1.0], &[1.0, 2.0], None, &[vec![1.0]], None, &o).is_err());
        assert!(nlls_fit(&m, &[], &[], None, &[vec![1.0]], None, &o).is_err());
        assert!(nlls_fit(&m, &[1.0], &[1.0], None, &[], None, &o).is_err());
        let nan = |_: f64, _: &[f64]| f64::NAN;
        assert!(matches!(nlls_fit(&nan, &[1.0], &[1.0], None, &[vec![1.0]], None, &o), Err(Error::FitFailure(_))));
    }

    #[test]
    fn tanh_exact_recovery() {
        let sig = logspace(1e-3, 1e1, 16);
        let ys: Vec<f64> = sig.iter().map(|&s| tanh_curve(s, 1.0, 0.0, 2.0, 1.0)).collect();
        let f = fit_tanh(&sig, &ys, None).unwrap();
        for (got, want) in [(f.p_u, 1.0), (f.p_l, 0.0), (f.b, 2.0), (f.c, 1.0)] {
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
        let r = resilience_metrics(&f).unwrap();
        assert!((r.sigma_star - 0.5f64.exp()).abs() < 1e-6);
        assert!(!r.censored);
    }

    #[test]
    fn resilience_arithmetic() {
        let fit = TanhFit {
            p_u: 1.0,
            p_l: 0.0,
            b: 2.0,
            c: 1.0,
            std_errors: [0.0; 4],
            covariance: Vec::new(),
            residual_norm: 0.0,
            censored: false,
            range: (1e-3, 10.0),
        };
        let r = resilience_metrics(&fit).unwrap();
        assert!((r.sigma_star - 1.6487212707001282).abs() < 1e-12);
        assert!((r.m_star - (2.0 * (0.0 - 1.0) / 2.0) * (-0.5f64).exp()).abs() < 1e-12);
        let s = r.sigma_res.unwrap();
        assert!((fit.eval(s) - 0.9).abs() < 1e-10);
        // slope at σ* by finite difference
        let h = 1e-6;
        let d = (fit.eval(r.sigma_star + h) - fit.eval(r.sigma_star - h)) / (2.0 * h);
        assert!((d - r.m_star).abs() < 1e-6);

        let flat = TanhFit { p_u: 0.0, ..fit.clone() };
        assert_eq!(resilience_metrics(&flat).unwrap().sigma_res, None);
        let shallow = TanhFit { p_l: 0.95, ..fit };
        assert_eq!(resilience_metrics(&shallow).unwrap().sigma_res, None);
    }

    #[test]
    fn constant_data_censored() {
        let f = fit_tanh(&logspace(1e-3, 10.0, 8), &[0.8; 8], None).unwrap();
        assert!(f.censored);
        assert!(resilience_metrics(&f).unwrap().censored);
    }

    #[test]
    fn sigma_star_outside_grid_censored() {
        let sig = logspace(1e-3, 1e-2, 8);
        // transition at σ* = e^10, far beyond the grid
        let ys: Vec<f64> = sig.iter().map(|&s| tanh_curve(s, 1.0, 0.0, 1.0, 10.0)).collect();
        let fit = TanhFit {
            p_u: 1.0,
            p_l: 0.0,
            b: 1.0,
            c: 10.0,
            std_errors: [0.0; 4],
            covariance: Vec::new(),
            residual_norm: 0.0,
            censored: false,
            range: (sig[0], sig[7]),
        };
        assert!(ys.iter().all(|&y| y > 0.99));
        assert!(resilience_metrics(&fit).unwrap().censored);
    }

    #[test]
    fn weights_are_floored() {
        let s = solvability_sigmas(&[0.0, 0.5, 1.0], 100);
        assert!((s[0] - 0.005).abs() < 1e-15 && (s[2] - 0.005).abs() < 1e-15);
        assert!((s[1] - 0.05).abs() < 1e-15);
    }

    #[test]
    fn decay_exact() {
        let ns: Vec<f64> = (3..=10).map(f64::from).collect();
        for fam in DecayFamily::ALL {
            let ys: Vec<f64> = ns.iter().map(|&n| fam.eval(n, 5.0, 2.0)).collect();
            for space in [FitSpace::Linear, FitSpace::Log] {
                let f = fit_decay(&ns, &ys, fam, space).unwrap();
                assert!((f.k_star - 5.0).abs() < 1e-6 && (f.gamma_star - 2.0).abs() < 1e-6, "{fam} {space:?}");
                assert!(f.mse < 1e-20);
            }
        }
        assert!(fit_decay(&ns, &vec![-1.0; ns.len()], DecayFamily::Pl, FitSpace::Linear).is_err());
        assert!(fit_decay(&[1.0, 2.0, 3.0], &[1.0, 0.5, 0.2], DecayFamily::Log, FitSpace::Linear).is_err());
    }

    #[test]
    fn log_mode_matches_regression() {
        let ns: Vec<f64> = (3..=10).map(f64::from).collect();
        let mut r = rng::stream(3, &[]);
        let jit = Normal::new(0.0, 0.05).unwrap();
        let ys: Vec<f64> = ns.iter().map(|&n| 8.0 * n.powf(-2.3) * (1.0 + jit.sample(&mut r))).collect();
        let f = fit_decay(&ns, &ys, DecayFamily::Pl, FitSpace::Log).unwrap();
        let lx: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
        let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
        let l = stats::linear_regression(&lx, &ly).unwrap();
        assert!((f.gamma_star + l.slope).abs() < 1e-8);
        assert!((f.k_star - l.intercept.exp()).abs() < 1e-8);
    }

    #[test]
    fn rae_conversion() {
        let s = [(3.0, 0.5), (4.0, 0.2)];
        assert_eq!(convert_to_rae(&s, &[(3.0, 1.0), (4.0, 1.0)]).unwrap(), s.to_vec());
        let half = convert_to_rae(&s, &[(3.0, 2.0), (4.0, 2.0)]).unwrap();
        assert!((half[0].1 - 0.5 / 2f64.sqrt()).abs() < 1e-15);
        assert!(convert_to_rae(&s, &[(3.0, 1.0), (5.0, 1.0)]).is_err());
        assert!(convert_to_rae(&s, &[(3.0, 1.0)]).is_err());
    }

    #[test]
    fn default_models() {
        let pl = default_eps_star(DecayFamily::Pl);
        assert!((pl.eval(10.0) - 22.0 * 10f64.powf(-1.8)).abs() < 1e-15);
        assert_eq!(default_eps_star(DecayFamily::Log).family, DecayFamily::Log);
        assert!((NGD_CALLS.shot_ceiling(9.0) - 512.0 / 380.0).abs() < 1e-12);
        let e = DEFAULT_FS_MODEL.eps(10.0, 1024.0);
        assert!((e - 4.0 * 0.4f64.exp() / 32.0).abs() < 1e-15);
        assert!((DEFAULT_FS_MODEL.required_shots(10.0, e) - 1024.0).abs() < 1e-9);
    }

    #[test]
    fn runtime_bound() {
        assert_eq!(runtime_lower_bound(1e6, 20.0 * 201.0, 1.0, 100e-9).unwrap(), 1e6 * 4020.0 * 1e-7);
        assert!(runtime_lower_bound(0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn window_detection() {
        let p = project_shots(&default_eps_star(DecayFamily::Pl), &DEFAULT_FS_MODEL, &NGD_CALLS, 3..=100).unwrap();
        let w = p.window_opens.unwrap();
        assert!(p.rows.iter().all(|r| r.advantage_possible == (r.n >= w)));
        assert!(p.row(8).is_some_and(|r| !r.ceiling_feasible));
        assert!(p.row(9).is_some_and(|r| r.ceiling_feasible));
    }

    #[test]
    fn report_marks_best() {
        let ns: Vec<f64> = (3..=10).map(f64::from).collect();
        let pts: Vec<(f64, f64)> = ns.iter().map(|&n| (n, 8.0 * n.powf(-2.3))).collect();
        let rep = decay_report(&[("ngd".into(), pts)], FitSpace::Linear);
        assert_eq!(rep.entries.len(), 3);
        let best: Vec<_> = rep.entries.iter().filter(|e| e.best).collect();
        assert_eq!(best.len(), 1);
        assert_eq!(best[0].family, DecayFamily::Pl);
    }

    #[test]
    fn logspace_ends() {
        let v = logspace(1e-3, 1e1, 16);
        assert_eq!(v.len(), 16);
        assert!((v[0] - 1e-3).abs() < 1e-18 && (v[15] - 10.0).abs() < 1e-12);
    }
}
