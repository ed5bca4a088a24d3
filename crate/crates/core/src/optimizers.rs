//! Classical optimizers with uniform call accounting.
//!
//! Every optimizer talks to a [`LossOracle`] through a [`Budgeted`]
//! wrapper that counts each loss evaluation, including the shifted
//! evaluations of a gradient.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A (possibly noisy) loss the optimizers minimize.
pub trait LossOracle {
    fn n_params(&self) -> usize;

    /// One loss evaluation.
    fn value(&mut self, theta: &[f64]) -> Result<f64>;

    /// Gradient at `theta`, given the loss value `center` already measured
    /// there. Returns the gradient and the number of evaluations spent.
    fn gradient(&mut self, theta: &[f64], center: f64) -> Result<(Vec<f64>, usize)> {
        shift_rule_gradient(self, theta, center)
    }

    /// Monotone map to the quantity that is sinusoidal per coordinate.
    fn to_inner(&self, v: f64) -> f64 {
        v
    }

    /// Derivative of the loss with respect to the inner quantity.
    fn inner_slope(&self, _center: f64) -> f64 {
        1.0
    }

    /// Whether the inner quantity is exactly `a + b cos(θ_i - φ)` in every
    /// coordinate.
    fn is_sinusoidal(&self) -> bool {
        true
    }
}

/// `(v(θ_i + π/2) - v(θ_i - π/2)) / 2` on the inner quantity, chained back
/// through the inner slope. Spends `2n` evaluations.
pub fn shift_rule_gradient<O: LossOracle + ?Sized>(
    oracle: &mut O,
    theta: &[f64],
    center: f64,
) -> Result<(Vec<f64>, usize)> {
    let slope = oracle.inner_slope(center);
    let mut t = theta.to_vec();
    let mut grad = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        t[i] = theta[i] + FRAC_PI_2;
        let vp = oracle.value(&t)?;
        t[i] = theta[i] - FRAC_PI_2;
        let vm = oracle.value(&t)?;
        t[i] = theta[i];
        grad.push(slope * (oracle.to_inner(vp) - oracle.to_inner(vm)) / 2.0);
    }
    Ok((grad, 2 * theta.len()))
}

/// Adapts a closure into an oracle.
pub struct FnOracle<F> {
    n: usize,
    f: F,
}

impl<F: FnMut(&[f64]) -> f64> FnOracle<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F: FnMut(&[f64]) -> f64> LossOracle for FnOracle<F> {
    fn n_params(&self) -> usize {
        self.n
    }

    fn value(&mut self, theta: &[f64]) -> Result<f64> {
        Ok((self.f)(theta))
    }
}

/// Counts evaluations and enforces an optional call budget. Also tracks
/// every evaluated value for the trajectory.
pub struct Budgeted<'o> {
    inner: &'o mut dyn LossOracle,
    calls: usize,
    budget: Option<usize>,
    exhausted: bool,
    iteration: usize,
    trajectory: Vec<(usize, f64)>,
    best: Option<(f64, usize)>,
}

impl<'o> Budgeted<'o> {
    pub fn new(inner: &'o mut dyn LossOracle, budget: Option<usize>) -> Self {
        Self { inner, calls: 0, budget, exhausted: false, iteration: 0, trajectory: Vec::new(), best: None }
    }

    pub fn calls(&self) -> usize {
        self.calls
    }

    pub fn remaining(&self) -> usize {
        self.budget.map_or(usize::MAX, |b| b.saturating_sub(self.calls))
    }

    pub fn exhausted(&self) -> bool {
        self.exhausted
    }

    fn set_iteration(&mut self, k: usize) {
        self.iteration = k;
    }

    fn reserve(&mut self, k: usize) -> Result<()> {
        if self.remaining() < k {
            self.exhausted = true;
            return Err(Error::ResourceLimit(format!(
                "call budget of {} evaluations exhausted",
                self.budget.unwrap_or(0)
            )));
        }
        Ok(())
    }

    fn record(&mut self, v: f64) {
        self.trajectory.push((self.iteration, v));
        if self.best.is_none_or(|(b, _)| v < b) {
            self.best = Some((v, self.iteration));
        }
    }

    /// Gradient without recording the shifted values.
    fn gradient(&mut self, theta: &[f64], center: f64) -> Result<Vec<f64>> {
        self.reserve(2 * theta.len())?;
        let (g, used) = self.inner.gradient(theta, center)?;
        self.calls += used;
        Ok(g)
    }

    fn finish(self, theta_final: Vec<f64>, flags: RunFlags) -> Result<OptRun> {
        let (best_loss, best_iteration) = self
            .best
            .ok_or_else(|| Error::invalid("optimizer made no loss evaluations"))?;
        Ok(OptRun {
            theta_final,
            best_loss,
            best_iteration,
            n_calls: self.calls,
            trajectory: self.trajectory,
            flags: RunFlags { budget_exhausted: self.exhausted, ..flags },
        })
    }
}

impl LossOracle for Budgeted<'_> {
    fn n_params(&self) -> usize {
        self.inner.n_params()
    }

    fn value(&mut self, theta: &[f64]) -> Result<f64> {
        self.reserve(1)?;
        let v = self.inner.value(theta)?;
        self.calls += 1;
        self.record(v);
        Ok(v)
    }

    fn gradient(&mut self, theta: &[f64], center: f64) -> Result<(Vec<f64>, usize)> {
        let before = self.calls;
        let g = Budgeted::gradient(self, theta, center)?;
        Ok((g, self.calls - before))
    }

    fn to_inner(&self, v: f64) -> f64 {
        self.inner.to_inner(v)
    }

    fn inner_slope(&self, center: f64) -> f64 {
        self.inner.inner_slope(center)
    }

    fn is_sinusoidal(&self) -> bool {
        self.inner.is_sinusoidal()
    }
}

/// Stops a run cleanly when the budget runs out, propagates other errors.
fn stop_on_budget(r: Result<()>, b: &Budgeted<'_>) -> Result<()> {
    match r {
        Err(Error::ResourceLimit(_)) if b.exhausted() => Ok(()),
        other => other,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunFlags {
    /// Iterations where the gradient vanished and the position was held.
    pub zero_gradient_events: usize,
    /// Coordinate updates skipped because the sinusoid was flat.
    pub degenerate_sinusoids: usize,
    pub budget_exhausted: bool,
    /// Set when the method's model assumption does not hold exactly.
    pub approximate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptRun {
    pub theta_final: Vec<f64>,
    /// Lowest evaluated value; ties keep the first.
    pub best_loss: f64,
    pub best_iteration: usize,
    pub n_calls: usize,
    /// `(iteration, value)` of every recorded evaluation, as observed.
    pub trajectory: Vec<(usize, f64)>,
    pub flags: RunFlags,
}

/// `n` independent standard normal draws.
pub fn init_params<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub const DEFAULT_K_MAX: usize = 20;

/// Normalized gradient descent with step
/// `sqrt(πn/2)·exp(-4k²/k_max²)` for `k = 0..k_max`. Each iteration spends
/// one loss evaluation and one gradient, so `n_calls = (2n+1)·k_max` for
/// shift-rule gradients.
pub fn run_ngd(oracle: &mut dyn LossOracle, theta0: &[f64], k_max: usize) -> Result<OptRun> {
    if k_max == 0 {
        return Err(Error::invalid("k_max must be at least 1"));
    }
    check_dim(oracle, theta0)?;
    let n = theta0.len();
    let scale = (PI * n as f64 / 2.0).sqrt();
    let mut b = Budgeted::new(oracle, None);
    let mut theta = theta0.to_vec();
    let mut flags = RunFlags::default();
    for k in 0..k_max {
        b.set_iteration(k);
        let center = b.value(&theta)?;
        let g = b.gradient(&theta, center)?;
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            flags.zero_gradient_events += 1;
            continue;
        }
        let kf = k as f64 / k_max as f64;
        let step = scale * (-4.0 * kf * kf).exp();
        for (t, gi) in theta.iter_mut().zip(&g) {
            *t -= step * gi / norm;
        }
    }
    b.finish(theta, flags)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpsaConfig {
    pub iterations: usize,
    /// Gain numerator; calibrated from probe pairs when absent.
    pub a: Option<f64>,
    pub c: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// Stability constant as a fraction of `iterations`.
    pub stability_fraction: f64,
    /// Probe pairs spent on calibrating `a`.
    pub calibration_steps: usize,
    /// Intended magnitude of the first update.
    pub target_step: f64,
}

impl Default for SpsaConfig {
    fn default() -> Self {
        Self {
            iterations: 100,
            a: None,
            c: 0.2,
            alpha: 0.602,
            gamma: 0.101,
            stability_fraction: 0.1,
            calibration_steps: 25,
            target_step: 0.1,
        }
    }
}

impl SpsaConfig {
    /// Evaluations the run will spend.
    pub fn budget(&self) -> usize {
        let cal = if self.a.is_none() { 2 * self.calibration_steps } else { 0 };
        cal + 2 * self.iterations
    }
}

fn rademacher<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()
}

/// Two-measurement SPSA with Spall's gain sequences
/// `a_k = a/(k+1+A)^α`, `c_k = c/(k+1)^γ`. Perturbations are drawn from
/// `rng`, which is separate from any noise stream of the oracle.
pub fn run_spsa<R: Rng + ?Sized>(
    oracle: &mut dyn LossOracle,
    theta0: &[f64],
    cfg: &SpsaConfig,
    rng: &mut R,
) -> Result<OptRun> {
    check_dim(oracle, theta0)?;
    if cfg.iterations == 0 || cfg.c <= 0.0 {
        return Err(Error::invalid("SPSA needs iterations >= 1 and c > 0"));
    }
    let n = theta0.len();
    let big_a = cfg.stability_fraction * cfg.iterations as f64;
    let mut b = Budgeted::new(oracle, Some(cfg.budget()));
    let mut theta = theta0.to_vec();
    let a = match cfg.a {
        Some(a) => a,
        None => {
            let mut mag = 0.0;
            for _ in 0..cfg.calibration_steps {
                let d = rademacher(n, rng);
                let tp: Vec<f64> = theta.iter().zip(&d).map(|(t, di)| t + cfg.c * di).collect();
                let tm: Vec<f64> = theta.iter().zip(&d).map(|(t, di)| t - cfg.c * di).collect();
                mag += (b.value(&tp)? - b.value(&tm)?).abs() / (2.0 * cfg.c);
            }
            let mag = mag / cfg.calibration_steps.max(1) as f64;
            let base = cfg.target_step * (big_a + 1.0).powf(cfg.alpha);
            if mag > 0.0 { base / mag } else { base }
        }
    };
    for k in 0..cfg.iterations {
        b.set_iteration(k + 1);
        let ak = a / (k as f64 + 1.0 + big_a).powf(cfg.alpha);
        let ck = cfg.c / (k as f64 + 1.0).powf(cfg.gamma);
        let d = rademacher(n, rng);
        let tp: Vec<f64> = theta.iter().zip(&d).map(|(t, di)| t + ck * di).collect();
        let tm: Vec<f64> = theta.iter().zip(&d).map(|(t, di)| t - ck * di).collect();
        let diff = b.value(&tp)? - b.value(&tm)?;
        for (t, di) in theta.iter_mut().zip(&d) {
            *t -= ak * diff / (2.0 * ck) * di;
        }
    }
    b.finish(theta, RunFlags::default())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NftConfig {
    /// Total evaluation budget.
    pub budget: usize,
    /// Coordinate updates between fresh evaluations of the current point.
    pub reset_interval: usize,
}

impl Default for NftConfig {
    fn default() -> Self {
        Self { budget: 1024, reset_interval: 32 }
    }
}

/// Sinusoid `a + A cos d + B sin d` through `f(0)`, `f(π/2)`, `f(-π/2)`.
/// Returns the minimizing offset and the minimum, or `None` when flat.
pub fn sinusoid_minimizer(f0: f64, fp: f64, fm: f64) -> Option<(f64, f64)> {
    let a = (fp + fm) / 2.0;
    let bb = (fp - fm) / 2.0;
    let aa = f0 - a;
    let amp = aa.hypot(bb);
    if amp < 1e-12 {
        return None;
    }
    Some(((-bb).atan2(-aa), a - amp))
}

/// Nakanishi-Fuji-Todo sequential minimal optimization. The inner
/// quantity of the current point is carried forward from the fitted
/// minimum and refreshed by a real evaluation every `reset_interval`
/// updates.
pub fn run_nft(oracle: &mut dyn LossOracle, theta0: &[f64], cfg: &NftConfig) -> Result<OptRun> {
    check_dim(oracle, theta0)?;
    if cfg.budget < 3 {
        return Err(Error::invalid("NFT needs a budget of at least 3 evaluations"));
    }
    let n = theta0.len();
    let mut flags = RunFlags { approximate: !oracle.is_sinusoidal(), ..RunFlags::default() };
    let mut b = Budgeted::new(oracle, Some(cfg.budget));
    let mut theta = theta0.to_vec();
    let r = (|| -> Result<()> {
        let v = b.value(&theta)?;
        let mut cur = b.to_inner(v);
        let mut step = 0usize;
        loop {
            let i = step % n;
            b.set_iteration(step + 1);
            if step > 0 && cfg.reset_interval > 0 && step % cfg.reset_interval == 0 {
                let v = b.value(&theta)?;
                cur = b.to_inner(v);
            }
            b.reserve(2)?;
            let t0 = theta[i];
            theta[i] = t0 + FRAC_PI_2;
            let vp = b.value(&theta)?;
            let fp = b.to_inner(vp);
            theta[i] = t0 - FRAC_PI_2;
            let vm = b.value(&theta)?;
            let fm = b.to_inner(vm);
            match sinusoid_minimizer(cur, fp, fm) {
                Some((d, min)) => {
                    theta[i] = t0 + d;
                    cur = min;
                }
                None => {
                    theta[i] = t0;
                    flags.degenerate_sinusoids += 1;
                }
            }
            step += 1;
        }
    })();
    stop_on_budget(r, &b)?;
    b.finish(theta, flags)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PowellConfig {
    pub budget: usize,
    pub xtol: f64,
    pub ftol: f64,
}

impl Default for PowellConfig {
    fn default() -> Self {
        Self { budget: 1000, xtol: 1e-4, ftol: 1e-4 }
    }
}

const GOLD: f64 = 1.618_034;
const CGOLD: f64 = 0.381_966_0;
const TINY: f64 = 1e-21;

/// Downhill bracket `(a, b, c)` with `f(b) <= f(a), f(c)`, starting from
/// `xa`, `xb`.
pub fn bracket<F: FnMut(f64) -> Result<f64>>(
    f: &mut F,
    xa: f64,
    xb: f64,
) -> Result<[(f64, f64); 3]> {
    let grow_limit = 110.0;
    let (mut xa, mut xb) = (xa, xb);
    let (mut fa, mut fb) = (f(xa)?, f(xb)?);
    if fa < fb {
        std::mem::swap(&mut xa, &mut xb);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut xc = xb + GOLD * (xb - xa);
    let mut fc = f(xc)?;
    let mut iter = 0;
    while fc < fb {
        iter += 1;
        if iter > 1000 {
            return Err(Error::invalid("no bracket found: function appears unbounded"));
        }
        let tmp1 = (xb - xa) * (fb - fc);
        let tmp2 = (xb - xc) * (fb - fa);
        let val = tmp2 - tmp1;
        let denom = if val.abs() < TINY { 2.0 * TINY } else { 2.0 * val };
        let mut w = xb - ((xb - xc) * tmp2 - (xb - xa) * tmp1) / denom;
        let wlim = xb + grow_limit * (xc - xb);
        let mut fw;
        if (w - xc) * (xb - w) > 0.0 {
            fw = f(w)?;
            if fw < fc {
                return Ok([(xb, fb), (w, fw), (xc, fc)]);
            } else if fw > fb {
                return Ok([(xa, fa), (xb, fb), (w, fw)]);
            }
            w = xc + GOLD * (xc - xb);
            fw = f(w)?;
        } else if (w - wlim) * (wlim - xc) >= 0.0 {
            w = wlim;
            fw = f(w)?;
        } else if (w - wlim) * (xc - w) > 0.0 {
            fw = f(w)?;
            if fw < fc {
                xb = xc;
                xc = w;
                w = xc + GOLD * (xc - xb);
                fb = fc;
                fc = fw;
                fw = f(w)?;
            }
        } else {
            w = xc + GOLD * (xc - xb);
            fw = f(w)?;
        }
        xa = xb;
        xb = xc;
        xc = w;
        fa = fb;
        fb = fc;
        fc = fw;
    }
    Ok([(xa, fa), (xb, fb), (xc, fc)])
}

/// Brent's parabolic/golden-section minimization inside a bracket, with
/// relative tolerance `tol`.
pub fn brent<F: FnMut(f64) -> Result<f64>>(
    f: &mut F,
    br: [(f64, f64); 3],
    tol: f64,
) -> Result<(f64, f64)> {
    let [(xa, _), (xb, fb), (xc, _)] = br;
    let (mut a, mut b) = if xa < xc { (xa, xc) } else { (xc, xa) };
    let (mut x, mut w, mut v) = (xb, xb, xb);
    let (mut fx, mut fw, mut fv) = (fb, fb, fb);
    let mut deltax: f64 = 0.0;
    let mut rat: f64 = 0.0;
    for _ in 0..500 {
        let tol1 = tol * x.abs() + 1e-11;
        let tol2 = 2.0 * tol1;
        let xmid = 0.5 * (a + b);
        if (x - xmid).abs() < tol2 - 0.5 * (b - a) {
            break;
        }
        let golden = |x: f64| if x >= xmid { a - x } else { b - x };
        if deltax.abs() <= tol1 {
            deltax = golden(x);
            rat = CGOLD * deltax;
        } else {
            let tmp1 = (x - w) * (fx - fv);
            let mut tmp2 = (x - v) * (fx - fw);
            let mut p = (x - v) * tmp2 - (x - w) * tmp1;
            tmp2 = 2.0 * (tmp2 - tmp1);
            if tmp2 > 0.0 {
                p = -p;
            }
            tmp2 = tmp2.abs();
            let dx_temp = deltax;
            deltax = rat;
            if p > tmp2 * (a - x) && p < tmp2 * (b - x) && p.abs() < (0.5 * tmp2 * dx_temp).abs() {
                rat = p / tmp2;
                let u = x + rat;
                if (u - a) < tol2 || (b - u) < tol2 {
                    rat = if xmid - x >= 0.0 { tol1 } else { -tol1 };
                }
            } else {
                deltax = golden(x);
                rat = CGOLD * deltax;
            }
        }
        let u = if rat.abs() < tol1 { x + if rat >= 0.0 { tol1 } else { -tol1 } } else { x + rat };
        let fu = f(u)?;
        if fu > fx {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                w = u;
                fv = fw;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        } else {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            w = x;
            x = u;
            fv = fw;
            fw = fx;
            fx = fu;
        }
    }
    Ok((x, fx))
}

/// Minimizes along `dir` from `x`; returns the step `α`, the new value and
/// the new point.
fn line_minimize(
    b: &mut Budgeted<'_>,
    x: &[f64],
    dir: &[f64],
    tol: f64,
) -> Result<(f64, f64, Vec<f64>)> {
    let mut g = |alpha: f64| -> Result<f64> {
        let p: Vec<f64> = x.iter().zip(dir).map(|(xi, di)| xi + alpha * di).collect();
        b.value(&p)
    };
    let br = bracket(&mut g, 0.0, 1.0)?;
    let (alpha, fval) = brent(&mut g, br, tol)?;
    let p = x.iter().zip(dir).map(|(xi, di)| xi + alpha * di).collect();
    Ok((alpha, fval, p))
}

/// Powell's conjugate direction method with the classic direction-set
/// replacement test. Stops on the relative `ftol` criterion or when the
/// budget runs out.
pub fn run_powell(oracle: &mut dyn LossOracle, theta0: &[f64], cfg: &PowellConfig) -> Result<OptRun> {
    check_dim(oracle, theta0)?;
    let n = theta0.len();
    if cfg.budget < n + 1 {
        return Err(Error::invalid(format!("Powell needs a budget of at least n+1 = {}", n + 1)));
    }
    let mut b = Budgeted::new(oracle, Some(cfg.budget));
    let mut x = theta0.to_vec();
    let mut dirs: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let line_tol = cfg.xtol * 100.0;
    let r = (|| -> Result<()> {
        let mut fval = b.value(&x)?;
        let mut x1 = x.clone();
        let mut iter = 0;
        loop {
            iter += 1;
            b.set_iteration(iter);
            let fx = fval;
            let (mut bigind, mut delta) = (0, 0.0);
            for (i, d) in dirs.iter().enumerate() {
                let fx2 = fval;
                let (_, fnew, xnew) = line_minimize(&mut b, &x, d, line_tol)?;
                fval = fnew;
                x = xnew;
                if fx2 - fval > delta {
                    delta = fx2 - fval;
                    bigind = i;
                }
            }
            if 2.0 * (fx - fval) <= cfg.ftol * (fx.abs() + fval.abs()) + 1e-20 {
                return Ok(());
            }
            let direc1: Vec<f64> = x.iter().zip(&x1).map(|(a, c)| a - c).collect();
            let x2: Vec<f64> = x.iter().zip(&x1).map(|(a, c)| 2.0 * a - c).collect();
            x1 = x.clone();
            let fx2 = b.value(&x2)?;
            if fx > fx2 {
                let mut t = 2.0 * (fx + fx2 - 2.0 * fval);
                let temp = fx - fval - delta;
                t *= temp * temp;
                let temp = fx - fx2;
                t -= delta * temp * temp;
                if t < 0.0 {
                    let (alpha, fnew, xnew) = line_minimize(&mut b, &x, &direc1, line_tol)?;
                    fval = fnew;
                    x = xnew;
                    let scaled: Vec<f64> = direc1.iter().map(|d| d * alpha).collect();
                    if scaled.iter().any(|&d| d != 0.0) {
                        dirs[bigind] = dirs[n - 1].clone();
                        dirs[n - 1] = scaled;
                    }
                }
            }
        }
    })();
    stop_on_budget(r, &b)?;
    b.finish(x, RunFlags::default())
}

fn check_dim(oracle: &dyn LossOracle, theta0: &[f64]) -> Result<()> {
    if theta0.is_empty() || theta0.len() != oracle.n_params() {
        return Err(Error::invalid(format!(
            "initial point has {} entries, oracle expects {}",
            theta0.len(),
            oracle.n_params()
        )));
    }
    Ok(())
}

/// Externally supplied optimizer.
pub trait OptimizerPlugin: Send + Sync {
    fn name(&self) -> &str;

    /// Runs against an oracle that already counts calls; the returned run
    /// may leave `n_calls` at zero, the dispatcher fills it in.
    fn run(
        &self,
        oracle: &mut dyn LossOracle,
        theta0: &[f64],
        params: &BTreeMap<String, f64>,
        seed: u64,
    ) -> Result<OptRun>;
}

#[derive(Clone, Default)]
pub struct PluginRegistry {
    plugins: BTreeMap<String, Arc<dyn OptimizerPlugin>>,
}

impl PluginRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, plugin: Arc<dyn OptimizerPlugin>) {
        self.plugins.insert(plugin.name().to_string(), plugin);
    }

    pub fn get(&self, name: &str) -> Option<&Arc<dyn OptimizerPlugin>> {
        self.plugins.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.plugins.keys().map(String::as_str)
    }
}

impl std::fmt::Debug for PluginRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.plugins.keys()).finish()
    }
}

fn default_k_max() -> usize {
    DEFAULT_K_MAX
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerSpec {
    Ngd {
        #[serde(default = "default_k_max")]
        k_max: usize,
    },
    Spsa(SpsaConfig),
    Nft(NftConfig),
    Powell(PowellConfig),
    Plugin {
        name: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
}

impl OptimizerSpec {
    pub fn ngd() -> Self {
        OptimizerSpec::Ngd { k_max: DEFAULT_K_MAX }
    }

    /// The built-in optimizers with their defaults.
    pub fn defaults() -> Vec<Self> {
        vec![
            Self::ngd(),
            OptimizerSpec::Spsa(SpsaConfig::default()),
            OptimizerSpec::Nft(NftConfig::default()),
            OptimizerSpec::Powell(PowellConfig::default()),
        ]
    }

    /// Short label used in records and stream derivation.
    pub fn id(&self) -> &str {
        match self {
            OptimizerSpec::Ngd { .. } => "ngd",
            OptimizerSpec::Spsa(_) => "spsa",
            OptimizerSpec::Nft(_) => "nft",
            OptimizerSpec::Powell(_) => "powell",
            OptimizerSpec::Plugin { name, .. } => name,
        }
    }

    /// Stable numeric id (FNV-1a of the label).
    pub fn stream_id(&self) -> u64 {
        self.id().bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
            (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
        })
    }

    pub fn validate(&self, registry: &PluginRegistry) -> Result<()> {
        match self {
            OptimizerSpec::Ngd { k_max } if *k_max == 0 => Err(Error::Config("k_max must be at least 1".into())),
            OptimizerSpec::Spsa(c) if c.iterations == 0 => {
                Err(Error::Config("SPSA iterations must be at least 1".into()))
            }
            OptimizerSpec::Plugin { name, .. } if registry.get(name).is_none() => {
                Err(Error::Config(format!("unknown optimizer plugin '{name}'")))
            }
            _ => Ok(()),
        }
    }
}

/// Uniform dispatch. `seed` feeds optimizers with internal randomness
/// (SPSA perturbations, plugins).
pub fn run(
    spec: &OptimizerSpec,
    oracle: &mut dyn LossOracle,
    theta0: &[f64],
    registry: &PluginRegistry,
    seed: u64,
) -> Result<OptRun> {
    match spec {
        OptimizerSpec::Ngd { k_max } => run_ngd(oracle, theta0, *k_max),
        OptimizerSpec::Spsa(cfg) => run_spsa(oracle, theta0, cfg, &mut crate::rng::stream_from_seed(seed)),
        OptimizerSpec::Nft(cfg) => run_nft(oracle, theta0, cfg),
        OptimizerSpec::Powell(cfg) => run_powell(oracle, theta0, cfg),
        OptimizerSpec::Plugin { name, params } => {
            let plugin = registry
                .get(name)
                .ok_or_else(|| Error::Config(format!("unknown optimizer plugin '{name}'")))?;
            check_dim(oracle, theta0)?;
            let mut b = Budgeted::new(oracle, None);
            let r = plugin.run(&mut b, theta0, params, seed)?;
            let calls = b.calls();
            Ok(OptRun { n_calls: calls, ..r })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn sphere(t: &[f64]) -> f64 {
        t.iter().map(|x| x * x).sum()
    }

    #[test]
    fn init_params_moments() {
        let mut r = rng::stream(1, &[]);
        let draws: Vec<Vec<f64>> = (0..100_000).map(|_| init_params(3, &mut r)).collect();
        for i in 0..3 {
            let col: Vec<f64> = draws.iter().map(|d| d[i]).collect();
            assert!(crate::stats::mean(&col).abs() < 0.01);
            assert!((crate::stats::sample_variance(&col) - 1.0).abs() < 0.02);
        }
        assert_eq!(init_params(4, &mut rng::stream(2, &[])), init_params(4, &mut rng::stream(2, &[])));
    }

    #[test]
    fn ngd_descends_on_bowl() {
        let mut r = rng::stream(3, &[]);
        for _ in 0..20 {
            let t0 = init_params(2, &mut r);
            let mut o = FnOracle::new(2, sphere);
            let run = run_ngd(&mut o, &t0, 20).unwrap();
            assert!(sphere(&run.theta_final).sqrt() < sphere(&t0).sqrt());
            assert_eq!(run.n_calls, 5 * 20);
        }
    }

    #[test]
    fn ngd_call_count_default_setting() {
        let mut o = FnOracle::new(6, |t: &[f64]| t.iter().map(|x| x.cos()).sum());
        let run = run_ngd(&mut o, &[0.3; 6], 20).unwrap();
        assert_eq!(run.n_calls, 260);
        assert_eq!(run.trajectory.len(), 20);
    }

    #[test]
    fn ngd_constant_loss_holds() {
        let mut o = FnOracle::new(3, |_: &[f64]| 1.5);
        let t0 = [0.1, -0.4, 2.0];
        let run = run_ngd(&mut o, &t0, 20).unwrap();
        assert_eq!(run.theta_final, t0.to_vec());
        assert_eq!(run.flags.zero_gradient_events, 20);
    }

    #[test]
    fn spsa_improves_sphere() {
        let mut wins = 0;
        for seed in 0..100 {
            let t0 = init_params(4, &mut rng::stream(seed, &[0]));
            let mut o = FnOracle::new(4, sphere);
            let cfg = SpsaConfig::default();
            let run = run_spsa(&mut o, &t0, &cfg, &mut rng::stream(seed, &[1])).unwrap();
            assert_eq!(run.n_calls, 2 * cfg.calibration_steps + 2 * cfg.iterations);
            if run.best_loss < sphere(&t0) {
                wins += 1;
            }
        }
        assert!(wins >= 95, "{wins}/100");
    }

    #[test]
    fn spsa_perturbations_are_rademacher() {
        let mut seen = Vec::new();
        let mut o = FnOracle::new(3, |t: &[f64]| {
            seen.push(t.to_vec());
            0.0
        });
        let cfg = SpsaConfig { iterations: 5, a: Some(0.1), ..SpsaConfig::default() };
        run_spsa(&mut o, &[0.0; 3], &cfg, &mut rng::stream(4, &[])).unwrap();
        // θ stays at 0 on a flat loss, so every probe is ±c_k per component
        for (k, pair) in seen.chunks(2).enumerate() {
            let ck = cfg.c / (k as f64 + 1.0).powf(cfg.gamma);
            for (p, m) in pair[0].iter().zip(&pair[1]) {
                assert!((p.abs() - ck).abs() < 1e-15 && (p + m).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn sinusoid_fit_example() {
        let (d, min) = sinusoid_minimizer(1.0, 0.0, 2.0).unwrap();
        assert!((d - FRAC_PI_2).abs() < 1e-15);
        assert!(min.abs() < 1e-15);
        assert!(sinusoid_minimizer(0.5, 0.5, 0.5).is_none());

        let mut o = FnOracle::new(1, |t: &[f64]| 1.0 - t[0].sin());
        let run = run_nft(&mut o, &[0.0], &NftConfig { budget: 3, reset_interval: 32 }).unwrap();
        assert!((run.theta_final[0] - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn nft_at_minimum_stays() {
        // minimum of 1 - sin at π/2
        let mut o = FnOracle::new(1, |t: &[f64]| 1.0 - t[0].sin());
        let run = run_nft(&mut o, &[FRAC_PI_2], &NftConfig { budget: 3, reset_interval: 32 }).unwrap();
        assert!((run.theta_final[0] - FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn powell_quadratic() {
        let f = |t: &[f64]| (t[0] - 1.0).powi(2) + (t[1] + 2.0).powi(2);
        let mut o = FnOracle::new(2, f);
        let cfg = PowellConfig { budget: 1000, xtol: 1e-10, ftol: 1e-12 };
        let run = run_powell(&mut o, &[0.0, 0.0], &cfg).unwrap();
        assert!((run.theta_final[0] - 1.0).abs() < 1e-6);
        assert!((run.theta_final[1] + 2.0).abs() < 1e-6);
        assert!(run.n_calls <= 1000);
    }

    #[test]
    fn powell_respects_budget() {
        let f = |t: &[f64]| t.iter().enumerate().map(|(i, x)| (x - i as f64).powi(2) + x.sin()).sum();
        for budget in [5, 17, 60] {
            let mut o = FnOracle::new(4, f);
            let run = run_powell(&mut o, &[0.5; 4], &PowellConfig { budget, ..Default::default() }).unwrap();
            assert!(run.n_calls <= budget);
        }
    }

    #[test]
    fn line_search_finds_vertex() {
        let mut g = |x: f64| -> Result<f64> { Ok(3.0 * (x - 2.5).powi(2) + 1.0) };
        let br = bracket(&mut g, 0.0, 1.0).unwrap();
        assert!(br[1].1 <= br[0].1 && br[1].1 <= br[2].1);
        let (x, fx) = brent(&mut g, br, 1e-8).unwrap();
        assert!((x - 2.5).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-12);
    }

    struct Tally {
        count: usize,
    }

    impl LossOracle for Tally {
        fn n_params(&self) -> usize {
            3
        }
        fn value(&mut self, t: &[f64]) -> Result<f64> {
            self.count += 1;
            Ok(t.iter().map(|x| x.cos()).sum())
        }
    }

    struct RandomSearch;

    impl OptimizerPlugin for RandomSearch {
        fn name(&self) -> &str {
            "random_search"
        }
        fn run(
            &self,
            oracle: &mut dyn LossOracle,
            theta0: &[f64],
            params: &BTreeMap<String, f64>,
            seed: u64,
        ) -> Result<OptRun> {
            let steps = params.get("steps").copied().unwrap_or(10.0) as usize;
            let mut r = rng::stream_from_seed(seed);
            let mut best = (oracle.value(theta0)?, theta0.to_vec());
            for _ in 0..steps {
                let t: Vec<f64> = best.1.iter().map(|x| x + 0.1 * r.random::<f64>()).collect();
                let v = oracle.value(&t)?;
                if v < best.0 {
                    best = (v, t);
                }
            }
            Ok(OptRun {
                theta_final: best.1,
                best_loss: best.0,
                best_iteration: 0,
                n_calls: 0,
                trajectory: Vec::new(),
                flags: RunFlags::default(),
            })
        }
    }

    #[test]
    fn dispatch_matches_direct_calls_and_counts() {
        let reg = PluginRegistry::new();
        let t0 = [0.2, -0.3, 0.9];
        for spec in OptimizerSpec::defaults() {
            let mut a = Tally { count: 0 };
            let via = run(&spec, &mut a, &t0, &reg, 77).unwrap();
            let mut b = Tally { count: 0 };
            let direct = match &spec {
                OptimizerSpec::Ngd { k_max } => run_ngd(&mut b, &t0, *k_max),
                OptimizerSpec::Spsa(c) => run_spsa(&mut b, &t0, c, &mut rng::stream_from_seed(77)),
                OptimizerSpec::Nft(c) => run_nft(&mut b, &t0, c),
                OptimizerSpec::Powell(c) => run_powell(&mut b, &t0, c),
                OptimizerSpec::Plugin { .. } => unreachable!(),
            }
            .unwrap();
            assert_eq!(via, direct, "{}", spec.id());
            assert_eq!(via.n_calls, a.count, "{}", spec.id());
        }
    }

    #[test]
    fn plugin_registry() {
        let mut reg = PluginRegistry::new();
        let spec = OptimizerSpec::Plugin { name: "random_search".into(), params: BTreeMap::new() };
        let mut o = Tally { count: 0 };
        assert!(matches!(run(&spec, &mut o, &[0.0; 3], &reg, 1), Err(Error::Config(_))));
        assert!(spec.validate(&reg).is_err());
        reg.register(Arc::new(RandomSearch));
        let r = run(&spec, &mut o, &[0.0; 3], &reg, 1).unwrap();
        assert_eq!(r.n_calls, 11);
        assert_eq!(o.count, 11);
        assert!(spec.validate(&reg).is_ok());
    }

    #[test]
    fn spec_serde_fills_defaults() {
        let s: OptimizerSpec = serde_json::from_str(r#"{"kind":"spsa","iterations":50}"#).unwrap();
        match s {
            OptimizerSpec::Spsa(c) => {
                assert_eq!(c.iterations, 50);
                assert_eq!(c.alpha, 0.602);
            }
            _ => panic!(),
        }
        let s: OptimizerSpec = serde_json::from_str(r#"{"kind":"ngd"}"#).unwrap();
        assert_eq!(s, OptimizerSpec::ngd());
    }

    #[test]
    fn deterministic_runs() {
        let t0 = [0.4, 1.0];
        let mk = || FnOracle::new(2, |t: &[f64]| t[0].sin() * t[1].cos() + 0.1 * t[0] * t[0]);
        for spec in OptimizerSpec::defaults() {
            let (mut a, mut b) = (mk(), mk());
            let reg = PluginRegistry::new();
            assert_eq!(run(&spec, &mut a, &t0, &reg, 5).unwrap(), run(&spec, &mut b, &t0, &reg, 5).unwrap());
        }
    }
}
