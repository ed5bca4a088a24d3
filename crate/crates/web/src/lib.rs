//! Browser bindings for a few vqscale operations. Every export returns a
//! JSON string; the `*_json` functions hold the logic and also run natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use vqscale::fitlab::{self, DecayFamily, FsModel};
use vqscale::losses::{draw_uniform_thetas, LossFunction, LossKind};
use vqscale::noise::{self, NoiseSpec};
use vqscale::problems::{generate_random_qubo, qubo_to_ising};
use vqscale::{rng, Error, Result};

/// Keeps the statevector small enough for an interactive page.
pub const MAX_DEMO_BITS: u32 = 12;

#[derive(Serialize)]
struct Landscape {
    kind: LossKind,
    n_params: usize,
    param: usize,
    thetas: Vec<f64>,
    exact: Vec<f64>,
    noisy: Vec<f64>,
    rae: Option<f64>,
}

/// Normalized loss along one parameter of a random instance, exact and
/// through `noise`. The other parameters sit at a random point drawn from
/// `seed`.
pub fn landscape_json(kind: &str, n: u32, seed: u32, noise: &str, param: u32, steps: u32) -> Result<String> {
    if !(1..=MAX_DEMO_BITS).contains(&n) {
        return Err(Error::invalid(format!("n must lie in 1..={MAX_DEMO_BITS}")));
    }
    if steps < 2 {
        return Err(Error::invalid("need at least two steps"));
    }
    let kind: LossKind = kind.parse()?;
    let spec: NoiseSpec = noise.parse()?;
    spec.validate()?;
    let n = n as usize;
    let f = LossFunction::new(kind, qubo_to_ising(&generate_random_qubo(n, u64::from(seed))?))?;
    let param = param as usize;
    if param >= f.n_params() {
        return Err(Error::invalid(format!("parameter index must be below {}", f.n_params())));
    }
    let mut rng = rng::stream(u64::from(seed), &[n as u64, kind as u64]);
    let mut theta = draw_uniform_thetas(f.n_params(), 1, noise::PARAM_RANGE, &mut rng).remove(0);
    let (lo, hi) = noise::PARAM_RANGE;
    let thetas: Vec<f64> = (0..steps).map(|i| lo + (hi - lo) * f64::from(i) / f64::from(steps - 1)).collect();
    let mut exact = Vec::with_capacity(thetas.len());
    let mut noisy = Vec::with_capacity(thetas.len());
    for &t in &thetas {
        theta[param] = t;
        exact.push(f.normalized_loss(&theta)?);
        noisy.push(noise::noisy_loss(&f, &theta, &spec, &mut rng)?);
    }
    let rae = noise::rae(&exact, &noisy).ok();
    Ok(serde_json::to_string(&Landscape { kind, n_params: f.n_params(), param, thetas, exact, noisy, rae })?)
}

#[derive(Serialize)]
struct Resilience {
    fit: fitlab::TanhFit,
    profile: fitlab::ResilienceProfile,
    curve: Vec<(f64, f64)>,
}

/// Fits the tanh transition to solvability points. With `runs > 0` the
/// points are weighted by their binomial errors.
pub fn resilience_json(sigmas: &[f64], p_hats: &[f64], runs: u32) -> Result<String> {
    let weights = (runs > 0).then(|| fitlab::solvability_sigmas(p_hats, runs as usize));
    let fit = fitlab::fit_tanh(sigmas, p_hats, weights.as_deref())?;
    let profile = fitlab::resilience_metrics(&fit)?;
    let (lo, hi) = fit.range;
    let curve = fitlab::logspace(lo, hi, 120).into_iter().map(|s| (s, fit.eval(s))).collect();
    Ok(serde_json::to_string(&Resilience { fit, profile, curve })?)
}

/// Shot requirement against the sampling ceiling for NGD, using the
/// default tolerable-RAE model of `family` and a sampling-error model.
pub fn projection_json(family: &str, n_max: u32, fs_k: f64, fs_rate: f64) -> Result<String> {
    let family: DecayFamily = family.parse()?;
    if !(fs_k > 0.0 && fs_k.is_finite() && fs_rate.is_finite()) {
        return Err(Error::invalid("sampling model needs k > 0 and a finite rate"));
    }
    if !(3..=1000).contains(&n_max) {
        return Err(Error::invalid("n_max must lie in 3..=1000"));
    }
    let p = fitlab::project_shots(
        &fitlab::default_eps_star(family),
        &FsModel { k: fs_k, rate: fs_rate },
        &fitlab::NGD_CALLS,
        3..=n_max,
    )?;
    Ok(serde_json::to_string(&p)?)
}

fn js<T>(r: Result<T>) -> std::result::Result<T, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn landscape(kind: &str, n: u32, seed: u32, noise: &str, param: u32, steps: u32) -> std::result::Result<String, JsError> {
    js(landscape_json(kind, n, seed, noise, param, steps))
}

#[wasm_bindgen]
pub fn resilience(sigmas: &[f64], p_hats: &[f64], runs: u32) -> std::result::Result<String, JsError> {
    js(resilience_json(sigmas, p_hats, runs))
}

#[wasm_bindgen]
pub fn projection(family: &str, n_max: u32, fs_k: f64, fs_rate: f64) -> std::result::Result<String, JsError> {
    js(projection_json(family, n_max, fs_k, fs_rate))
}
