//! Quick oracle and invariant checks, small enough to run on every build.

use std::f64::consts::PI;

use serde::Serialize;

use crate::fitlab::{self, DecayFamily, FitSpace};
use crate::harness::{self, ExperimentConfig, NoiseGrid};
use crate::losses::{draw_uniform_thetas, LossFunction, LossKind};
use crate::noise;
use crate::optimizers::{OptimizerSpec, PluginRegistry};
use crate::problems::{generate_random_qubo, qubo_to_ising};
use crate::{rng, Bitstring, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn qubo_ising() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for n in 1..=8usize {
        for inst in 0..10u64 {
            let q = generate_random_qubo(n, rng::derive_seed(1, &[n as u64, inst]))?;
            let m = qubo_to_ising(&q);
            for b in Bitstring::all(n) {
                worst = worst.max((q.value(b)? - m.energy_with_offset(b)?).abs());
            }
        }
    }
    Ok((worst <= 1e-9, format!("max deviation {worst:.1e}")))
}

fn gradients() -> Result<(bool, String)> {
    let h = 1e-5;
    let mut worst = 0.0f64;
    for kind in LossKind::ALL {
        let f = LossFunction::new(kind, qubo_to_ising(&generate_random_qubo(4, 3)?))?;
        for theta in draw_uniform_thetas(f.n_params(), 5, (-PI, PI), &mut rng::stream(2, &[kind as u64])) {
            let (g, _) = f.gradient_parameter_shift(&theta)?;
            let mut scale = 1e-3f64;
            let mut fd = Vec::with_capacity(g.len());
            for i in 0..theta.len() {
                let (mut tp, mut tm) = (theta.clone(), theta.clone());
                tp[i] += h;
                tm[i] -= h;
                let d = (f.normalized_loss(&tp)? - f.normalized_loss(&tm)?) / (2.0 * h);
                scale = scale.max(d.abs());
                fd.push(d);
            }
            for (a, b) in g.iter().zip(&fd) {
                worst = worst.max((a - b).abs() / scale);
            }
        }
    }
    Ok((worst <= 1e-6, format!("max relative deviation {worst:.1e}")))
}

fn basis_states() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    let m = qubo_to_ising(&generate_random_qubo(6, 4)?);
    for kind in [LossKind::Benqo, LossKind::Vqe2l] {
        let f = LossFunction::new(kind, m.clone())?;
        for b in Bitstring::all(6) {
            let theta: Vec<f64> = b.to_bools().iter().map(|&x| if x { PI } else { 0.0 }).collect();
            worst = worst.max((f.exact_loss(&theta)? - m.energy(b)?).abs());
        }
    }
    Ok((worst <= 1e-9, format!("max deviation {worst:.1e}")))
}

fn rae_identities() -> Result<(bool, String)> {
    let a = noise::rae(&[0.0, 1.0, 2.0], &[0.1, 1.1, 2.1])?;
    let b = noise::rae(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0])?;
    Ok(((a - 0.15).abs() < 1e-12 && b == 0.0, format!("rae examples {a:.3}, {b:.3}")))
}

fn fits() -> Result<(bool, String)> {
    let sig = fitlab::logspace(1e-3, 1e1, 16);
    let ys: Vec<f64> = sig.iter().map(|&s| fitlab::tanh_curve(s, 1.0, 0.0, 2.0, 1.0)).collect();
    let r = fitlab::resilience_metrics(&fitlab::fit_tanh(&sig, &ys, None)?)?;
    let ns: Vec<f64> = (3..=10).map(f64::from).collect();
    let pl: Vec<f64> = ns.iter().map(|&n| 5.0 * n.powf(-2.0)).collect();
    let d = fitlab::fit_decay(&ns, &pl, DecayFamily::Pl, FitSpace::Linear)?;
    let err = (r.sigma_star - 0.5f64.exp()).abs().max((d.k_star - 5.0).abs()).max((d.gamma_star - 2.0).abs());
    Ok((err < 1e-6, format!("σ*={:.6}, pl (k, γ)=({:.6}, {:.6})", r.sigma_star, d.k_star, d.gamma_star)))
}

fn projection_formulas() -> Result<(bool, String)> {
    let c9 = fitlab::NGD_CALLS.shot_ceiling(9.0);
    let p = fitlab::project_shots(
        &fitlab::default_eps_star(DecayFamily::Pl),
        &fitlab::DEFAULT_FS_MODEL,
        &fitlab::NGD_CALLS,
        3..=100,
    )?;
    let ok = (c9 - 512.0 / 380.0).abs() < 1e-12 && p.window_opens == Some(25);
    Ok((ok, format!("ceiling(9)={c9:.4}, pl window opens at {:?}", p.window_opens)))
}

fn sweep_determinism() -> Result<(bool, String)> {
    let cfg = ExperimentConfig {
        n_grid: vec![3, 4],
        noise: NoiseGrid { none: true, sigmas: vec![0.1], sigma_logspace: None, shots: vec![128] },
        optimizers: OptimizerSpec::defaults(),
        instances: 2,
        ..Default::default()
    };
    let reg = PluginRegistry::new();
    let csv = |w| -> Result<Vec<u8>> {
        let out = harness::run_sweep(&cfg, &reg, Some(w))?;
        let mut b = Vec::new();
        harness::write_records(&mut b, &out.records, &out.thresholds)?;
        Ok(b)
    };
    let (a, b) = (csv(1)?, csv(3)?);
    let (_, back) = harness::read_records(a.as_slice())?;
    let monotone = back.iter().all(|r| r.x.windows(2).all(|w| w[0] <= w[1]));
    Ok((a == b && monotone, format!("{} records, identical across worker counts: {}", back.len(), a == b)))
}

/// Runs every check; an error inside a check counts as a failure.
pub fn run_all() -> Vec<Check> {
    let checks: [(&'static str, fn() -> Result<(bool, String)>); 7] = [
        ("qubo_ising_oracle", qubo_ising),
        ("parameter_shift_vs_finite_differences", gradients),
        ("basis_state_consistency", basis_states),
        ("rae_examples", rae_identities),
        ("fit_recovery", fits),
        ("projection_formulas", projection_formulas),
        ("sweep_determinism", sweep_determinism),
    ];
    checks
        .iter()
        .map(|&(name, f)| match f() {
            Ok((pass, detail)) => Check { name, pass, detail },
            Err(e) => Check { name, pass: false, detail: e.to_string() },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_checks_pass() {
        for c in super::run_all() {
            assert!(c.pass, "{}: {}", c.name, c.detail);
        }
    }
}
