//! Variational loss functions over an Ising cost operator.
//!
//! Three ansatz families share one descriptor:
//!
//! * `Benqo`: product state `⊗ RY(θ_i)|0⟩`, cost read through a Hadamard
//!   test on the block encoding of `sin(C/K)`, `L = K·asin(p0 - p1)`.
//! * `Vqe2l`: one RY layer followed by a linear CZ chain.
//! * `Qaoa`: `H^⊗n`, then `p = n/2` layers of `exp(-iγC)` and `exp(-iβΣX)`,
//!   parameters ordered `(γ1, β1, γ2, β2, …)`.
//!
//! Every kind uses `n` parameters. The normalized loss divides by
//! `l_max = max_q |C_q|`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::{IsingModel, MAX_ENUMERATION_BITS};
use crate::simstate::{GateSpec, StateVector};
use crate::stats;

/// Largest register for the full Hadamard-test circuit (system + 2 qubits).
pub const MAX_HADAMARD_TEST_BITS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Benqo,
    Vqe2l,
    Qaoa,
}

impl LossKind {
    pub const ALL: [LossKind; 3] = [LossKind::Benqo, LossKind::Vqe2l, LossKind::Qaoa];

    pub fn name(self) -> &'static str {
        match self {
            LossKind::Benqo => "benqo",
            LossKind::Vqe2l => "vqe2l",
            LossKind::Qaoa => "qaoa",
        }
    }
}

impl std::fmt::Display for LossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "benqo" => Ok(LossKind::Benqo),
            "vqe2l" | "vqe" => Ok(LossKind::Vqe2l),
            "qaoa" => Ok(LossKind::Qaoa),
            other => Err(Error::invalid(format!("unknown loss kind '{other}'"))),
        }
    }
}

/// Raw circuit output before any noise is applied.
#[derive(Debug, Clone, PartialEq)]
pub enum Evaluation {
    /// `p0 - p1` of the BENQO ancilla.
    Benqo { u: f64 },
    /// Expectation of the diagonal cost, with the output distribution when
    /// it was requested.
    Diagonal { value: f64, probs: Option<Vec<f64>> },
}

/// One term of a parameter-shift gradient: `weight * (L+ - L-) / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftTerm {
    pub weight: f64,
    pub plus: Evaluation,
    pub minus: Evaluation,
}

#[derive(Debug, Clone)]
pub struct LossFunction {
    kind: LossKind,
    ising: IsingModel,
    energies: Vec<f64>,
    sin_table: Vec<f64>,
    k_scale: f64,
    l_max: f64,
}

impl LossFunction {
    pub fn new(kind: LossKind, ising: IsingModel) -> Result<Self> {
        let n = ising.n();
        if n > MAX_ENUMERATION_BITS {
            return Err(Error::ResourceLimit(format!(
                "loss functions need the full energy table; n = {n} exceeds {MAX_ENUMERATION_BITS}"
            )));
        }
        if kind == LossKind::Qaoa && n % 2 != 0 {
            return Err(Error::invalid(format!(
                "QAOA with p = n/2 layers requires n to be even (got n = {n})"
            )));
        }
        let energies = ising.energy_table()?;
        let l_max = energies.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        let k_scale = if l_max > 0.0 { 2.0 * l_max / PI } else { 1.0 };
        let sin_table = if kind == LossKind::Benqo {
            energies.iter().map(|e| (e / k_scale).sin()).collect()
        } else {
            Vec::new()
        };
        Ok(Self { kind, ising, energies, sin_table, k_scale, l_max })
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn ising(&self) -> &IsingModel {
        &self.ising
    }

    pub fn n(&self) -> usize {
        self.ising.n()
    }

    pub fn n_params(&self) -> usize {
        self.ising.n()
    }

    /// BENQO scaling factor `K = (2/π)·max|C_q|`.
    pub fn k_scale(&self) -> f64 {
        self.k_scale
    }

    pub fn l_max(&self) -> f64 {
        self.l_max
    }

    pub fn energy_table(&self) -> &[f64] {
        &self.energies
    }

    /// QAOA layer count.
    pub fn layers(&self) -> usize {
        self.n() / 2
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params() {
            return Err(Error::invalid(format!(
                "expected {} parameters, got {}",
                self.n_params(),
                theta.len()
            )));
        }
        Ok(())
    }

    /// The circuit state. For BENQO this is the rotational layer only; the
    /// ancilla and block-encoding registers are folded into
    /// [`LossFunction::exact_loss`].
    pub fn prepare_state(&self, theta: &[f64]) -> Result<StateVector> {
        self.check_theta(theta)?;
        let n = self.n();
        let mut s = StateVector::zero(n)?;
        match self.kind {
            LossKind::Benqo => {
                for (q, &a) in theta.iter().enumerate() {
                    s.apply(&GateSpec::Ry { angle: a, target: q })?;
                }
            }
            LossKind::Vqe2l => {
                for (q, &a) in theta.iter().enumerate() {
                    s.apply(&GateSpec::Ry { angle: a, target: q })?;
                }
                for q in 0..n.saturating_sub(1) {
                    s.apply(&GateSpec::Cz { control: q, target: q + 1 })?;
                }
            }
            LossKind::Qaoa => {
                s = self.qaoa_state(theta, None)?;
            }
        }
        Ok(s)
    }

    /// Runs the QAOA circuit, optionally inserting one extra shift gate.
    fn qaoa_state(&self, theta: &[f64], shift: Option<(usize, QaoaShift)>) -> Result<StateVector> {
        let n = self.n();
        let mut s = StateVector::zero(n)?;
        for q in 0..n {
            s.apply(&GateSpec::H { target: q })?;
        }
        for layer in 0..self.layers() {
            let (gamma, beta) = (theta[2 * layer], theta[2 * layer + 1]);
            s.apply_diagonal_phase(gamma, &self.energies);
            if let Some((l, QaoaShift::Phase { mask, angle })) = shift {
                if l == layer {
                    apply_zstring_rotation(&mut s, mask, angle);
                }
            }
            for q in 0..n {
                s.apply(&GateSpec::Rx { angle: 2.0 * beta, target: q })?;
            }
            if let Some((l, QaoaShift::Mixer { qubit, angle })) = shift {
                if l == layer {
                    s.apply(&GateSpec::Rx { angle, target: qubit })?;
                }
            }
        }
        Ok(s)
    }

    /// `|⟨q|Ψ(θ)⟩|²` in basis-index order.
    pub fn candidate_distribution(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.check_theta(theta)?;
        match self.kind {
            // CZ gates are diagonal, so VQE2L shares BENQO's product distribution.
            LossKind::Benqo | LossKind::Vqe2l => Ok(product_distribution(theta)),
            LossKind::Qaoa => Ok(self.prepare_state(theta)?.probabilities()),
        }
    }

    /// Exact circuit output at `theta`.
    pub fn evaluate(&self, theta: &[f64], with_probs: bool) -> Result<Evaluation> {
        self.check_theta(theta)?;
        match self.kind {
            LossKind::Benqo => Ok(Evaluation::Benqo { u: self.benqo_inner(theta) }),
            LossKind::Vqe2l => {
                let value = vqe2l_energy(&self.ising, theta);
                let probs = with_probs.then(|| product_distribution(theta));
                Ok(Evaluation::Diagonal { value, probs })
            }
            LossKind::Qaoa => {
                let p = self.qaoa_state(theta, None)?.probabilities();
                Ok(self.diagonal_from_probs(p, with_probs))
            }
        }
    }

    fn diagonal_from_probs(&self, p: Vec<f64>, keep: bool) -> Evaluation {
        let value = p.iter().zip(&self.energies).map(|(a, b)| a * b).sum();
        Evaluation::Diagonal { value, probs: keep.then_some(p) }
    }

    /// `Σ_q p_q sin(C_q/K)` contracted qubit by qubit.
    fn benqo_inner(&self, theta: &[f64]) -> f64 {
        let mut t = self.sin_table.clone();
        for &a in theta {
            let (s, c) = (a / 2.0).sin_cos();
            let (w0, w1) = (c * c, s * s);
            let half = t.len() / 2;
            for j in 0..half {
                t[j] = w0 * t[2 * j] + w1 * t[2 * j + 1];
            }
            t.truncate(half);
        }
        t[0]
    }

    /// Unnormalized loss of an evaluation.
    pub fn loss_of(&self, e: &Evaluation) -> Result<f64> {
        match *e {
            Evaluation::Benqo { u } => {
                if u.abs() > 1.0 + 1e-12 {
                    return Err(Error::Invariant(format!("asin argument {u} outside [-1, 1]")));
                }
                Ok(self.k_scale * u.clamp(-1.0, 1.0).asin())
            }
            Evaluation::Diagonal { value, .. } => Ok(value),
        }
    }

    /// Loss divided by `l_max`; zero for a vanishing cost operator.
    pub fn normalize(&self, loss: f64) -> f64 {
        if self.l_max > 0.0 {
            loss / self.l_max
        } else {
            0.0
        }
    }

    pub fn exact_loss(&self, theta: &[f64]) -> Result<f64> {
        self.loss_of(&self.evaluate(theta, false)?)
    }

    pub fn normalized_loss(&self, theta: &[f64]) -> Result<f64> {
        Ok(self.normalize(self.exact_loss(theta)?))
    }

    /// Maps a normalized loss value to the quantity that is sinusoidal in
    /// each parameter: `p0 - p1` for BENQO, the loss itself otherwise.
    /// Values outside the attainable range are clamped first, which keeps
    /// the map monotone.
    pub fn inner_of_normalized(&self, v: f64) -> f64 {
        match self.kind {
            LossKind::Benqo => (v * self.l_max / self.k_scale).clamp(-FRAC_PI_2, FRAC_PI_2).sin(),
            _ => v,
        }
    }

    /// `dL̂/du` at a normalized loss value (1 for the non-BENQO kinds).
    pub fn outer_slope(&self, v: f64) -> f64 {
        match self.kind {
            LossKind::Benqo if self.l_max > 0.0 => {
                let u = self.inner_of_normalized(v);
                let d = (1.0 - u * u).max(f64::MIN_POSITIVE).sqrt();
                self.k_scale / self.l_max / d
            }
            _ => 1.0,
        }
    }

    /// Whether every parameter enters as a single sinusoid of period 2π.
    pub fn is_coordinatewise_sinusoidal(&self) -> bool {
        self.kind != LossKind::Qaoa
    }

    /// Shifted circuit evaluations for parameter `i`. BENQO and VQE2L use
    /// one pair at `θ_i ± π/2`; QAOA expands each parameter into its
    /// gate-level rotations.
    pub fn shift_terms(&self, theta: &[f64], i: usize, with_probs: bool) -> Result<Vec<ShiftTerm>> {
        self.check_theta(theta)?;
        if i >= self.n_params() {
            return Err(Error::invalid(format!("parameter index {i} out of range")));
        }
        if self.kind != LossKind::Qaoa {
            let mut t = theta.to_vec();
            t[i] = theta[i] + FRAC_PI_2;
            let plus = self.evaluate(&t, with_probs)?;
            t[i] = theta[i] - FRAC_PI_2;
            let minus = self.evaluate(&t, with_probs)?;
            return Ok(vec![ShiftTerm { weight: 1.0, plus, minus }]);
        }
        let layer = i / 2;
        let mut shifts: Vec<(f64, QaoaShift, QaoaShift)> = Vec::new();
        if i % 2 == 0 {
            // exp(-iγ h Z) = RZ(2γh): dφ/dγ = 2h
            for (q, &h) in self.ising.fields().iter().enumerate() {
                if h != 0.0 {
                    let mask = 1usize << q;
                    shifts.push((
                        2.0 * h,
                        QaoaShift::Phase { mask, angle: FRAC_PI_2 },
                        QaoaShift::Phase { mask, angle: -FRAC_PI_2 },
                    ));
                }
            }
            for c in self.ising.couplings() {
                if c.value != 0.0 {
                    let mask = (1usize << c.i) | (1usize << c.j);
                    shifts.push((
                        2.0 * c.value,
                        QaoaShift::Phase { mask, angle: FRAC_PI_2 },
                        QaoaShift::Phase { mask, angle: -FRAC_PI_2 },
                    ));
                }
            }
        } else {
            for qubit in 0..self.n() {
                shifts.push((
                    2.0,
                    QaoaShift::Mixer { qubit, angle: FRAC_PI_2 },
                    QaoaShift::Mixer { qubit, angle: -FRAC_PI_2 },
                ));
            }
        }
        shifts
            .into_iter()
            .map(|(weight, sp, sm)| {
                let plus = self.qaoa_state(theta, Some((layer, sp)))?.probabilities();
                let minus = self.qaoa_state(theta, Some((layer, sm)))?.probabilities();
                Ok(ShiftTerm {
                    weight,
                    plus: self.diagonal_from_probs(plus, with_probs),
                    minus: self.diagonal_from_probs(minus, with_probs),
                })
            })
            .collect()
    }

    /// Exact parameter-shift gradient of the normalized loss, with the
    /// number of shifted circuit evaluations it used (`2n` for BENQO and
    /// VQE2L). For BENQO the rule is applied to `p0 - p1` and chained
    /// through `K·asin`.
    pub fn gradient_parameter_shift(&self, theta: &[f64]) -> Result<(Vec<f64>, usize)> {
        let center = self.normalized_loss(theta)?;
        let slope = self.outer_slope(center);
        let mut grad = Vec::with_capacity(self.n_params());
        let mut calls = 0;
        for i in 0..self.n_params() {
            let mut g = 0.0;
            for t in self.shift_terms(theta, i, false)? {
                let vp = self.inner_of_normalized(self.normalize(self.loss_of(&t.plus)?));
                let vm = self.inner_of_normalized(self.normalize(self.loss_of(&t.minus)?));
                g += t.weight * (vp - vm) / 2.0;
                calls += 2;
            }
            grad.push(slope * g);
        }
        Ok((grad, calls))
    }

    /// BENQO loss through the explicit Hadamard-test circuit on
    /// `n + 2` qubits (system, block index, ancilla). Cross-check only.
    pub fn benqo_hadamard_test(&self, theta: &[f64]) -> Result<f64> {
        if self.kind != LossKind::Benqo {
            return Err(Error::invalid("the Hadamard-test circuit exists only for BENQO"));
        }
        let n = self.n();
        if n > MAX_HADAMARD_TEST_BITS {
            return Err(Error::ResourceLimit(format!(
                "Hadamard-test circuit limited to n <= {MAX_HADAMARD_TEST_BITS}"
            )));
        }
        let system = self.prepare_state(theta)?;
        let dim = 1usize << n;
        let (cbit, abit) = (dim, 2 * dim);
        let mut amps = vec![Complex64::new(0.0, 0.0); 4 * dim];
        amps[..dim].copy_from_slice(system.amplitudes());
        let mut s = StateVector::from_amplitudes(amps)?;
        s.apply(&GateSpec::H { target: n + 1 })?;
        // controlled block encoding U = [[sin Ĉ, cos Ĉ], [cos Ĉ, -sin Ĉ]] on (c, system)
        let mut out = s.amplitudes().to_vec();
        for q in 0..dim {
            let (sn, cs) = (self.energies[q] / self.k_scale).sin_cos();
            let (i0, i1) = (abit | q, abit | cbit | q);
            let (x0, x1) = (out[i0], out[i1]);
            out[i0] = x0 * sn + x1 * cs;
            out[i1] = x0 * cs - x1 * sn;
        }
        let mut s = StateVector::from_amplitudes(out)?;
        s.apply(&GateSpec::H { target: n + 1 })?;
        let p = s.probabilities();
        let p1: f64 = p[abit..].iter().sum();
        let p0 = 1.0 - p1;
        self.loss_of(&Evaluation::Benqo { u: p0 - p1 })
    }
}

#[derive(Debug, Clone, Copy)]
enum QaoaShift {
    Phase { mask: usize, angle: f64 },
    Mixer { qubit: usize, angle: f64 },
}

/// `exp(-i a/2 · Z_S)` for the Pauli-Z string selected by `mask`.
fn apply_zstring_rotation(s: &mut StateVector, mask: usize, angle: f64) {
    let energies: Vec<f64> = (0..1usize << s.n_qubits())
        .map(|q| if (q & mask).count_ones() % 2 == 0 { 0.5 } else { -0.5 })
        .collect();
    s.apply_diagonal_phase(angle, &energies);
}

/// Outcome distribution of `⊗ RY(θ_i)|0⟩`.
pub fn product_distribution(theta: &[f64]) -> Vec<f64> {
    let mut p = Vec::with_capacity(1 << theta.len());
    p.push(1.0);
    for &a in theta {
        let (s, c) = (a / 2.0).sin_cos();
        let (w0, w1) = (c * c, s * s);
        let len = p.len();
        p.extend_from_within(..);
        for x in &mut p[..len] {
            *x *= w0;
        }
        for x in &mut p[len..] {
            *x *= w1;
        }
    }
    p
}

/// `Σ h_i cos θ_i + Σ J_ij cos θ_i cos θ_j`: the cost expectation on a
/// product of RY rotations.
fn vqe2l_energy(m: &IsingModel, theta: &[f64]) -> f64 {
    let z: Vec<f64> = theta.iter().map(|a| a.cos()).collect();
    let mut e: f64 = m.fields().iter().zip(&z).map(|(h, zi)| h * zi).sum();
    for c in m.couplings() {
        e += c.value * z[c.i] * z[c.j];
    }
    e
}

/// Sample variances of the normalized loss and of its partial derivatives
/// over uniformly drawn parameter sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceScan {
    pub kind: LossKind,
    pub n: usize,
    pub n_samples: usize,
    pub range: (f64, f64),
    pub loss_variance: f64,
    /// Mean over parameters of the per-parameter derivative variance.
    pub gradient_variance: Option<f64>,
}

/// Uniform parameter draws in `[lo, hi)^n`, in draw order.
pub fn draw_uniform_thetas<R: Rng + ?Sized>(
    n: usize,
    n_samples: usize,
    range: (f64, f64),
    rng: &mut R,
) -> Vec<Vec<f64>> {
    (0..n_samples)
        .map(|_| (0..n).map(|_| rng.random_range(range.0..range.1)).collect())
        .collect()
}

/// Loss variance over `n_samples` uniform draws, optionally with the
/// companion derivative scan at the same points.
pub fn loss_variance_scan<R: Rng + ?Sized>(
    f: &LossFunction,
    n_samples: usize,
    range: (f64, f64),
    with_gradient: bool,
    rng: &mut R,
) -> Result<VarianceScan> {
    if n_samples < 2 {
        return Err(Error::invalid("a variance scan needs at least 2 samples"));
    }
    if !(range.0 < range.1) {
        return Err(Error::invalid("parameter range must satisfy lo < hi"));
    }
    let thetas = draw_uniform_thetas(f.n_params(), n_samples, range, rng);
    let losses = thetas
        .par_iter()
        .map(|t| f.normalized_loss(t))
        .collect::<Result<Vec<_>>>()?;
    let gradient_variance = if with_gradient { Some(gradient_variance(f, &thetas)?) } else { None };
    Ok(VarianceScan {
        kind: f.kind(),
        n: f.n(),
        n_samples,
        range,
        loss_variance: stats::sample_variance(&losses),
        gradient_variance,
    })
}

/// Variance per component over the given points, averaged over components.
pub fn gradient_variance(f: &LossFunction, thetas: &[Vec<f64>]) -> Result<f64> {
    if thetas.len() < 2 {
        return Err(Error::invalid("a variance scan needs at least 2 samples"));
    }
    let grads = thetas
        .par_iter()
        .map(|t| f.gradient_parameter_shift(t).map(|(g, _)| g))
        .collect::<Result<Vec<_>>>()?;
    let per: Vec<f64> = (0..f.n_params())
        .map(|i| stats::sample_variance(&grads.iter().map(|g| g[i]).collect::<Vec<_>>()))
        .collect();
    Ok(stats::mean(&per))
}
