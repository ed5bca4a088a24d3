//! Dense statevector simulation.
//!
//! Basis ordering is little-endian: qubit `k` is bit `k` of the amplitude
//! index. Gate conventions:
//!
//! * `RY(a) = [[cos a/2, -sin a/2], [sin a/2, cos a/2]]`, so `RY(π)|0⟩ = |1⟩`
//!   with a `+1` phase.
//! * `RX(a) = exp(-i a X / 2)`.
//! * `DiagonalPhase(γ, E)` multiplies amplitude `q` by `exp(-i γ E_q)`.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Bitstring;
use crate::error::{Error, Result};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 26;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GateSpec {
    Ry { angle: f64, target: usize },
    Rx { angle: f64, target: usize },
    H { target: usize },
    Cz { control: usize, target: usize },
    DiagonalPhase { gamma: f64, energies: Vec<f64> },
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::invalid(format!("qubit count {n_qubits} not in 1..={MAX_QUBITS}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Builds a state from raw amplitudes, normalizing them.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::invalid(format!("amplitude count {len} is not 2^k with k >= 1")));
        }
        let norm = amps.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::invalid("amplitudes must not all vanish"));
        }
        let amps = amps.into_iter().map(|a| a / norm).collect();
        Ok(Self { n_qubits: len.trailing_zeros() as usize, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::invalid(format!(
                "qubit {q} out of range for a {}-qubit register",
                self.n_qubits
            )));
        }
        Ok(())
    }

    /// Applies a gate in place.
    pub fn apply(&mut self, gate: &GateSpec) -> Result<()> {
        match *gate {
            GateSpec::Ry { angle, target } => {
                self.check_qubit(target)?;
                let (s, c) = (angle / 2.0).sin_cos();
                self.apply_real_1q(target, [[c, -s], [s, c]]);
            }
            GateSpec::Rx { angle, target } => {
                self.check_qubit(target)?;
                let (s, c) = (angle / 2.0).sin_cos();
                let m = [
                    [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
                    [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
                ];
                self.apply_1q(target, m);
            }
            GateSpec::H { target } => {
                self.check_qubit(target)?;
                let h = FRAC_1_SQRT_2;
                self.apply_real_1q(target, [[h, h], [h, -h]]);
            }
            GateSpec::Cz { control, target } => {
                self.check_qubit(control)?;
                self.check_qubit(target)?;
                if control == target {
                    return Err(Error::invalid("CZ needs two distinct qubits"));
                }
                let mask = (1usize << control) | (1usize << target);
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & mask == mask {
                        *a = -*a;
                    }
                }
            }
            GateSpec::DiagonalPhase { gamma, ref energies } => {
                if energies.len() != self.amps.len() {
                    return Err(Error::invalid(format!(
                        "phase table has {} entries, register needs {}",
                        energies.len(),
                        self.amps.len()
                    )));
                }
                self.apply_diagonal_phase(gamma, energies);
            }
        }
        Ok(())
    }

    /// Value-returning form of [`StateVector::apply`].
    pub fn applied(mut self, gate: &GateSpec) -> Result<Self> {
        self.apply(gate)?;
        Ok(self)
    }

    pub(crate) fn apply_diagonal_phase(&mut self, gamma: f64, energies: &[f64]) {
        if gamma == 0.0 {
            return;
        }
        for (a, &e) in self.amps.iter_mut().zip(energies) {
            let (s, c) = (-gamma * e).sin_cos();
            *a *= Complex64::new(c, s);
        }
    }

    fn apply_1q(&mut self, target: usize, m: [[Complex64; 2]; 2]) {
        let stride = 1usize << target;
        for block in self.amps.chunks_mut(stride << 1) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a0, *a1);
                *a0 = m[0][0] * x + m[0][1] * y;
                *a1 = m[1][0] * x + m[1][1] * y;
            }
        }
    }

    fn apply_real_1q(&mut self, target: usize, m: [[f64; 2]; 2]) {
        let stride = 1usize << target;
        for block in self.amps.chunks_mut(stride << 1) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a0, *a1);
                *a0 = x * m[0][0] + y * m[0][1];
                *a1 = x * m[1][0] + y * m[1][1];
            }
        }
    }

    /// `|amp|²` per basis state, in basis-index order.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(Complex64::norm_sqr).collect()
    }

    /// Draws `n_shots` measurement outcomes by inverse-CDF sampling on the
    /// cumulative probability table.
    pub fn sample_counts<R: Rng + ?Sized>(
        &self,
        n_shots: usize,
        rng: &mut R,
    ) -> Result<BTreeMap<Bitstring, usize>> {
        let counts = sample_from_probabilities(&self.probabilities(), n_shots, rng)?;
        Ok(counts
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c > 0)
            .map(|(i, c)| (Bitstring::from_index(self.n_qubits, i), c))
            .collect())
    }
}

/// Multinomial draw of `n_shots` outcomes; returns counts in basis-index
/// order.
pub fn sample_from_probabilities<R: Rng + ?Sized>(
    probs: &[f64],
    n_shots: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if n_shots == 0 {
        return Err(Error::invalid("n_shots must be at least 1"));
    }
    let cdf = cumulative(probs);
    let total = *cdf.last().expect("nonempty table");
    let mut counts = vec![0usize; probs.len()];
    for _ in 0..n_shots {
        let u: f64 = rng.random::<f64>() * total;
        counts[draw_index(&cdf, u)] += 1;
    }
    Ok(counts)
}

pub(crate) fn cumulative(probs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    probs
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect()
}

/// First index whose cumulative probability exceeds `u`, skipping
/// zero-probability entries.
pub(crate) fn draw_index(cdf: &[f64], u: f64) -> usize {
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}
