//! Solution-quality metrics and solvability statistics.

use serde::{Deserialize, Serialize};

use crate::bits::Bitstring;
use crate::error::{Error, Result};
use crate::problems::{self, IsingModel};

/// Slack used when testing `ratio >= 1`.
pub const EXACT_TOLERANCE: f64 = 1e-12;

/// Thresholds tracked by default: exact, 99% and 95% optimality.
pub const DEFAULT_THRESHOLDS: [f64; 3] = [1.0, 0.99, 0.95];

/// Which energy serves as the upper reference of the approximation ratio.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpperReference {
    /// `Σ|C_ii| + Σ|C_ij|`.
    #[default]
    AnalyticBound,
    /// Mean energy over all basis states (the totally mixed state).
    MixedState,
}

/// The pair of reference energies defining the approximation ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArReference {
    pub c_min: f64,
    pub c_max: f64,
}

impl ArReference {
    pub fn new(c_min: f64, c_max: f64) -> Result<Self> {
        if !(c_min < c_max) {
            return Err(Error::Degenerate(format!(
                "approximation ratio needs C_min < C_max (got {c_min} and {c_max})"
            )));
        }
        Ok(Self { c_min, c_max })
    }

    /// Exact minimum from enumeration, analytic `C_max` bound.
    pub fn for_model(m: &IsingModel) -> Result<Self> {
        let table = m.energy_table()?;
        Self::from_table(m, &table)
    }

    pub fn from_table(m: &IsingModel, table: &[f64]) -> Result<Self> {
        Self::from_table_with(m, table, UpperReference::AnalyticBound)
    }

    pub fn from_table_with(m: &IsingModel, table: &[f64], upper: UpperReference) -> Result<Self> {
        let c_min = table.iter().copied().fold(f64::INFINITY, f64::min);
        let c_max = match upper {
            UpperReference::AnalyticBound => problems::cmax_bound(m),
            UpperReference::MixedState => crate::stats::mean(table),
        };
        Self::new(c_min, c_max)
    }

    /// `(E - C_max) / (C_min - C_max)`.
    pub fn ratio(&self, energy: f64) -> f64 {
        (energy - self.c_max) / (self.c_min - self.c_max)
    }
}

/// Approximation ratio of a bit string against the model's references.
pub fn approximation_ratio(bits: Bitstring, m: &IsingModel, reference: &ArReference) -> Result<f64> {
    Ok(reference.ratio(m.energy(bits)?))
}

/// `ratio >= t`, with `t = 1` relaxed by [`EXACT_TOLERANCE`].
pub fn meets_threshold(ratio: f64, t: f64) -> bool {
    ratio >= t - EXACT_TOLERANCE
}

/// Approximation index `x_t`: 1 when the ratio reaches `t`.
pub fn approximation_index(
    bits: Bitstring,
    m: &IsingModel,
    reference: &ArReference,
    t: f64,
) -> Result<u8> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::invalid(format!("threshold {t} outside [0, 1]")));
    }
    Ok(u8::from(meets_threshold(approximation_ratio(bits, m, reference)?, t)))
}

/// Most probable basis state of a distribution given in basis-index order.
/// Exact ties go to the lexicographically smallest bit string.
pub fn most_probable_state(probs: &[f64]) -> Result<Bitstring> {
    let len = probs.len();
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::invalid(format!("distribution length {len} is not 2^n with n >= 1")));
    }
    let n = len.trailing_zeros() as usize;
    let mut best = Bitstring::from_index(n, 0);
    let mut best_p = probs[0];
    for (i, &p) in probs.iter().enumerate().skip(1) {
        let b = Bitstring::from_index(n, i);
        if p > best_p || (p == best_p && b < best) {
            best = b;
            best_p = p;
        }
    }
    Ok(best)
}

/// Most probable entry of a sparse distribution, same tie rule.
pub fn most_probable_in_map<'a>(
    dist: impl IntoIterator<Item = (&'a Bitstring, &'a f64)>,
) -> Result<Bitstring> {
    let mut best: Option<(Bitstring, f64)> = None;
    for (&b, &p) in dist {
        best = match best {
            Some((bb, bp)) if bp > p || (bp == p && bb < b) => Some((bb, bp)),
            _ => Some((b, p)),
        };
    }
    best.map(|(b, _)| b)
        .ok_or_else(|| Error::invalid("empty distribution"))
}

/// Estimated success probability over `n` runs with its binomial standard
/// error `sqrt(p(1-p)/n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolvabilityStat {
    pub t: f64,
    pub p_hat: f64,
    pub std_err: f64,
    pub n: usize,
    pub successes: usize,
}

pub fn solvability(t: f64, successes: &[u8]) -> Result<SolvabilityStat> {
    if successes.is_empty() {
        return Err(Error::invalid("solvability needs at least one run"));
    }
    if successes.iter().any(|&x| x > 1) {
        return Err(Error::invalid("success indicators must be 0 or 1"));
    }
    let n = successes.len();
    let k = successes.iter().map(|&x| usize::from(x)).sum::<usize>();
    let p_hat = k as f64 / n as f64;
    let std_err = (p_hat * (1.0 - p_hat) / n as f64).sqrt();
    Ok(SolvabilityStat { t, p_hat, std_err, n, successes: k })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{generate_random_qubo, qubo_to_ising, QuboInstance};

    fn bs(s: &str) -> Bitstring {
        s.parse().unwrap()
    }

    #[test]
    fn ratio_endpoints() {
        let m = qubo_to_ising(&QuboInstance::from_rows(&[&[-2.0, 3.0], &[3.0, -4.0]]).unwrap());
        let r = ArReference::for_model(&m).unwrap();
        assert_eq!(approximation_ratio(bs("01"), &m, &r).unwrap(), 1.0);
        assert_eq!(r.ratio(r.c_max), 0.0);

        // enumeration oracle for "10"
        let energies: Vec<f64> = Bitstring::all(2).map(|b| m.energy(b).unwrap()).collect();
        let c_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let c_max = problems::cmax_bound(&m);
        let want = (m.energy(bs("10")).unwrap() - c_max) / (c_min - c_max);
        assert!((approximation_ratio(bs("10"), &m, &r).unwrap() - want).abs() < 1e-15);
        // fields -1/2, 1/2, coupling 3/2: E("10") = -1/2, C_min = -5/2, C_max = 5/2
        assert!((want - 0.6).abs() < 1e-12);
    }

    #[test]
    fn degenerate_reference() {
        let z = IsingModel::zero(2).unwrap();
        assert!(matches!(ArReference::for_model(&z), Err(Error::Degenerate(_))));
    }

    #[test]
    fn index_thresholds() {
        let r = ArReference::new(-1.0, 1.0).unwrap();
        // energy giving ratio 0.96
        let e = 1.0 - 0.96 * 2.0;
        assert!(meets_threshold(r.ratio(e), 0.95));
        assert!(!meets_threshold(r.ratio(e), 1.0));
        assert!(meets_threshold(r.ratio(-1.0), 1.0));

        let m = qubo_to_ising(&generate_random_qubo(5, 3).unwrap());
        let reference = ArReference::for_model(&m).unwrap();
        let opt = problems::brute_force_solve(&m).unwrap().argmin[0];
        assert_eq!(approximation_index(opt, &m, &reference, 1.0).unwrap(), 1);
        assert!(approximation_index(opt, &m, &reference, 1.5).is_err());
    }

    #[test]
    fn argmax_and_ties() {
        // basis order: "00", "10", "01", "11"
        assert_eq!(most_probable_state(&[0.1, 0.2, 0.7, 0.0]).unwrap(), bs("01"));
        assert_eq!(most_probable_state(&[0.5, 0.5]).unwrap(), bs("0"));
        assert_eq!(most_probable_state(&[0.0, 0.0, 0.0, 1.0]).unwrap(), bs("11"));
        // "10" (index 1) and "01" (index 2) tie: lexicographic order picks "01"
        assert_eq!(most_probable_state(&[0.0, 0.5, 0.5, 0.0]).unwrap(), bs("01"));
        assert!(most_probable_state(&[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn argmax_on_map() {
        let dist = [(bs("00"), 0.1), (bs("01"), 0.7), (bs("10"), 0.2)];
        let map: std::collections::BTreeMap<_, _> = dist.into_iter().collect();
        assert_eq!(most_probable_in_map(&map).unwrap(), bs("01"));
    }

    #[test]
    fn solvability_examples() {
        let mut xs = vec![1u8; 50];
        xs.extend(vec![0u8; 50]);
        let s = solvability(1.0, &xs).unwrap();
        assert_eq!(s.p_hat, 0.5);
        assert!((s.std_err - 0.05).abs() < 1e-15);
        let s = solvability(1.0, &[1; 100]).unwrap();
        assert_eq!((s.p_hat, s.std_err, s.n), (1.0, 0.0, 100));
        assert!(solvability(1.0, &[]).is_err());
    }

    #[test]
    fn ratio_invariant_under_positive_scaling() {
        let m = qubo_to_ising(&generate_random_qubo(6, 11).unwrap());
        let s = m.scaled(3.7);
        let (r1, r2) = (ArReference::for_model(&m).unwrap(), ArReference::for_model(&s).unwrap());
        for b in Bitstring::all(6) {
            let a = approximation_ratio(b, &m, &r1).unwrap();
            let c = approximation_ratio(b, &s, &r2).unwrap();
            assert!((a - c).abs() < 1e-12);
        }
    }

    #[test]
    fn argmax_invariant_under_renormalization() {
        let p = [0.05, 0.3, 0.25, 0.4];
        let scaled: Vec<f64> = p.iter().map(|x| x * 7.0).collect();
        assert_eq!(most_probable_state(&p).unwrap(), most_probable_state(&scaled).unwrap());
    }

    #[test]
    fn mixed_state_reference() {
        let m = qubo_to_ising(&generate_random_qubo(4, 2).unwrap());
        let table = m.energy_table().unwrap();
        let r = ArReference::from_table_with(&m, &table, UpperReference::MixedState).unwrap();
        // Pauli-Z strings are traceless
        assert!(r.c_max.abs() < 1e-12);
    }
}
