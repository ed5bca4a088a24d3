//! Random QUBO instances, their Ising form and exhaustive classical oracles.
//!
//! The QUBO objective is `x·Q·x` over `x ∈ {0,1}^n`. The Ising model uses the
//! spin convention of a computational basis state: qubit value `q_i = 0`
//! gives spin `+1`, `q_i = 1` gives `-1`, and the binary assignment is the
//! qubit string itself (`x_i = q_i`, i.e. `x_i = (1 - z_i) / 2`). With this
//! convention the minimizing bit string of the Ising model is the minimizing
//! assignment of the QUBO, not its complement.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Bitstring;
use crate::error::{Error, Result};
use crate::metrics;
use crate::rng;

/// Largest `n` accepted by [`brute_force_solve`] and [`IsingModel::energy_table`].
pub const MAX_ENUMERATION_BITS: usize = 24;
/// Largest `n` accepted by [`solution_space_profile`].
pub const MAX_PROFILE_BITS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "QuboJson", try_from = "QuboJson")]
pub struct QuboInstance {
    n: usize,
    q: Vec<f64>,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
struct QuboJson {
    n: usize,
    seed: u64,
    matrix: Vec<Vec<f64>>,
}

impl From<QuboInstance> for QuboJson {
    fn from(inst: QuboInstance) -> Self {
        let matrix = inst.q.chunks(inst.n).map(<[f64]>::to_vec).collect();
        QuboJson { n: inst.n, seed: inst.seed, matrix }
    }
}

impl TryFrom<QuboJson> for QuboInstance {
    type Error = Error;

    fn try_from(j: QuboJson) -> Result<Self> {
        if j.matrix.len() != j.n || j.matrix.iter().any(|r| r.len() != j.n) {
            return Err(Error::invalid(format!("matrix is not {0}x{0}", j.n)));
        }
        QuboInstance::from_matrix(j.n, j.matrix.concat(), j.seed)
    }
}

impl QuboInstance {
    /// Wraps a row-major `n × n` matrix.
    pub fn from_matrix(n: usize, q: Vec<f64>, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("QUBO dimension must be at least 1"));
        }
        if q.len() != n * n {
            return Err(Error::invalid(format!(
                "expected {} matrix entries for n = {n}, got {}",
                n * n,
                q.len()
            )));
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("QUBO entries must be finite"));
        }
        Ok(Self { n, q, seed })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("rows must form a square matrix"));
        }
        Self::from_matrix(n, rows.concat(), 0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.q[i * self.n + j]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.q
    }

    /// `x·Q·x` for the assignment `bits`.
    pub fn value(&self, bits: Bitstring) -> Result<f64> {
        if bits.len() != self.n {
            return Err(Error::invalid(format!(
                "bit string has length {}, QUBO has {} variables",
                bits.len(),
                self.n
            )));
        }
        let ones: Vec<usize> = (0..self.n).filter(|&i| bits.bit(i)).collect();
        Ok(ones
            .iter()
            .flat_map(|&i| ones.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .sum())
    }

    /// `(Q + Qᵀ) / 2`, which has the same quadratic form.
    pub fn symmetrized(&self) -> QuboInstance {
        let n = self.n;
        let mut q = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                q[i * n + j] = 0.5 * (self.get(i, j) + self.get(j, i));
            }
        }
        QuboInstance { n, q, seed: self.seed }
    }

    /// Plain-text form: a header line `n seed`, then `n` rows of `n` numbers.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.seed);
        for row in self.q.chunks(self.n) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines.next().ok_or_else(|| Error::Parse {
            line: 1,
            message: "missing header line".into(),
        })?;
        let parse_err = |line: usize, message: String| Error::Parse { line: line as u64 + 1, message };
        let mut head = header.split_whitespace();
        let n: usize = head
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err(hline, "header must start with n".into()))?;
        let seed: u64 = head
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err(hline, "header must contain the seed".into()))?;
        if head.next().is_some() {
            return Err(parse_err(hline, "unexpected token in header".into()));
        }
        let mut q = Vec::with_capacity(n * n);
        for _ in 0..n {
            let (lno, line) = lines
                .next()
                .ok_or_else(|| parse_err(hline, format!("expected {n} matrix rows")))?;
            let row = line
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| parse_err(lno, format!("{t:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if row.len() != n {
                return Err(parse_err(lno, format!("expected {n} entries, found {}", row.len())));
            }
            q.extend(row);
        }
        if let Some((lno, _)) = lines.next() {
            return Err(parse_err(lno, "trailing data after matrix".into()));
        }
        Self::from_matrix(n, q, seed)
    }
}

/// Seeded random instance: off-diagonal entries `+U{1..10}`, diagonal
/// entries `-U{1..10}`, drawn row-major from a ChaCha8 stream seeded with
/// `seed`.
pub fn generate_random_qubo(n: usize, seed: u64) -> Result<QuboInstance> {
    if n == 0 {
        return Err(Error::invalid("QUBO dimension must be at least 1"));
    }
    let mut rng = rng::stream_from_seed(seed);
    let mut q = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let v = f64::from(rng.random_range(1..=10u32));
            q.push(if i == j { -v } else { v });
        }
    }
    QuboInstance::from_matrix(n, q, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// `C = Σ fields_i Z_i + Σ_{i<j} couplings_ij Z_i Z_j`, plus a constant
/// `offset` that is not part of the energy unless asked for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingModel {
    n: usize,
    couplings: Vec<Coupling>,
    fields: Vec<f64>,
    offset: f64,
    #[serde(skip)]
    dense: Vec<f64>,
}

impl IsingModel {
    pub fn new(n: usize, fields: Vec<f64>, couplings: Vec<Coupling>, offset: f64) -> Result<Self> {
        if n == 0 || n > Bitstring::MAX_BITS {
            return Err(Error::invalid(format!("spin count {n} out of range")));
        }
        if fields.len() != n {
            return Err(Error::invalid(format!("expected {n} fields, got {}", fields.len())));
        }
        let mut dense = vec![0.0; n * n];
        let mut couplings = couplings;
        couplings.sort_by_key(|c| (c.i, c.j));
        for c in &couplings {
            if !(c.i < c.j && c.j < n) {
                return Err(Error::invalid(format!("coupling key ({}, {}) violates i < j < n", c.i, c.j)));
            }
            if dense[c.i * n + c.j] != 0.0 {
                return Err(Error::invalid(format!("duplicate coupling ({}, {})", c.i, c.j)));
            }
            dense[c.i * n + c.j] = c.value;
            dense[c.j * n + c.i] = c.value;
        }
        Ok(Self { n, couplings, fields, offset, dense })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::new(n, vec![0.0; n], Vec::new(), 0.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn couplings(&self) -> &[Coupling] {
        &self.couplings
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            self.dense_matrix()[i * self.n + j]
        }
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    fn dense_matrix(&self) -> std::borrow::Cow<'_, [f64]> {
        if self.dense.len() == self.n * self.n {
            std::borrow::Cow::Borrowed(&self.dense)
        } else {
            // deserialized without the cache
            let mut d = vec![0.0; self.n * self.n];
            for c in &self.couplings {
                d[c.i * self.n + c.j] = c.value;
                d[c.j * self.n + c.i] = c.value;
            }
            std::borrow::Cow::Owned(d)
        }
    }

    /// `⟨q|C|q⟩ = Σ (-1)^{q_i} C_ii + Σ_{i<j} (-1)^{q_i+q_j} C_ij`, offset excluded.
    pub fn energy(&self, bits: Bitstring) -> Result<f64> {
        if bits.len() != self.n {
            return Err(Error::invalid(format!(
                "bit string has length {}, model has {} spins",
                bits.len(),
                self.n
            )));
        }
        Ok(self.energy_of_index(bits.index()))
    }

    /// Energy including the constant offset.
    pub fn energy_with_offset(&self, bits: Bitstring) -> Result<f64> {
        Ok(self.energy(bits)? + self.offset)
    }

    pub(crate) fn energy_of_index(&self, index: u64) -> f64 {
        let spin = |i: usize| if (index >> i) & 1 == 1 { -1.0 } else { 1.0 };
        let mut e: f64 = self.fields.iter().enumerate().map(|(i, h)| h * spin(i)).sum();
        for c in &self.couplings {
            e += c.value * spin(c.i) * spin(c.j);
        }
        e
    }

    /// Energies of all `2^n` basis states in basis-index order.
    ///
    /// Built by doubling: adding qubit `k` to every prefix state costs `O(k)`,
    /// so the whole table costs `O(n · 2^n)`.
    pub fn energy_table(&self) -> Result<Vec<f64>> {
        if self.n > MAX_ENUMERATION_BITS {
            return Err(Error::ResourceLimit(format!(
                "enumerating 2^{} states exceeds the 2^{MAX_ENUMERATION_BITS} limit",
                self.n
            )));
        }
        let dense = self.dense_matrix();
        let n = self.n;
        let mut table = vec![0.0; 1 << n];
        for k in 0..n {
            let half = 1usize << k;
            for low in 0..half {
                let mut cross = 0.0;
                for j in 0..k {
                    let s = if (low >> j) & 1 == 1 { -1.0 } else { 1.0 };
                    cross += dense[j * n + k] * s;
                }
                let base = table[low];
                // spin +1 keeps `low`, spin -1 lives at `low | half`
                table[low] = base + self.fields[k] + cross;
                table[low | half] = base - self.fields[k] - cross;
            }
        }
        Ok(table)
    }

    /// Scales every coefficient (and the offset) by `factor`.
    pub fn scaled(&self, factor: f64) -> IsingModel {
        let couplings = self
            .couplings
            .iter()
            .map(|c| Coupling { value: c.value * factor, ..*c })
            .collect();
        let fields = self.fields.iter().map(|h| h * factor).collect();
        IsingModel::new(self.n, fields, couplings, self.offset * factor)
            .expect("scaling preserves validity")
    }
}

/// Maps a QUBO to the Ising model with `x·Q·x = energy(x) + offset` for
/// every assignment.
///
/// `Q` is symmetrized first. Couplings are `Q'_ij / 2`; fields are
/// `-Σ_j Q'_ij / 2` under the `x_i = q_i` convention described in the module
/// docs; the offset collects the constant `Σ_ij Q'_ij / 4 + Σ_i Q'_ii / 4`.
pub fn qubo_to_ising(q: &QuboInstance) -> IsingModel {
    let n = q.n();
    let s = q.symmetrized();
    let mut couplings = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let v = s.get(i, j) / 2.0;
            if v != 0.0 {
                couplings.push(Coupling { i, j, value: v });
            }
        }
    }
    let fields: Vec<f64> = (0..n)
        .map(|i| -(0..n).map(|j| s.get(i, j)).sum::<f64>() / 2.0)
        .map(|h: f64| if h == 0.0 { 0.0 } else { h })
        .collect();
    let total: f64 = s.matrix().iter().sum();
    let trace: f64 = (0..n).map(|i| s.get(i, i)).sum();
    let offset = total / 4.0 + trace / 4.0;
    IsingModel::new(n, fields, couplings, offset).expect("mapping yields a valid model")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForceSolution {
    pub c_min: f64,
    /// All minimizers in basis-index order.
    pub argmin: Vec<Bitstring>,
    pub c_max_attained: f64,
}

/// Exact minimum and maximum over all basis states. Minimizers are every
/// state within `1e-9 · max(1, |c_min|)` of the minimum.
pub fn brute_force_solve(m: &IsingModel) -> Result<BruteForceSolution> {
    let table = m.energy_table()?;
    Ok(solve_table(m.n(), &table))
}

pub(crate) fn solve_table(n: usize, table: &[f64]) -> BruteForceSolution {
    let c_min = table.iter().copied().fold(f64::INFINITY, f64::min);
    let c_max_attained = table.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-9 * c_min.abs().max(1.0);
    let argmin = table
        .iter()
        .enumerate()
        .filter(|(_, &e)| e - c_min <= tol)
        .map(|(i, _)| Bitstring::from_index(n, i))
        .collect();
    BruteForceSolution { c_min, argmin, c_max_attained }
}

/// `Σ|C_ii| + Σ_{i<j}|C_ij|`, an upper bound on every basis energy.
pub fn cmax_bound(m: &IsingModel) -> f64 {
    m.fields().iter().map(|h| h.abs()).sum::<f64>()
        + m.couplings().iter().map(|c| c.value.abs()).sum::<f64>()
}

/// Adds the one-hot permutation penalty to a QUBO over `n²` variables.
///
/// Variable `i·n + α` means "node `i` sits at position `α`". The penalty
/// `P [Σ_i (1 - Σ_α x_iα)² + Σ_α (1 - Σ_i x_iα)²]` expands, up to the
/// constant `2nP`, to `-2P` on every diagonal entry and `+P` on every ordered
/// pair of distinct variables sharing a node or a position.
pub fn build_permutation_qubo(q0: &QuboInstance, penalty: f64) -> Result<QuboInstance> {
    let m = q0.n();
    let n = (m as f64).sqrt().round() as usize;
    if n * n != m {
        return Err(Error::invalid(format!("dimension {m} is not a perfect square")));
    }
    let max_abs = q0.matrix().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if !(penalty > max_abs) {
        return Err(Error::invalid(format!(
            "penalty {penalty} must exceed the largest |entry| {max_abs}"
        )));
    }
    let mut q = q0.matrix().to_vec();
    for a in 0..m {
        let (i, alpha) = (a / n, a % n);
        for b in 0..m {
            let (j, beta) = (b / n, b % n);
            let same_node = i == j;
            let same_pos = alpha == beta;
            if a == b {
                q[a * m + b] -= 2.0 * penalty;
            } else if same_node != same_pos {
                q[a * m + b] += penalty;
            }
        }
    }
    QuboInstance::from_matrix(m, q, q0.seed())
}

/// Removes fixed variables from a QUBO. Returns the reduced instance over the
/// free variables (in their original relative order) and the constant that
/// the fixed variables contribute.
pub fn fix_variables(q: &QuboInstance, fixed: &[(usize, bool)]) -> Result<(QuboInstance, f64)> {
    let m = q.n();
    let mut value: Vec<Option<bool>> = vec![None; m];
    for &(v, b) in fixed {
        if v >= m {
            return Err(Error::invalid(format!("variable {v} out of range")));
        }
        value[v] = Some(b);
    }
    let free: Vec<usize> = (0..m).filter(|&v| value[v].is_none()).collect();
    if free.is_empty() {
        return Err(Error::invalid("at least one variable must stay free"));
    }
    let ones: Vec<usize> = (0..m).filter(|&v| value[v] == Some(true)).collect();
    let k = free.len();
    let mut r = vec![0.0; k * k];
    for (a, &u) in free.iter().enumerate() {
        for (b, &w) in free.iter().enumerate() {
            r[a * k + b] = q.get(u, w);
        }
        // linear terms from fixed ones fold into the diagonal (x_u² = x_u)
        r[a * k + a] += ones.iter().map(|&f| q.get(u, f) + q.get(f, u)).sum::<f64>();
    }
    let constant: f64 = ones
        .iter()
        .flat_map(|&f| ones.iter().map(move |&g| (f, g)))
        .map(|(f, g)| q.get(f, g))
        .sum();
    Ok((QuboInstance::from_matrix(k, r, q.seed())?, constant))
}

/// Fixes node 0 at position 0 in a permutation QUBO over `n²` variables,
/// leaving the `(n-1)²` variables of nodes `1..n` and positions `1..n`.
pub fn reduce_permutation_start(q: &QuboInstance) -> Result<(QuboInstance, f64)> {
    let m = q.n();
    let n = (m as f64).sqrt().round() as usize;
    if n * n != m || n < 2 {
        return Err(Error::invalid(format!("dimension {m} is not a square of n >= 2")));
    }
    let mut fixed = vec![(0, true)];
    fixed.extend((1..n).map(|alpha| (alpha, false)));
    fixed.extend((1..n).map(|i| (i * n, false)));
    fix_variables(q, &fixed)
}

/// Distribution of classical solution quality over all `2^n` basis states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumProfile {
    pub n: usize,
    pub thresholds: Vec<f64>,
    /// Fraction of all basis states with approximation ratio `>= t`.
    pub fractions: Vec<f64>,
    /// Histogram of the normalized loss `E / max|E|` over `[-1, 1]`:
    /// `(bin center, fraction of states)`.
    pub histogram: Vec<(f64, f64)>,
}

pub const PROFILE_BINS: usize = 20;

pub fn solution_space_profile(m: &IsingModel, thresholds: &[f64]) -> Result<SpectrumProfile> {
    if m.n() > MAX_PROFILE_BITS {
        return Err(Error::ResourceLimit(format!(
            "profile limited to n <= {MAX_PROFILE_BITS}, got {}",
            m.n()
        )));
    }
    let table = m.energy_table()?;
    let reference = metrics::ArReference::from_table(m, &table)?;
    let total = table.len() as f64;
    let ratios: Vec<f64> = table.iter().map(|&e| reference.ratio(e)).collect();
    let fractions = thresholds
        .iter()
        .map(|&t| ratios.iter().filter(|&&r| metrics::meets_threshold(r, t)).count() as f64 / total)
        .collect();
    let scale = table.iter().fold(0.0f64, |a, e| a.max(e.abs()));
    let mut counts = vec![0usize; PROFILE_BINS];
    for &e in &table {
        let x = if scale > 0.0 { e / scale } else { 0.0 };
        let bin = (((x + 1.0) / 2.0) * PROFILE_BINS as f64).floor() as isize;
        counts[bin.clamp(0, PROFILE_BINS as isize - 1) as usize] += 1;
    }
    let width = 2.0 / PROFILE_BINS as f64;
    let histogram = counts
        .iter()
        .enumerate()
        .map(|(b, &c)| (-1.0 + (b as f64 + 0.5) * width, c as f64 / total))
        .collect();
    Ok(SpectrumProfile { n: m.n(), thresholds: thresholds.to_vec(), fractions, histogram })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn example() -> QuboInstance {
        QuboInstance::from_rows(&[&[-2.0, 3.0], &[3.0, -4.0]]).unwrap()
    }

    #[test]
    fn random_qubo_ranges_and_determinism() {
        let a = generate_random_qubo(3, 7).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v = a.get(i, j);
                assert_eq!(v.fract(), 0.0);
                if i == j {
                    assert!((-10.0..=-1.0).contains(&v));
                } else {
                    assert!((1.0..=10.0).contains(&v));
                }
            }
        }
        let b = generate_random_qubo(3, 7).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        assert_ne!(a.matrix(), generate_random_qubo(3, 8).unwrap().matrix());
    }

    #[test]
    fn single_variable_qubo() {
        for seed in 0..20 {
            let q = generate_random_qubo(1, seed).unwrap();
            assert!((-10.0..=-1.0).contains(&q.get(0, 0)));
        }
        assert!(matches!(generate_random_qubo(0, 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn example_mapping_matches_enumeration() {
        let q = example();
        let m = qubo_to_ising(&q);
        assert_eq!(m.coupling(0, 1), 1.5);
        for b in Bitstring::all(2) {
            let lhs = q.value(b).unwrap();
            let rhs = m.energy(b).unwrap() + m.offset();
            assert!((lhs - rhs).abs() < 1e-9, "{b}: {lhs} vs {rhs}");
        }
        let b: Bitstring = "01".parse().unwrap();
        assert_eq!(q.value(b).unwrap(), -4.0);
        assert!((m.energy(b).unwrap() - (-4.0 - m.offset())).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_maps_to_zero_model() {
        let q = QuboInstance::from_matrix(3, vec![0.0; 9], 0).unwrap();
        let m = qubo_to_ising(&q);
        assert!(m.couplings().is_empty());
        assert!(m.fields().iter().all(|&h| h == 0.0));
        assert_eq!(m.offset(), 0.0);
    }

    #[test]
    fn ising_energy_sign_rule() {
        let m = IsingModel::new(1, vec![2.5], vec![], 0.0).unwrap();
        assert_eq!(m.energy("0".parse().unwrap()).unwrap(), 2.5);
        assert_eq!(m.energy("1".parse().unwrap()).unwrap(), -2.5);
        assert!(m.energy("01".parse().unwrap()).is_err());
        let z = IsingModel::zero(4).unwrap();
        assert!(Bitstring::all(4).all(|b| z.energy(b).unwrap() == 0.0));
    }

    #[test]
    fn brute_force_examples() {
        let m = qubo_to_ising(&example());
        let sol = brute_force_solve(&m).unwrap();
        assert_eq!(sol.argmin, vec!["01".parse().unwrap()]);
        assert!((sol.c_min + m.offset() + 4.0).abs() < 1e-12);

        let z = IsingModel::zero(3).unwrap();
        let sol = brute_force_solve(&z).unwrap();
        assert_eq!((sol.c_min, sol.c_max_attained), (0.0, 0.0));
        assert_eq!(sol.argmin.len(), 8);

        let one = IsingModel::new(1, vec![5.0], vec![], 0.0).unwrap();
        let sol = brute_force_solve(&one).unwrap();
        assert_eq!(sol.argmin, vec!["1".parse().unwrap()]);
        assert_eq!(sol.c_min, -5.0);
    }

    #[test]
    fn enumeration_limit() {
        let big = IsingModel::zero(25).unwrap();
        assert!(matches!(brute_force_solve(&big), Err(Error::ResourceLimit(_))));
        assert!(matches!(
            solution_space_profile(&IsingModel::zero(21).unwrap(), &[1.0]),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn cmax_examples() {
        let m = IsingModel::new(2, vec![1.0, -2.0], vec![Coupling { i: 0, j: 1, value: 1.5 }], 0.0)
            .unwrap();
        assert_eq!(cmax_bound(&m), 4.5);
        assert_eq!(cmax_bound(&IsingModel::zero(3).unwrap()), 0.0);
    }

    #[test]
    fn cmax_bounds_enumerated_maximum() {
        for seed in 0..100u64 {
            let n = 1 + (seed as usize % 10);
            let m = qubo_to_ising(&generate_random_qubo(n, seed).unwrap());
            let sol = brute_force_solve(&m).unwrap();
            assert!(cmax_bound(&m) >= sol.c_max_attained - 1e-12);
        }
    }

    #[test]
    fn permutation_penalty_for_two_nodes() {
        let q0 = QuboInstance::from_matrix(4, vec![0.0; 16], 0).unwrap();
        let q = build_permutation_qubo(&q0, 10.0).unwrap();
        for a in 0..4 {
            assert_eq!(q.get(a, a), -20.0);
        }
        // (node, position) = (0,0),(0,1),(1,0),(1,1) -> indices 0,1,2,3
        assert_eq!(q.get(0, 1), 10.0);
        assert_eq!(q.get(0, 2), 10.0);
        assert_eq!(q.get(0, 3), 0.0);
        assert_eq!(q.get(1, 2), 0.0);

        let m = qubo_to_ising(&q);
        let sol = brute_force_solve(&m).unwrap();
        let perms: Vec<Bitstring> = vec!["1001".parse().unwrap(), "0110".parse().unwrap()];
        let mut got = sol.argmin.clone();
        got.sort();
        let mut want = perms;
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn permutation_qubo_has_negative_diagonal() {
        for seed in 0..10 {
            let q0 = generate_random_qubo(9, seed).unwrap();
            let q = build_permutation_qubo(&q0, 11.0).unwrap();
            assert!((0..9).all(|a| q.get(a, a) < 0.0));
        }
        assert!(build_permutation_qubo(&generate_random_qubo(3, 0).unwrap(), 20.0).is_err());
        assert!(build_permutation_qubo(&generate_random_qubo(4, 0).unwrap(), 5.0).is_err());
    }

    #[test]
    fn start_reduction_preserves_energies() {
        let q0 = generate_random_qubo(9, 3).unwrap();
        let q = build_permutation_qubo(&q0, 12.0).unwrap();
        let (r, constant) = reduce_permutation_start(&q).unwrap();
        assert_eq!(r.n(), 4);
        // free variables are nodes 1..3 x positions 1..3 -> indices 4,5,7,8
        let free = [4usize, 5, 7, 8];
        for b in Bitstring::all(4) {
            let mut full = vec![false; 9];
            full[0] = true;
            for (k, &v) in free.iter().enumerate() {
                full[v] = b.bit(k);
            }
            let fb = Bitstring::from_bits(&full).unwrap();
            let lhs = q.value(fb).unwrap();
            let rhs = r.value(b).unwrap() + constant;
            assert!((lhs - rhs).abs() < 1e-9);
        }
    }

    #[test]
    fn text_and_json_round_trip() {
        let q = generate_random_qubo(4, 99).unwrap();
        assert_eq!(QuboInstance::from_text(&q.to_text()).unwrap(), q);
        let odd = QuboInstance::from_rows(&[&[0.1, -1e-300], &[2.5e17, 1.0 / 3.0]]).unwrap();
        assert_eq!(QuboInstance::from_text(&odd.to_text()).unwrap(), odd);
        let json = serde_json::to_string(&q).unwrap();
        assert_eq!(serde_json::from_str::<QuboInstance>(&json).unwrap(), q);
    }

    #[test]
    fn text_parse_errors_carry_line_numbers() {
        match QuboInstance::from_text("2 5\n1 2\n3 x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(QuboInstance::from_text("2 5\n1 2\n").is_err());
        assert!(QuboInstance::from_text("").is_err());
    }

    #[test]
    fn profile_basic_properties() {
        let m = qubo_to_ising(&generate_random_qubo(8, 4).unwrap());
        let p = solution_space_profile(&m, &[0.0, 0.5, 0.9, 1.0]).unwrap();
        assert_eq!(p.fractions[0], 1.0);
        assert!(p.fractions.windows(2).all(|w| w[0] >= w[1]));
        let sol = brute_force_solve(&m).unwrap();
        assert_eq!(p.fractions[3], sol.argmin.len() as f64 / 256.0);
        assert!(p.fractions[3] >= 1.0 / 256.0);
        let mass: f64 = p.histogram.iter().map(|(_, f)| f).sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn energy_equivalence_holds(n in 1usize..=8, seed in any::<u64>()) {
            let q = generate_random_qubo(n, seed).unwrap();
            let m = qubo_to_ising(&q);
            let table = m.energy_table().unwrap();
            for b in Bitstring::all(n) {
                let direct = m.energy(b).unwrap();
                prop_assert!((direct - table[b.index() as usize]).abs() < 1e-9);
                prop_assert!((q.value(b).unwrap() - direct - m.offset()).abs() < 1e-9);
            }
        }

        #[test]
        fn symmetrization_preserves_form(
            entries in proptest::collection::vec(-5.0f64..5.0, 9),
            idx in 0u64..8,
        ) {
            let q = QuboInstance::from_matrix(3, entries, 0).unwrap();
            let b = Bitstring::new(3, idx).unwrap();
            prop_assert!((q.value(b).unwrap() - q.symmetrized().value(b).unwrap()).abs() < 1e-12);
            let m = qubo_to_ising(&q);
            prop_assert!((q.value(b).unwrap() - m.energy(b).unwrap() - m.offset()).abs() < 1e-9);
        }
    }
}
