use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Assignment of `n` binary variables, stored as a little-endian basis index.
///
/// Bit `i` of [`Bitstring::index`] is variable `x_i` (equivalently qubit `i`).
/// The textual form lists `x_0` first, so `"01"` means `x_0 = 0, x_1 = 1`
/// and corresponds to basis index 2.
///
/// Ordering is lexicographic on the textual form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Bitstring {
    n: usize,
    index: u64,
}

impl Bitstring {
    pub const MAX_BITS: usize = 63;

    pub fn new(n: usize, index: u64) -> Result<Self> {
        if n == 0 || n > Self::MAX_BITS {
            return Err(Error::invalid(format!("bit string length {n} not in 1..=63")));
        }
        if index >> n != 0 {
            return Err(Error::invalid(format!("index {index} does not fit in {n} bits")));
        }
        Ok(Self { n, index })
    }

    pub(crate) fn from_index(n: usize, index: usize) -> Self {
        debug_assert!(n >= 1 && n <= Self::MAX_BITS && (index as u64) >> n == 0);
        Self { n, index: index as u64 }
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let index = bits
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | (u64::from(b) << i));
        Self::new(bits.len(), index)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn bit(&self, i: usize) -> bool {
        (self.index >> i) & 1 == 1
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.n).map(|i| self.bit(i)).collect()
    }

    /// Every `n`-bit string in basis-index order.
    pub fn all(n: usize) -> impl Iterator<Item = Bitstring> {
        (0..1u64 << n).map(move |index| Bitstring { n, index })
    }
}

impl Ord for Bitstring {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n.cmp(&other.n).then_with(|| {
            // lexicographic with x_0 most significant
            let a = self.index.reverse_bits() >> (64 - self.n);
            let b = other.index.reverse_bits() >> (64 - other.n);
            a.cmp(&b)
        })
    }
}

impl PartialOrd for Bitstring {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Bitstring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::invalid(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bits(&bits)
    }
}

impl From<Bitstring> for String {
    fn from(b: Bitstring) -> String {
        b.to_string()
    }
}

impl TryFrom<String> for Bitstring {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_form_is_x0_first() {
        let b: Bitstring = "01".parse().unwrap();
        assert_eq!(b.index(), 2);
        assert!(!b.bit(0));
        assert!(b.bit(1));
        assert_eq!(b.to_string(), "01");
    }

    #[test]
    fn ordering_is_lexicographic() {
        let a: Bitstring = "01".parse().unwrap();
        let b: Bitstring = "10".parse().unwrap();
        assert!(a < b);
        assert!(a.index() > b.index());
    }

    #[test]
    fn rejects_bad_input() {
        assert!("".parse::<Bitstring>().is_err());
        assert!("012".parse::<Bitstring>().is_err());
        assert!(Bitstring::new(2, 4).is_err());
    }
}
