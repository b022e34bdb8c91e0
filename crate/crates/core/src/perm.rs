//! Permutations in one-line notation.
//!
//! Entries are 1-based ranks. The empty permutation is a first-class value and
//! is the identity for both [`Permutation::sum`] and [`Permutation::skew_sum`].

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermError {
    #[error("invalid permutation text {0:?}")]
    Parse(String),
    #[error("entries {0:?} are not a rearrangement of 1..n")]
    NotAPermutation(Vec<u32>),
    #[error("sum-indecomposability is undefined for the empty permutation")]
    Empty,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Permutation {
    entries: Vec<u32>,
}

impl Permutation {
    pub fn new(entries: Vec<u32>) -> Result<Self, PermError> {
        let n = entries.len();
        let mut seen = vec![false; n];
        for &v in &entries {
            let idx = v as usize;
            if idx == 0 || idx > n || seen[idx - 1] {
                return Err(PermError::NotAPermutation(entries));
            }
            seen[idx - 1] = true;
        }
        Ok(Self { entries })
    }

    /// Skips validation; callers guarantee `entries` is a rearrangement of `1..=n`.
    pub(crate) fn from_raw(entries: Vec<u32>) -> Self {
        debug_assert!(Self::new(entries.clone()).is_ok());
        Self { entries }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn identity(n: usize) -> Self {
        Self::from_raw((1..=n as u32).collect())
    }

    /// Relabels an arbitrary sequence of distinct values by relative order.
    pub fn standardize(values: &[u32]) -> Self {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by_key(|&i| values[i]);
        let mut entries = vec![0; values.len()];
        for (rank, &i) in order.iter().enumerate() {
            entries[i] = rank as u32 + 1;
        }
        Self::from_raw(entries)
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `true` iff some subsequence of `self` is order-isomorphic to `pattern`.
    pub fn contains(&self, pattern: &Permutation) -> bool {
        contains(pattern, self)
    }

    pub fn sum(&self, other: &Permutation) -> Permutation {
        let shift = self.len() as u32;
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().map(|&v| v + shift));
        Self::from_raw(entries)
    }

    pub fn skew_sum(&self, other: &Permutation) -> Permutation {
        let shift = other.len() as u32;
        let mut entries: Vec<u32> = self.entries.iter().map(|&v| v + shift).collect();
        entries.extend_from_slice(&other.entries);
        Self::from_raw(entries)
    }

    /// Splits into sum-indecomposable components, cutting after every position
    /// whose prefix maximum equals its length.
    pub fn sum_decompose(&self) -> Vec<Permutation> {
        let mut parts = Vec::new();
        let mut start = 0;
        let mut max = 0;
        for (i, &v) in self.entries.iter().enumerate() {
            max = max.max(v);
            if max as usize == i + 1 {
                let offset = start as u32;
                parts.push(Self::from_raw(
                    self.entries[start..=i].iter().map(|&v| v - offset).collect(),
                ));
                start = i + 1;
            }
        }
        parts
    }

    pub fn is_sum_indecomposable(&self) -> Result<bool, PermError> {
        if self.is_empty() {
            return Err(PermError::Empty);
        }
        let mut max = 0;
        for (i, &v) in self.entries[..self.len() - 1].iter().enumerate() {
            max = max.max(v);
            if max as usize == i + 1 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn reverse(&self) -> Permutation {
        Self::from_raw(self.entries.iter().rev().copied().collect())
    }

    pub fn complement(&self) -> Permutation {
        let n = self.len() as u32 + 1;
        Self::from_raw(self.entries.iter().map(|&v| n - v).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut entries = vec![0; self.len()];
        for (i, &v) in self.entries.iter().enumerate() {
            entries[v as usize - 1] = i as u32 + 1;
        }
        Self::from_raw(entries)
    }

    pub fn apply(&self, symmetry: Symmetry) -> Permutation {
        symmetry.apply(self)
    }

    /// Distinct permutations obtained by deleting one entry.
    pub fn deletions(&self) -> BTreeSet<Permutation> {
        (0..self.len())
            .map(|skip| {
                let removed = self.entries[skip];
                Self::from_raw(
                    self.entries
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != skip)
                        .map(|(_, &v)| if v > removed { v - 1 } else { v })
                        .collect(),
                )
            })
            .collect()
    }

    /// All `n + 1` by `n + 1` single-point insertions, deduplicated.
    pub fn insertions(&self) -> BTreeSet<Permutation> {
        let n = self.len();
        let mut out = BTreeSet::new();
        for value in 1..=n as u32 + 1 {
            let bumped: Vec<u32> = self
                .entries
                .iter()
                .map(|&v| if v >= value { v + 1 } else { v })
                .collect();
            for pos in 0..=n {
                let mut entries = bumped.clone();
                entries.insert(pos, value);
                out.insert(Self::from_raw(entries));
            }
        }
        out
    }

    /// Every permutation of size `n`, in lexicographic order.
    pub fn all_of_size(n: usize) -> Vec<Permutation> {
        let mut current: Vec<u32> = (1..=n as u32).collect();
        let mut out = vec![Self::from_raw(current.clone())];
        while next_lexicographic(&mut current) {
            out.push(Self::from_raw(current.clone()));
        }
        out
    }
}

fn next_lexicographic(v: &mut [u32]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Pattern containment by backtracking over text positions, left to right,
/// pruning branches that cannot fit the remaining pattern entries.
pub fn contains(pattern: &Permutation, text: &Permutation) -> bool {
    let k = pattern.len();
    if k > text.len() {
        return false;
    }
    if k == 0 {
        return true;
    }
    let mut chosen = Vec::with_capacity(k);
    embed(&pattern.entries, &text.entries, &mut chosen, 0)
}

fn embed(pattern: &[u32], text: &[u32], chosen: &mut Vec<usize>, start: usize) -> bool {
    let j = chosen.len();
    if j == pattern.len() {
        return true;
    }
    let remaining = pattern.len() - j;
    for pos in start..=text.len() - remaining {
        let consistent = chosen
            .iter()
            .enumerate()
            .all(|(i, &at)| (pattern[i] < pattern[j]) == (text[at] < text[pos]));
        if consistent {
            chosen.push(pos);
            if embed(pattern, text, chosen, pos + 1) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

/// An element of the dihedral group of the square acting on permutation
/// diagrams: optionally invert, then optionally reverse, then optionally
/// complement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Symmetry {
    pub inverse: bool,
    pub reverse: bool,
    pub complement: bool,
}

impl Symmetry {
    pub const IDENTITY: Symmetry = Symmetry::new(false, false, false);
    pub const REVERSE: Symmetry = Symmetry::new(false, true, false);
    pub const COMPLEMENT: Symmetry = Symmetry::new(false, false, true);
    pub const INVERSE: Symmetry = Symmetry::new(true, false, false);

    pub const fn new(inverse: bool, reverse: bool, complement: bool) -> Self {
        Self {
            inverse,
            reverse,
            complement,
        }
    }

    pub fn all() -> [Symmetry; 8] {
        let mut out = [Symmetry::IDENTITY; 8];
        for (bits, slot) in out.iter_mut().enumerate() {
            *slot = Symmetry::new(bits & 4 != 0, bits & 2 != 0, bits & 1 != 0);
        }
        out
    }

    pub fn apply(self, perm: &Permutation) -> Permutation {
        let mut out = if self.inverse {
            perm.inverse()
        } else {
            perm.clone()
        };
        if self.reverse {
            out = out.reverse();
        }
        if self.complement {
            out = out.complement();
        }
        out
    }

    /// The symmetry equal to applying `self` first and `then` second.
    pub fn then(self, then: Symmetry) -> Symmetry {
        // 2314 has trivial stabiliser, so its image identifies the group element.
        let probe = Permutation::from_raw(vec![2, 3, 1, 4]);
        let image = then.apply(&self.apply(&probe));
        Symmetry::all()
            .into_iter()
            .find(|s| s.apply(&probe) == image)
            .expect("dihedral group is closed under composition")
    }

    pub fn name(self) -> String {
        let mut parts = Vec::new();
        if self.inverse {
            parts.push("inverse");
        }
        if self.reverse {
            parts.push("reverse");
        }
        if self.complement {
            parts.push("complement");
        }
        if parts.is_empty() {
            "identity".to_string()
        } else {
            parts.join("+")
        }
    }
}

impl fmt::Display for Permutation {
    /// Contiguous digits up to size 9, space-separated above.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len() <= 9 {
            for v in &self.entries {
                write!(f, "{v}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.entries.iter().map(u32::to_string).collect();
            f.write_str(&parts.join(" "))
        }
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation({self})")
    }
}

impl FromStr for Permutation {
    type Err = PermError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "ε" {
            return Ok(Self::empty());
        }
        let entries: Result<Vec<u32>, _> = if s.contains(char::is_whitespace) {
            s.split_whitespace().map(str::parse::<u32>).collect()
        } else if s.chars().all(|c| c.is_ascii_digit()) {
            Ok(s.chars().map(|c| c as u32 - '0' as u32).collect())
        } else {
            return Err(PermError::Parse(s.to_string()));
        };
        let entries = entries.map_err(|_| PermError::Parse(s.to_string()))?;
        Self::new(entries)
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
