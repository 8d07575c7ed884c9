//! Integer partitions, set partitions and the multinomial constant of a
//! sample configuration.

use std::cmp::Ordering;
use std::fmt;

use dashu::integer::UBig;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
#[cfg(test)]
use crate::numeric::RationalSum;
use crate::numeric::{factorial, Rational};

/// Largest partition size the enumerators accept unless raised explicitly.
pub const DEFAULT_PARTITION_CAP: usize = 12;

/// A partition `η` of `n`, kept simultaneously as a nonincreasing list of
/// parts and as the multiplicity vector `α` (`alpha[i-1]` counts parts equal
/// to `i`).
///
/// The empty partition is legal and stands for the constant function 1 in
/// the power-sum basis.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntegerPartition {
    parts: Vec<usize>,
    alpha: Vec<usize>,
}

impl IntegerPartition {
    /// Builds a partition from parts given in any order. Zero parts are
    /// rejected.
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(Error::Domain("partition parts must be positive".into()));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Self::from_sorted(parts))
    }

    pub fn empty() -> Self {
        Self {
            parts: Vec::new(),
            alpha: Vec::new(),
        }
    }

    /// The one-part partition `(k)`.
    pub fn single(k: usize) -> Self {
        assert!(k > 0, "part must be positive");
        Self::from_sorted(vec![k])
    }

    /// `(1, 1, ..., 1)` with `n` parts.
    pub fn singletons(n: usize) -> Self {
        Self::from_sorted(vec![1; n])
    }

    fn from_sorted(parts: Vec<usize>) -> Self {
        let n: usize = parts.iter().sum();
        let mut alpha = vec![0; n];
        for &p in &parts {
            alpha[p - 1] += 1;
        }
        Self { parts, alpha }
    }

    /// Inverse of [`IntegerPartition::alpha`]: rebuilds the parts from a
    /// multiplicity vector.
    pub fn from_multiplicities(alpha: &[usize]) -> Self {
        let mut parts = Vec::new();
        for (i, &count) in alpha.iter().enumerate().rev() {
            parts.extend(std::iter::repeat_n(i + 1, count));
        }
        Self::from_sorted(parts)
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// `|η|`
    pub fn size(&self) -> usize {
        self.alpha.len()
    }

    /// `l(η)`
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Multiplicity vector `(α_1, ..., α_n)`.
    pub fn alpha(&self) -> &[usize] {
        &self.alpha
    }

    /// `α_i(η)`, zero outside `1..=n`.
    pub fn multiplicity(&self, i: usize) -> usize {
        if i == 0 {
            0
        } else {
            self.alpha.get(i - 1).copied().unwrap_or(0)
        }
    }

    /// Number of singleton parts, `α_1(η)`.
    pub fn singleton_count(&self) -> usize {
        self.multiplicity(1)
    }

    /// True when every part is at least 2 (the empty partition included),
    /// i.e. when `φ_η` is a genuine power-sum product.
    pub fn is_power_sum_label(&self) -> bool {
        self.parts.iter().all(|&p| p >= 2)
    }

    /// The same partition with all singleton parts removed.
    pub fn without_singletons(&self) -> Self {
        Self::from_sorted(self.parts.iter().copied().filter(|&p| p >= 2).collect())
    }

    /// Multiset union of the parts, sorted.
    pub fn concat(&self, other: &Self) -> Self {
        let mut parts = self.parts.clone();
        parts.extend_from_slice(&other.parts);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Self::from_sorted(parts)
    }

    /// Removes one part equal to `part`, appending `part - 1` when it is
    /// still positive. Returns `None` if no such part exists.
    pub fn shrink_part(&self, part: usize) -> Option<Self> {
        let idx = self.parts.iter().position(|&p| p == part)?;
        let mut parts = self.parts.clone();
        parts.remove(idx);
        if part > 1 {
            parts.push(part - 1);
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Some(Self::from_sorted(parts))
    }

    /// Parses `2,2,1`, `[2,2,1]` or `(2,2,1)`; `""`, `[]` and `()` give the
    /// empty partition.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s
            .trim()
            .trim_start_matches(['[', '('])
            .trim_end_matches([']', ')'])
            .trim();
        if s.is_empty() {
            return Ok(Self::empty());
        }
        let parts = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad partition part {p:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(parts)
    }
}

impl fmt::Debug for IntegerPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `(2,2,1)`; the empty partition prints as `()`.
impl fmt::Display for IntegerPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Size first; within a size the partition with the larger part at the
/// first differing index comes first, so `(4) < (3,1) < (2,2)`.
impl Ord for IntegerPartition {
    fn cmp(&self, other: &Self) -> Ordering {
        self.size().cmp(&other.size()).then_with(|| {
            for (a, b) in self.parts.iter().zip(&other.parts) {
                match b.cmp(a) {
                    Ordering::Equal => continue,
                    ord => return ord,
                }
            }
            self.parts.len().cmp(&other.parts.len())
        })
    }
}

impl PartialOrd for IntegerPartition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Serialize for IntegerPartition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.parts.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for IntegerPartition {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let parts = Vec::<usize>::deserialize(deserializer)?;
        Self::new(parts).map_err(serde::de::Error::custom)
    }
}

pub fn partition_order(a: &IntegerPartition, b: &IntegerPartition) -> Ordering {
    a.cmp(b)
}

/// All partitions of `n`, in [`partition_order`].
pub fn enumerate_partitions(n: usize) -> Result<Vec<IntegerPartition>> {
    if n == 0 {
        return Err(Error::EmptyInput("cannot enumerate partitions of 0".into()));
    }
    let mut out = Vec::new();
    let mut current = Vec::new();
    fill_partitions(n, n, &mut current, &mut out);
    Ok(out)
}

fn fill_partitions(
    remaining: usize,
    max_part: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<IntegerPartition>,
) {
    if remaining == 0 {
        out.push(IntegerPartition::from_sorted(current.clone()));
        return;
    }
    for part in (1..=remaining.min(max_part)).rev() {
        current.push(part);
        fill_partitions(remaining - part, part, current, out);
        current.pop();
    }
}

/// Partitions of `n` whose parts are all at least 2, in order.
pub fn power_sum_labels(n: usize) -> Vec<IntegerPartition> {
    if n == 0 {
        return vec![IntegerPartition::empty()];
    }
    enumerate_partitions(n)
        .map(|v| v.into_iter().filter(|p| p.is_power_sum_label()).collect())
        .unwrap_or_default()
}

/// A partition of `{1, ..., l}` into blocks listed by increasing minimum.
/// Elements are stored 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct SetPartition {
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Number of blocks `d`.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// `Π_j (|β_j| − 1)!`
    pub fn block_weight(&self) -> UBig {
        self.blocks
            .iter()
            .map(|b| factorial(b.len() - 1))
            .fold(UBig::ONE, |acc, f| acc * f)
    }

    /// Block sums `Σ_{i∈β_j} values[i]` for each block, in block order.
    pub fn block_sums(&self, values: &[usize]) -> Vec<usize> {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|&i| values[i - 1]).sum())
            .collect()
    }
}

/// Every partition of `{1..l}` into exactly `d` blocks (count `S(l, d)`).
pub fn enumerate_set_partitions(l: usize, d: usize) -> Result<Vec<SetPartition>> {
    if d == 0 || d > l {
        return Err(Error::Domain(format!(
            "need 1 <= d <= l for set partitions, got l={l}, d={d}"
        )));
    }
    Ok(all_set_partitions(l)
        .into_iter()
        .filter(|p| p.len() == d)
        .collect())
}

/// Every partition of `{1..l}`, generated from restricted growth strings
/// (count `B_l`). For `l = 0` the single empty partition is returned.
pub fn all_set_partitions(l: usize) -> Vec<SetPartition> {
    let mut out = Vec::new();
    let mut labels = Vec::with_capacity(l);
    grow(l, &mut labels, 0, &mut out);
    out
}

fn grow(l: usize, labels: &mut Vec<usize>, used: usize, out: &mut Vec<SetPartition>) {
    if labels.len() == l {
        let mut blocks = vec![Vec::new(); used];
        for (i, &b) in labels.iter().enumerate() {
            blocks[b].push(i + 1);
        }
        out.push(SetPartition { blocks });
        return;
    }
    for b in 0..=used {
        labels.push(b);
        grow(l, labels, used.max(b + 1), out);
        labels.pop();
    }
}

/// `n! / (η_1! ⋯ η_l! · α_1! ⋯ α_n!)`, the number of ways a labelled sample
/// realises the unlabelled configuration `η`.
pub fn multinomial_constant(eta: &IntegerPartition) -> Rational {
    let den = eta
        .parts()
        .iter()
        .map(|&p| factorial(p))
        .chain(eta.alpha().iter().map(|&a| factorial(a)))
        .fold(UBig::ONE, |acc, f| acc * f);
    Rational::from(factorial(eta.size())) / Rational::from(den)
}
