//! Sampling probabilities `p_η(x)` of a sample configuration drawn from a
//! population with allele frequencies `x`.
//!
//! Two independent routes are provided: a brute-force paintbox sum over
//! distinct type assignments, and the alternating set-partition expansion
//! in power sums. The expansion uses `φ_1 ≡ 1`, which makes it the
//! continuous extension of the sampling probability to frequency vectors
//! that carry dust (a continuous part of the spectrum).

use std::collections::BTreeMap;

use dashu::base::Sign;
use dashu::integer::{IBig, UBig};
use rand::Rng;
use serde::Serialize;

use crate::combinatorics::{
    all_set_partitions, enumerate_partitions, multinomial_constant, IntegerPartition,
};
use crate::error::{Error, Result};
use crate::numeric::{format_rational, pow, Rational, RationalSum};
use crate::polynomial::PowerSumPoly;

/// Limits for the exponential brute-force oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub max_n: usize,
    pub max_atoms: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            max_n: 8,
            max_atoms: 10,
        }
    }
}

/// A point of the closed infinite simplex: finitely many atoms, listed in
/// nonincreasing order, plus the dust mass `1 − Σ atoms`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyVector {
    atoms: Vec<Rational>,
    dust: Rational,
}

impl FrequencyVector {
    /// Sorts the atoms, drops zeros and assigns the leftover mass to dust.
    pub fn new(atoms: Vec<Rational>) -> Result<Self> {
        let mut atoms: Vec<Rational> = atoms.into_iter().filter(|a| *a != Rational::ZERO).collect();
        if atoms
            .iter()
            .any(|a| a.sign() == Sign::Negative || *a > Rational::ONE)
        {
            return Err(Error::Domain("atoms must lie in [0, 1]".into()));
        }
        atoms.sort_unstable_by(|a, b| b.cmp(a));
        let total: Rational = atoms.iter().sum_rational();
        let dust = Rational::ONE - total;
        if dust.sign() == Sign::Negative {
            return Err(Error::Domain(format!(
                "atoms sum to {} > 1",
                format_rational(&(Rational::ONE - dust))
            )));
        }
        Ok(Self { atoms, dust })
    }

    /// Like [`FrequencyVector::new`], but checks a stated dust mass.
    pub fn with_dust(atoms: Vec<Rational>, dust: Rational) -> Result<Self> {
        let x = Self::new(atoms)?;
        if x.dust != dust {
            return Err(Error::Domain(format!(
                "dust {} does not equal 1 - sum(atoms) = {}",
                format_rational(&dust),
                format_rational(&x.dust)
            )));
        }
        Ok(x)
    }

    /// All mass in the continuous spectrum, `(0, 0, ...)`.
    pub fn pure_dust() -> Self {
        Self {
            atoms: Vec::new(),
            dust: Rational::ONE,
        }
    }

    /// `(1, 0, 0, ...)`
    pub fn point_mass() -> Self {
        Self {
            atoms: vec![Rational::ONE],
            dust: Rational::ZERO,
        }
    }

    pub fn atoms(&self) -> &[Rational] {
        &self.atoms
    }

    pub fn dust(&self) -> &Rational {
        &self.dust
    }

    pub fn has_dust(&self) -> bool {
        self.dust != Rational::ZERO
    }

    /// Random full-mass vector with `1..=max_atoms` atoms: a random
    /// composition of integers in `1..=20`, normalised.
    pub fn random_full_mass<R: Rng>(rng: &mut R, max_atoms: usize) -> Self {
        let k = rng.gen_range(1..=max_atoms.max(1));
        let weights: Vec<u32> = (0..k).map(|_| rng.gen_range(1..=20)).collect();
        Self::from_weights(&weights, 0)
    }

    /// Random vector whose dust carries a positive share of the mass.
    pub fn random_with_dust<R: Rng>(rng: &mut R, max_atoms: usize) -> Self {
        let k = rng.gen_range(1..=max_atoms.max(1));
        let weights: Vec<u32> = (0..k).map(|_| rng.gen_range(1..=20)).collect();
        let dust_weight = rng.gen_range(1..=20);
        Self::from_weights(&weights, dust_weight)
    }

    fn from_weights(weights: &[u32], dust_weight: u32) -> Self {
        let total: u32 = weights.iter().sum::<u32>() + dust_weight;
        let atoms = weights
            .iter()
            .map(|&w| Rational::from_parts(IBig::from(w), UBig::from(total)))
            .collect();
        Self::new(atoms).expect("weights normalise into the simplex")
    }
}

/// `φ_k(x) = Σ_i x_i^k` for `k ≥ 2`, and exactly 1 for `k = 1`.
pub fn power_sum(k: usize, x: &FrequencyVector) -> Result<Rational> {
    match k {
        0 => Err(Error::Domain("power sum of order 0 is undefined".into())),
        1 => Ok(Rational::ONE),
        _ => Ok(x.atoms.iter().map(|a| pow(a, k)).sum_rational()),
    }
}

/// Brute-force `p^o_η(x)`: sum over assignments of distinct atoms to the
/// parts of `η`. A singleton part may instead come from the dust, which
/// never repeats a type. The last singleton slot uses the telescoped form
/// `1 − Σ(used atoms)`.
pub fn monomial_sampler_bruteforce(
    eta: &IntegerPartition,
    x: &FrequencyVector,
    caps: &Caps,
) -> Result<Rational> {
    if eta.size() > caps.max_n {
        return Err(Error::Resource {
            what: "|eta|",
            value: eta.size(),
            limit: caps.max_n,
        });
    }
    if x.atoms.len() > caps.max_atoms {
        return Err(Error::Resource {
            what: "atoms",
            value: x.atoms.len(),
            limit: caps.max_atoms,
        });
    }
    // non-singleton parts first, singletons last
    let parts = eta.parts();
    let max_part = parts.first().copied().unwrap_or(1);
    let powers: Vec<Vec<Rational>> = x
        .atoms
        .iter()
        .map(|a| (0..=max_part).map(|k| pow(a, k)).collect())
        .collect();
    let mut used = vec![false; x.atoms.len()];
    Ok(assign(parts, &powers, x, &mut used, Rational::ZERO))
}

fn assign(
    parts: &[usize],
    powers: &[Vec<Rational>],
    x: &FrequencyVector,
    used: &mut [bool],
    used_mass: Rational,
) -> Rational {
    let Some((&part, rest)) = parts.split_first() else {
        return Rational::ONE;
    };
    if part == 1 && rest.is_empty() {
        return Rational::ONE - used_mass;
    }
    let mut total = Rational::ZERO;
    for i in 0..powers.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let inner = assign(rest, powers, x, used, &used_mass + &x.atoms[i]);
        used[i] = false;
        total += &powers[i][part] * inner;
    }
    if part == 1 && x.has_dust() {
        total += &x.dust * assign(rest, powers, x, used, used_mass);
    }
    total
}

/// `p^o_η = Σ_β (−1)^{l−d} Π_j (|β_j| − 1)! Π_j φ_{Σ_{i∈β_j} η_i}` as a
/// power-sum polynomial, summed over all set partitions `β` of `{1..l}`
/// with `d` blocks.
pub fn monomial_sampler_poly(eta: &IntegerPartition) -> PowerSumPoly {
    let l = eta.len();
    let mut poly = PowerSumPoly::zero();
    for beta in all_set_partitions(l) {
        let d = beta.len();
        let mut coeff = Rational::from(beta.block_weight());
        if (l - d) % 2 == 1 {
            coeff = -coeff;
        }
        let label =
            IntegerPartition::new(beta.block_sums(eta.parts())).expect("block sums are positive");
        poly.add_term(label, coeff);
    }
    poly
}

/// `p^o_η(x)` through the set-partition expansion.
pub fn monomial_sampler_expansion(eta: &IntegerPartition, x: &FrequencyVector) -> Rational {
    monomial_sampler_poly(eta).evaluate(x)
}

/// `P_n(η) = multinomial(η) · p^o_η(x)`.
pub fn sampling_probability(eta: &IntegerPartition, x: &FrequencyVector) -> Rational {
    multinomial_constant(eta) * monomial_sampler_expansion(eta, x)
}

/// The full sampling law on partitions of `n`.
pub fn sampling_distribution(
    n: usize,
    x: &FrequencyVector,
) -> Result<BTreeMap<IntegerPartition, Rational>> {
    Ok(enumerate_partitions(n)?
        .into_iter()
        .map(|eta| {
            let p = sampling_probability(&eta, x);
            (eta, p)
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyReport {
    pub n: usize,
    pub consistent: bool,
    /// `(ξ, P_{n−1}(ξ) − Σ_η P_n(η)·w(η→ξ))` for each `|ξ| = n − 1`.
    #[serde(serialize_with = "serialize_residuals")]
    pub residuals: Vec<(IntegerPartition, Rational)>,
}

fn serialize_residuals<S: serde::Serializer>(
    residuals: &[(IntegerPartition, Rational)],
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = serializer.serialize_seq(Some(residuals.len()))?;
    for (xi, r) in residuals {
        seq.serialize_element(&(xi, format_rational(r)))?;
    }
    seq.end()
}

/// Kingman consistency: deleting a uniformly chosen individual from an
/// `n`-sample must produce the `(n−1)`-sample law. Removing one of the `j`
/// individuals in a part of size `j` happens with probability
/// `j·α_j(η)/n` and shrinks that part by one.
pub fn consistency_check(n: usize, x: &FrequencyVector) -> Result<ConsistencyReport> {
    if n < 2 {
        return Err(Error::Domain("consistency needs n >= 2".into()));
    }
    let upper = sampling_distribution(n, x)?;
    let mut pushed: BTreeMap<IntegerPartition, Rational> = BTreeMap::new();
    let n_rat = Rational::from(n);
    for (eta, p) in &upper {
        for (idx, &count) in eta.alpha().iter().enumerate() {
            if count == 0 {
                continue;
            }
            let j = idx + 1;
            let xi = eta.shrink_part(j).expect("part of size j exists");
            let weight = Rational::from(j * count) / &n_rat;
            *pushed.entry(xi).or_insert(Rational::ZERO) += p * weight;
        }
    }
    let lower = sampling_distribution(n - 1, x)?;
    let residuals: Vec<(IntegerPartition, Rational)> = lower
        .into_iter()
        .map(|(xi, p)| {
            let got = pushed.remove(&xi).unwrap_or(Rational::ZERO);
            (xi, p - got)
        })
        .collect();
    let consistent = pushed.is_empty() && residuals.iter().all(|(_, r)| *r == Rational::ZERO);
    Ok(ConsistencyReport {
        n,
        consistent,
        residuals,
    })
}
