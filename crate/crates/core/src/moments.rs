//! Exact moments under the Poisson–Dirichlet law `PD(θ)`, obtained from the
//! Ewens sampling formula.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use dashu::base::Sign;

use crate::combinatorics::{all_set_partitions, IntegerPartition};
use crate::error::{Error, Result};
use crate::numeric::{factorial, format_rational, parse_rational, pow, Rational, RationalSum};

/// The mutation rate `θ > 0`, held as an exact rational.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MutationRate(Rational);

impl MutationRate {
    pub fn new(theta: Rational) -> Result<Self> {
        if theta.sign() == Sign::Negative || theta == Rational::ZERO {
            return Err(Error::Domain(format!(
                "theta must be positive, got {}",
                format_rational(&theta)
            )));
        }
        Ok(Self(theta))
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::new(parse_rational(s)?)
    }

    pub fn from_int(theta: u64) -> Self {
        Self::new(Rational::from(theta)).expect("positive integer")
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }
}

impl fmt::Debug for MutationRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "θ={}", format_rational(&self.0))
    }
}

impl fmt::Display for MutationRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.0))
    }
}

/// `θ_(n) = θ(θ+1)⋯(θ+n−1)`, equal to 1 for `n = 0`.
pub fn rising_factorial(theta: &Rational, n: usize) -> Rational {
    (0..n).fold(Rational::ONE, |acc, i| acc * (theta + Rational::from(i)))
}

/// `∫ p^o_η dPD(θ) = Π_i (η_i − 1)! · θ^l / θ_(|η|)`.
pub fn esf_monomial_moment(eta: &IntegerPartition, theta: &MutationRate) -> Rational {
    let weight = eta
        .parts()
        .iter()
        .map(|&p| Rational::from(factorial(p - 1)))
        .fold(Rational::ONE, |acc, f| acc * f);
    weight * pow(theta.value(), eta.len()) / rising_factorial(theta.value(), eta.size())
}

fn require_power_sum_label(eta: &IntegerPartition) -> Result<()> {
    if eta.is_power_sum_label() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "power-sum labels need parts >= 2, got {eta}"
        )))
    }
}

/// `⟨φ_η, 1⟩_θ`: `φ_η` written as a sum of monomial samplers over all set
/// partitions `β` of its parts, each integrated with the Ewens formula.
pub fn power_sum_moment(eta: &IntegerPartition, theta: &MutationRate) -> Result<Rational> {
    require_power_sum_label(eta)?;
    Ok(power_sum_moment_unchecked(eta, theta))
}

fn power_sum_moment_unchecked(eta: &IntegerPartition, theta: &MutationRate) -> Rational {
    if eta.is_empty() {
        return Rational::ONE;
    }
    let n = eta.size();
    let th = theta.value();
    // θ^d coefficients, one per block count d
    let mut by_blocks = vec![Rational::ZERO; eta.len() + 1];
    for beta in all_set_partitions(eta.len()) {
        let w = beta
            .block_sums(eta.parts())
            .into_iter()
            .map(|s| Rational::from(factorial(s - 1)))
            .fold(Rational::ONE, |acc, f| acc * f);
        by_blocks[beta.len()] += w;
    }
    let numerator: Rational = by_blocks
        .iter()
        .enumerate()
        .map(|(d, c)| c * pow(th, d))
        .sum_rational();
    numerator / rising_factorial(th, n)
}

/// `⟨φ_η, φ_ξ⟩_θ = ⟨φ_{η∪ξ}, 1⟩_θ`.
pub fn mixed_power_sum_moment(
    eta: &IntegerPartition,
    xi: &IntegerPartition,
    theta: &MutationRate,
) -> Result<Rational> {
    require_power_sum_label(eta)?;
    require_power_sum_label(xi)?;
    Ok(power_sum_moment_unchecked(&eta.concat(xi), theta))
}

/// Memoised `⟨φ_η, 1⟩_θ` at one fixed `θ`. Readers share the table; a
/// miss computes outside the lock and then takes the write lock briefly.
#[derive(Debug, Clone)]
pub struct MomentTable {
    theta: MutationRate,
    memo: Arc<RwLock<HashMap<IntegerPartition, Rational>>>,
}

impl MomentTable {
    pub fn new(theta: MutationRate) -> Self {
        Self {
            theta,
            memo: Arc::new(RwLock::new(HashMap::new())),
        }
    }

    pub fn theta(&self) -> &MutationRate {
        &self.theta
    }

    pub fn moment(&self, eta: &IntegerPartition) -> Result<Rational> {
        require_power_sum_label(eta)?;
        if let Some(v) = self.memo.read().expect("moment table poisoned").get(eta) {
            return Ok(v.clone());
        }
        let v = power_sum_moment_unchecked(eta, &self.theta);
        self.memo
            .write()
            .expect("moment table poisoned")
            .insert(eta.clone(), v.clone());
        Ok(v)
    }

    pub fn mixed(&self, eta: &IntegerPartition, xi: &IntegerPartition) -> Result<Rational> {
        require_power_sum_label(xi)?;
        self.moment(&eta.concat(xi))
    }
}
