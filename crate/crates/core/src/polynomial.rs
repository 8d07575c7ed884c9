//! Finite linear combinations of power-sum products `φ_ξ = Π_j φ_{ξ_j}`.

use std::collections::BTreeMap;
use std::ops::{AddAssign, Mul};

use crate::combinatorics::IntegerPartition;
use crate::numeric::Rational;
use crate::sampling::{power_sum, FrequencyVector};

/// `Σ_ξ c_ξ φ_ξ` with `φ_∅ ≡ 1`. Labels always have parts `≥ 2`; zero
/// coefficients are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PowerSumPoly {
    terms: BTreeMap<IntegerPartition, Rational>,
}

impl PowerSumPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(IntegerPartition::empty())
    }

    /// `φ_label`. Singleton parts are dropped since `φ_1 ≡ 1`.
    pub fn monomial(label: IntegerPartition) -> Self {
        Self::term(label, Rational::ONE)
    }

    pub fn term(label: IntegerPartition, coeff: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(label, coeff);
        p
    }

    pub fn add_term(&mut self, label: IntegerPartition, coeff: Rational) {
        let label = label.without_singletons();
        let entry = self.terms.entry(label.clone()).or_insert(Rational::ZERO);
        *entry += coeff;
        if *entry == Rational::ZERO {
            self.terms.remove(&label);
        }
    }

    /// `self += scale · other`
    pub fn add_scaled(&mut self, other: &Self, scale: &Rational) {
        for (label, c) in &other.terms {
            self.add_term(label.clone(), c * scale);
        }
    }

    pub fn coeff(&self, label: &IntegerPartition) -> Rational {
        self.terms.get(label).cloned().unwrap_or(Rational::ZERO)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&IntegerPartition, &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest label in partition order, if any.
    pub fn leading_label(&self) -> Option<&IntegerPartition> {
        self.terms.keys().next_back()
    }

    /// Largest `|ξ|` among the labels.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|l| l.size()).max().unwrap_or(0)
    }

    pub fn evaluate(&self, x: &FrequencyVector) -> Rational {
        let mut cache: BTreeMap<usize, Rational> = BTreeMap::new();
        let mut total = Rational::ZERO;
        for (label, c) in &self.terms {
            let mut value = c.clone();
            for &part in label.parts() {
                let phi = cache
                    .entry(part)
                    .or_insert_with(|| power_sum(part, x).expect("parts are positive"));
                value *= &*phi;
            }
            total += value;
        }
        total
    }
}

impl AddAssign<&PowerSumPoly> for PowerSumPoly {
    fn add_assign(&mut self, rhs: &PowerSumPoly) {
        self.add_scaled(rhs, &Rational::ONE);
    }
}

impl Mul for &PowerSumPoly {
    type Output = PowerSumPoly;

    fn mul(self, rhs: &PowerSumPoly) -> PowerSumPoly {
        let mut out = PowerSumPoly::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                out.add_term(a.concat(b), ca * cb);
            }
        }
        out
    }
}
