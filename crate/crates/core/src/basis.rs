//! Orthogonal polynomials on the infinite simplex with respect to `PD(θ)`.
//!
//! The family `{1} ∪ {φ_η : parts of η ≥ 2}` is orthogonalised in
//! partition order, symbolically over the power-sum basis, so every
//! coefficient and every inner product is an exact rational. Projections
//! divide by `⟨ψ_ξ, ψ_ξ⟩_θ`, so the resulting family is pairwise orthogonal.

use std::collections::{BTreeMap, HashMap};

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::combinatorics::{power_sum_labels, IntegerPartition};
use crate::error::{Error, Result};
use crate::moments::{MomentTable, MutationRate};
use crate::numeric::{format_rational, Rational};
use crate::polynomial::PowerSumPoly;
use crate::sampling::FrequencyVector;

/// One orthogonal element `ψ_label = φ_label − Σ_{ξ<label} c_ξ ψ_ξ`.
#[derive(Debug, Clone)]
pub struct BasisElement {
    label: IntegerPartition,
    coeffs: PowerSumPoly,
    norm2: Rational,
    /// `φ_label = Σ_{ξ ≤ label} projections[ξ] · ψ_ξ`, with
    /// `projections[label] = 1`.
    projections: BTreeMap<IntegerPartition, Rational>,
    theta: MutationRate,
}

impl BasisElement {
    pub fn label(&self) -> &IntegerPartition {
        &self.label
    }

    /// Expansion in power-sum products.
    pub fn coeffs(&self) -> &PowerSumPoly {
        &self.coeffs
    }

    /// `‖ψ‖²_θ`
    pub fn norm2(&self) -> &Rational {
        &self.norm2
    }

    pub fn theta(&self) -> &MutationRate {
        &self.theta
    }

    /// Coordinates of `φ_label` in the orthogonal family.
    pub fn projections(&self) -> &BTreeMap<IntegerPartition, Rational> {
        &self.projections
    }

    pub fn is_constant(&self) -> bool {
        self.label.is_empty()
    }
}

impl Serialize for BasisElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let coeffs: BTreeMap<String, String> = self
            .coeffs
            .terms()
            .map(|(l, c)| (label_key(l), format_rational(c)))
            .collect();
        let mut s = serializer.serialize_struct("BasisElement", 3)?;
        s.serialize_field("label", &self.label)?;
        s.serialize_field("coeffs", &coeffs)?;
        s.serialize_field("norm2", &format_rational(&self.norm2))?;
        s.end()
    }
}

/// `"2,2"` for `(2,2)`; the constant monomial is `"1"`.
pub fn label_key(label: &IntegerPartition) -> String {
    if label.is_empty() {
        "1".to_string()
    } else {
        label
            .parts()
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// The orthogonal family up to a maximum label size, at one `θ`.
#[derive(Debug, Clone)]
pub struct Basis {
    theta: MutationRate,
    max_size: usize,
    elements: Vec<BasisElement>,
    index: HashMap<IntegerPartition, usize>,
    moments: MomentTable,
}

impl Basis {
    pub fn theta(&self) -> &MutationRate {
        &self.theta
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    /// Elements in partition order, the constant first.
    pub fn elements(&self) -> &[BasisElement] {
        &self.elements
    }

    pub fn get(&self, label: &IntegerPartition) -> Option<&BasisElement> {
        self.index.get(label).map(|&i| &self.elements[i])
    }

    pub fn moments(&self) -> &MomentTable {
        &self.moments
    }

    pub fn inner_product(&self, f: &PowerSumPoly, g: &PowerSumPoly) -> Result<Rational> {
        inner_product_with(f, g, &self.moments)
    }

    /// Coordinates of an arbitrary polynomial in the orthogonal family.
    pub fn expand(&self, poly: &PowerSumPoly) -> Result<BTreeMap<IntegerPartition, Rational>> {
        let mut out: BTreeMap<IntegerPartition, Rational> = BTreeMap::new();
        for (label, c) in poly.terms() {
            let element = self.get(label).ok_or_else(|| {
                Error::State(format!(
                    "basis built to size {} does not contain {label}",
                    self.max_size
                ))
            })?;
            for (xi, proj) in &element.projections {
                *out.entry(xi.clone()).or_insert(Rational::ZERO) += c * proj;
            }
        }
        out.retain(|_, v| *v != Rational::ZERO);
        Ok(out)
    }
}

/// Gram–Schmidt over `{1} ∪ {φ_η : 2 ≤ |η| ≤ max_size, parts ≥ 2}`.
pub fn build_basis(max_size: usize, theta: &MutationRate) -> Result<Basis> {
    let moments = MomentTable::new(theta.clone());
    let labels: Vec<IntegerPartition> = std::iter::once(IntegerPartition::empty())
        .chain((2..=max_size).flat_map(power_sum_labels))
        .collect();
    let mut elements: Vec<BasisElement> = Vec::with_capacity(labels.len());
    let mut index = HashMap::new();
    for label in labels {
        let phi = PowerSumPoly::monomial(label.clone());
        let mut coeffs = phi.clone();
        let mut projections = BTreeMap::new();
        for prev in &elements {
            let overlap = inner_product_with(&phi, &prev.coeffs, &moments)?;
            if overlap == Rational::ZERO {
                continue;
            }
            let c = overlap / &prev.norm2;
            coeffs.add_scaled(&prev.coeffs, &(-c.clone()));
            projections.insert(prev.label.clone(), c);
        }
        projections.insert(label.clone(), Rational::ONE);
        // ⟨ψ,ψ⟩ = ⟨φ,ψ⟩ once ψ is orthogonal to its predecessors
        let norm2 = inner_product_with(&phi, &coeffs, &moments)?;
        if norm2 == Rational::ZERO {
            return Err(Error::DegenerateBasis(format!("zero norm for {label}")));
        }
        index.insert(label.clone(), elements.len());
        elements.push(BasisElement {
            label,
            coeffs,
            norm2,
            projections,
            theta: theta.clone(),
        });
    }
    Ok(Basis {
        theta: theta.clone(),
        max_size,
        elements,
        index,
        moments,
    })
}

fn inner_product_with(
    f: &PowerSumPoly,
    g: &PowerSumPoly,
    moments: &MomentTable,
) -> Result<Rational> {
    let mut total = Rational::ZERO;
    for (a, ca) in f.terms() {
        for (b, cb) in g.terms() {
            total += ca * cb * moments.mixed(a, b)?;
        }
    }
    Ok(total)
}

/// `⟨f, g⟩_θ = ∫ f g dPD(θ)` for power-sum polynomials.
pub fn inner_product(f: &PowerSumPoly, g: &PowerSumPoly, theta: &MutationRate) -> Result<Rational> {
    inner_product_with(f, g, &MomentTable::new(theta.clone()))
}

/// The recursion `ψ_ω = φ_ω − Σ_{ξ<ω} ⟨φ_ω, ψ_ξ⟩ ψ_ξ` with no division by
/// `‖ψ_ξ‖²`. The result is not orthogonal; it is kept for comparing
/// `θ`-orders of inner products against the orthogonal family.
pub fn unnormalized_family(
    max_size: usize,
    theta: &MutationRate,
) -> Result<Vec<(IntegerPartition, PowerSumPoly)>> {
    let moments = MomentTable::new(theta.clone());
    let mut out: Vec<(IntegerPartition, PowerSumPoly)> = Vec::new();
    let labels =
        std::iter::once(IntegerPartition::empty()).chain((2..=max_size).flat_map(power_sum_labels));
    for label in labels {
        let phi = PowerSumPoly::monomial(label.clone());
        let mut coeffs = phi.clone();
        for (_, prev) in &out {
            let overlap = inner_product_with(&phi, prev, &moments)?;
            coeffs.add_scaled(prev, &-overlap);
        }
        out.push((label, coeffs));
    }
    Ok(out)
}

pub fn evaluate_basis_element(psi: &BasisElement, x: &FrequencyVector) -> Rational {
    psi.coeffs.evaluate(x)
}

/// `χ = ψ / ‖ψ‖` kept as the pair `(ψ, ‖ψ‖²)` so no square root is taken.
pub fn normalized_element(psi: &BasisElement) -> Result<(PowerSumPoly, Rational)> {
    if psi.norm2 == Rational::ZERO {
        return Err(Error::DegenerateBasis(format!(
            "{} has zero norm",
            psi.label
        )));
    }
    Ok((psi.coeffs.clone(), psi.norm2.clone()))
}

/// Generator of the diffusion applied to a power-sum polynomial, with
/// `φ_1 ≡ 1` absorbed by `PowerSumPoly`.
pub fn generator(f: &PowerSumPoly, theta: &Rational) -> PowerSumPoly {
    let mut out = PowerSumPoly::zero();
    for (label, c) in f.terms() {
        let parts = label.parts();
        let d = Rational::from(label.size());
        let lambda = &d * (&d - Rational::ONE + theta) / Rational::from(2u8);
        out.add_term(label.clone(), -(c * lambda));
        for a in 0..parts.len() {
            let k = parts[a];
            let mut shrunk = parts.to_vec();
            shrunk[a] = k - 1;
            out.add_term(
                IntegerPartition::new(shrunk).expect("parts stay valid"),
                c * Rational::from(k * (k - 1) / 2),
            );
            for b in a + 1..parts.len() {
                let mut merged: Vec<usize> = parts
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != a && i != b)
                    .map(|(_, &q)| q)
                    .collect();
                merged.push(parts[a] + parts[b] - 1);
                out.add_term(
                    IntegerPartition::new(merged).expect("parts stay valid"),
                    c * Rational::from(parts[a] * parts[b]),
                );
            }
        }
    }
    out
}
