//! Transient moments and sampling probabilities of the neutral diffusion
//! started from a fixed frequency vector.
//!
//! Every `ψ_ξ` is an eigenfunction of the generator with eigenvalue
//! `−λ_{|ξ|}`, so `E_x f(X_t) = Σ_ξ c_ξ e^{−λ_{|ξ|} t} ψ_ξ(x)` for any
//! power-sum polynomial `f = Σ_ξ c_ξ ψ_ξ`. Coefficients and `ψ_ξ(x)` are
//! exact; grouping by degree leaves one rational per distinct eigenvalue,
//! and floats appear only when the exponentials are applied.

use std::collections::BTreeMap;
use std::fmt;

use dashu::integer::IBig;

use crate::basis::Basis;
use crate::combinatorics::{multinomial_constant, IntegerPartition};
use crate::error::{Error, Result};
use crate::moments::MutationRate;
use crate::numeric::{format_float, parse_rational, to_float, Float, Rational, MIN_PRECISION};
use crate::polynomial::PowerSumPoly;
use crate::sampling::{monomial_sampler_poly, FrequencyVector};

/// Guard bits carried through the exponential sum.
const GUARD_BITS: usize = 32;
/// Bits of the working precision treated as unreliable when deciding
/// whether a cancelled sum is distinguishable from zero.
const UNDERFLOW_SLACK: usize = 8;

#[derive(Clone, PartialEq)]
pub enum Time {
    Finite(Float),
    /// Stationary limit: every exponential term is dropped.
    Infinite,
}

impl fmt::Debug for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Time::Finite(t) => write!(f, "t={}", format_float(t, t.precision().max(MIN_PRECISION))),
            Time::Infinite => f.write_str("t=inf"),
        }
    }
}

/// A time `t ≥ 0` together with `θ` and the float precision used for
/// the exponentials.
#[derive(Debug, Clone)]
pub struct TimePoint {
    t: Time,
    theta: MutationRate,
    precision: usize,
}

impl TimePoint {
    pub fn new(t: Float, theta: MutationRate, precision: usize) -> Result<Self> {
        check_precision(precision)?;
        if t < Float::ZERO {
            return Err(Error::Domain("time must be nonnegative".into()));
        }
        let t = t.with_precision(precision).value();
        Ok(Self {
            t: Time::Finite(t),
            theta,
            precision,
        })
    }

    pub fn from_rational(t: &Rational, theta: MutationRate, precision: usize) -> Result<Self> {
        check_precision(precision)?;
        Self::new(to_float(t, precision), theta, precision)
    }

    pub fn zero(theta: MutationRate, precision: usize) -> Result<Self> {
        Self::from_rational(&Rational::ZERO, theta, precision)
    }

    pub fn infinite(theta: MutationRate, precision: usize) -> Result<Self> {
        check_precision(precision)?;
        Ok(Self {
            t: Time::Infinite,
            theta,
            precision,
        })
    }

    /// Accepts `inf` or anything `parse_rational` understands.
    pub fn parse(s: &str, theta: MutationRate, precision: usize) -> Result<Self> {
        let s = s.trim();
        if matches!(s, "inf" | "infinity" | "∞") {
            Self::infinite(theta, precision)
        } else {
            Self::from_rational(&parse_rational(s)?, theta, precision)
        }
    }

    pub fn time(&self) -> &Time {
        &self.t
    }

    pub fn theta(&self) -> &MutationRate {
        &self.theta
    }

    pub fn precision(&self) -> usize {
        self.precision
    }
}

fn check_precision(precision: usize) -> Result<()> {
    if precision < MIN_PRECISION {
        return Err(Error::Resource {
            what: "precision_bits",
            value: precision,
            limit: MIN_PRECISION,
        });
    }
    Ok(())
}

/// `λ_m = m(m−1+θ)/2` for `m ≥ 2`.
pub fn eigenvalue(m: usize, theta: &MutationRate) -> Result<Rational> {
    if m < 2 {
        return Err(Error::Domain(format!(
            "eigenvalues are indexed from m = 2, got {m}"
        )));
    }
    Ok(degree_rate(m, theta))
}

fn degree_rate(m: usize, theta: &MutationRate) -> Rational {
    let m = Rational::from(m);
    &m * (&m - Rational::ONE + theta.value()) / Rational::from(2u8)
}

/// A transient value, or an interval `[0, upper]` when cancellation
/// leaves nothing distinguishable from zero at the working precision.
#[derive(Debug, Clone, PartialEq)]
pub enum TransientValue {
    Point(Float),
    Underflow { upper: Float },
}

impl TransientValue {
    pub fn point(&self) -> Option<&Float> {
        match self {
            TransientValue::Point(v) => Some(v),
            TransientValue::Underflow { .. } => None,
        }
    }

    pub fn is_underflow(&self) -> bool {
        matches!(self, TransientValue::Underflow { .. })
    }

    /// The point value, or the upper end of the interval.
    pub fn upper(&self) -> &Float {
        match self {
            TransientValue::Point(v) => v,
            TransientValue::Underflow { upper } => upper,
        }
    }
}

/// `E_x f(X_t)` for a fixed polynomial `f`, fixed `x` and fixed `θ`, as
/// `scale · (R_0 + Σ_m R_m e^{−λ_m t})`.
#[derive(Debug, Clone)]
pub struct TransientExpansion {
    theta: MutationRate,
    scale: Rational,
    constant: Rational,
    modes: Vec<Mode>,
}

#[derive(Debug, Clone)]
struct Mode {
    lambda: Rational,
    weight: Rational,
}

impl TransientExpansion {
    pub fn new(
        poly: &PowerSumPoly,
        x: &FrequencyVector,
        basis: &Basis,
        scale: Rational,
    ) -> Result<Self> {
        let coords = basis.expand(poly)?;
        let mut by_degree: BTreeMap<usize, Rational> = BTreeMap::new();
        for (label, c) in coords {
            let psi = basis.get(&label).expect("expand only returns basis labels");
            *by_degree.entry(label.size()).or_insert(Rational::ZERO) +=
                c * psi.coeffs().evaluate(x);
        }
        let constant = by_degree.remove(&0).unwrap_or(Rational::ZERO);
        let modes = by_degree
            .into_iter()
            .filter(|(_, w)| *w != Rational::ZERO)
            .map(|(m, weight)| Mode {
                lambda: degree_rate(m, basis.theta()),
                weight,
            })
            .collect();
        Ok(Self {
            theta: basis.theta().clone(),
            scale,
            constant,
            modes,
        })
    }

    /// Exact value at `t = 0`.
    pub fn initial(&self) -> Rational {
        let total = self
            .modes
            .iter()
            .fold(self.constant.clone(), |acc, m| acc + &m.weight);
        &self.scale * total
    }

    /// Exact value in the stationary limit.
    pub fn stationary(&self) -> Rational {
        &self.scale * &self.constant
    }

    /// `(λ_m, scale · R_m)` for each degree with a nonzero weight.
    pub fn modes(&self) -> Vec<(Rational, Rational)> {
        self.modes
            .iter()
            .map(|m| (m.lambda.clone(), &self.scale * &m.weight))
            .collect()
    }

    pub fn evaluate(&self, tp: &TimePoint) -> Result<TransientValue> {
        if tp.theta != self.theta {
            return Err(Error::State(format!(
                "expansion built for θ={} evaluated at θ={}",
                self.theta, tp.theta
            )));
        }
        let t = match &tp.t {
            Time::Infinite => {
                return Ok(classify(
                    to_float(&self.stationary(), tp.precision),
                    to_float(&self.stationary(), tp.precision),
                    tp.precision,
                ))
            }
            Time::Finite(t) => t,
        };
        let work = tp.precision + GUARD_BITS;
        let t = t.clone().with_precision(work).value();
        let scale = to_float(&self.scale, work);
        let constant = to_float(&self.constant, work) * scale.clone();
        let mut total = constant.clone();
        let mut magnitude = abs(&constant);
        for mode in &self.modes {
            let decay = (-(to_float(&mode.lambda, work) * t.clone())).exp();
            let term = to_float(&mode.weight, work) * scale.clone() * decay;
            magnitude += abs(&term);
            total += term;
        }
        Ok(classify(total, magnitude, tp.precision))
    }
}

fn abs(x: &Float) -> Float {
    if *x < Float::ZERO {
        -x.clone()
    } else {
        x.clone()
    }
}

fn classify(total: Float, magnitude: Float, precision: usize) -> TransientValue {
    let shift = precision.saturating_sub(UNDERFLOW_SLACK) as isize;
    let eps = Float::from_parts(IBig::ONE, -shift);
    let bound = (magnitude * eps).with_precision(precision).value();
    if abs(&total) <= bound {
        TransientValue::Underflow { upper: bound }
    } else {
        TransientValue::Point(total.with_precision(precision).value())
    }
}

/// `E_x φ_ω(X_t)`.
pub fn transient_moment(
    omega: &IntegerPartition,
    x: &FrequencyVector,
    tp: &TimePoint,
    basis: &Basis,
) -> Result<Float> {
    if !omega.is_power_sum_label() {
        return Err(Error::Domain(format!(
            "power-sum labels need parts >= 2, got {omega}"
        )));
    }
    let expansion = moment_expansion(omega, x, basis)?;
    Ok(expansion.evaluate(tp)?.upper().clone())
}

pub fn moment_expansion(
    omega: &IntegerPartition,
    x: &FrequencyVector,
    basis: &Basis,
) -> Result<TransientExpansion> {
    TransientExpansion::new(
        &PowerSumPoly::monomial(omega.clone()),
        x,
        basis,
        Rational::ONE,
    )
}

/// `P_n^θ(η) = multinomial(η) · E_x p^o_η(X_t)`.
pub fn transient_sampling_probability(
    eta: &IntegerPartition,
    x: &FrequencyVector,
    tp: &TimePoint,
    basis: &Basis,
) -> Result<TransientValue> {
    sampling_expansion(eta, x, basis)?.evaluate(tp)
}

pub fn sampling_expansion(
    eta: &IntegerPartition,
    x: &FrequencyVector,
    basis: &Basis,
) -> Result<TransientExpansion> {
    if eta.is_empty() {
        return Err(Error::EmptyInput("sample size must be positive".into()));
    }
    TransientExpansion::new(
        &monomial_sampler_poly(eta),
        x,
        basis,
        multinomial_constant(eta),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis;
    use crate::combinatorics::enumerate_partitions;
    use crate::moments::{esf_monomial_moment, power_sum_moment};
    use crate::numeric::{ratio, DEFAULT_PRECISION};
    use crate::sampling::sampling_probability;

    fn p(parts: &[usize]) -> IntegerPartition {
        IntegerPartition::new(parts.to_vec()).unwrap()
    }

    fn x0() -> FrequencyVector {
        FrequencyVector::new(vec![ratio(1, 2), ratio(1, 3), ratio(1, 6)]).unwrap()
    }

    fn close(a: &Float, b: &Float, bits: isize) -> bool {
        abs(&(a.clone() - b.clone())) <= Float::from_parts(IBig::ONE, -bits)
    }

    #[test]
    fn eigenvalue_examples() {
        let one = MutationRate::from_int(1);
        assert_eq!(eigenvalue(2, &one).unwrap(), Rational::from(2u8));
        let theta = MutationRate::new(ratio(7, 3)).unwrap();
        assert_eq!(
            eigenvalue(2, &theta).unwrap(),
            Rational::ONE + theta.value()
        );
        assert_eq!(
            eigenvalue(3, &MutationRate::from_int(3)).unwrap(),
            ratio(15, 2)
        );
        assert!(matches!(eigenvalue(1, &one), Err(Error::Domain(_))));
        assert!(matches!(eigenvalue(0, &one), Err(Error::Domain(_))));
    }

    #[test]
    fn time_point_validation() {
        let one = MutationRate::from_int(1);
        assert!(TimePoint::from_rational(&ratio(-1, 2), one.clone(), 256).is_err());
        assert!(matches!(
            TimePoint::zero(one.clone(), 32),
            Err(Error::Resource { .. })
        ));
        assert!(matches!(
            TimePoint::parse("inf", one.clone(), 256).unwrap().time(),
            Time::Infinite
        ));
        assert!(TimePoint::parse("0.05", one, 256).is_ok());
    }

    #[test]
    fn closed_form_for_phi2() {
        let one = MutationRate::from_int(1);
        let basis = build_basis(2, &one).unwrap();
        let half_ln2 = Float::from(2u8).with_precision(256).value().ln() / Float::from(2u8);
        let tp = TimePoint::new(half_ln2, one, 256).unwrap();
        let m = transient_moment(&p(&[2]), &FrequencyVector::point_mass(), &tp, &basis).unwrap();
        assert!(close(&m, &to_float(&ratio(3, 4), 256), 250));
        let s =
            transient_sampling_probability(&p(&[2]), &FrequencyVector::point_mass(), &tp, &basis)
                .unwrap();
        assert!(close(s.point().unwrap(), &to_float(&ratio(3, 4), 256), 250));
    }

    #[test]
    fn phi2_closed_form_at_other_times() {
        let theta = MutationRate::new(ratio(5, 2)).unwrap();
        let basis = build_basis(2, &theta).unwrap();
        let x = x0();
        let mean = Rational::ONE / (Rational::ONE + theta.value());
        let phi2 = ratio(7, 18);
        for t in [ratio(1, 100), ratio(1, 3), ratio(4, 1)] {
            let tp = TimePoint::from_rational(&t, theta.clone(), 256).unwrap();
            let decay =
                (-(to_float(&(Rational::ONE + theta.value()), 300) * to_float(&t, 300))).exp();
            let expected = to_float(&mean, 300) + decay * to_float(&(&phi2 - &mean), 300);
            let got = transient_moment(&p(&[2]), &x, &tp, &basis).unwrap();
            assert!(close(&got, &expected, 240));
        }
    }

    #[test]
    fn missing_basis_labels_are_a_state_error() {
        let one = MutationRate::from_int(1);
        let basis = build_basis(2, &one).unwrap();
        let tp = TimePoint::zero(one, 256).unwrap();
        assert!(matches!(
            transient_moment(&p(&[3]), &x0(), &tp, &basis),
            Err(Error::State(_))
        ));
        let other = TimePoint::zero(MutationRate::from_int(2), 256).unwrap();
        assert!(matches!(
            transient_moment(&p(&[2]), &x0(), &other, &basis),
            Err(Error::State(_))
        ));
    }

    #[test]
    fn degenerations_at_zero_and_infinity() {
        for theta in [1u64, 10].map(MutationRate::from_int) {
            let basis = build_basis(5, &theta).unwrap();
            let zero = TimePoint::zero(theta.clone(), DEFAULT_PRECISION).unwrap();
            let inf = TimePoint::infinite(theta.clone(), DEFAULT_PRECISION).unwrap();
            let full = x0();
            let dusty = FrequencyVector::new(vec![ratio(1, 2), ratio(1, 4)]).unwrap();
            for n in 1..=5 {
                for eta in enumerate_partitions(n).unwrap() {
                    let esf = multinomial_constant(&eta) * esf_monomial_moment(&eta, &theta);
                    for x in [&full, &dusty] {
                        let exp = sampling_expansion(&eta, x, &basis).unwrap();
                        assert_eq!(exp.initial(), sampling_probability(&eta, x));
                        assert_eq!(exp.stationary(), esf);
                        let exact = to_float(&sampling_probability(&eta, x), 256);
                        match exp.evaluate(&zero).unwrap() {
                            TransientValue::Point(v) => assert!(close(&v, &exact, 200)),
                            TransientValue::Underflow { upper } => {
                                assert!(exact <= upper && close(&upper, &Float::ZERO, 200))
                            }
                        }
                        let at_inf = exp.evaluate(&inf).unwrap();
                        assert!(close(at_inf.upper(), &to_float(&esf, 256), 250));
                    }
                }
            }
        }
    }

    #[test]
    fn stationary_moment_is_the_mean() {
        let theta = MutationRate::from_int(3);
        let basis = build_basis(4, &theta).unwrap();
        for omega in [p(&[2]), p(&[3]), p(&[2, 2]), p(&[4])] {
            let exp = moment_expansion(&omega, &x0(), &basis).unwrap();
            assert_eq!(exp.stationary(), power_sum_moment(&omega, &theta).unwrap());
            assert_eq!(exp.initial(), PowerSumPoly::monomial(omega).evaluate(&x0()));
        }
    }

    #[test]
    fn probabilities_sum_to_one_at_every_time() {
        for theta in [1u64, 10].map(MutationRate::from_int) {
            let basis = build_basis(5, &theta).unwrap();
            for t in [ratio(1, 100), ratio(1, 10), ratio(1, 1), ratio(10, 1)] {
                let tp = TimePoint::from_rational(&t, theta.clone(), 256).unwrap();
                for n in 1..=5 {
                    let mut total = Float::ZERO;
                    for eta in enumerate_partitions(n).unwrap() {
                        let v = transient_sampling_probability(&eta, &x0(), &tp, &basis).unwrap();
                        if let Some(v) = v.point() {
                            assert!(*v >= Float::ZERO);
                            total += v.clone();
                        }
                    }
                    assert!(close(&total, &Float::ONE, 240), "n={n}");
                }
            }
        }
    }

    #[test]
    fn all_singletons_grow_toward_stationarity() {
        let theta = MutationRate::from_int(100);
        let basis = build_basis(4, &theta).unwrap();
        let grid = [0u64, 1, 2, 5, 10, 20, 50, 100, 1000].map(|k| ratio(k as i64, 10_000));
        for n in 2..=4 {
            let eta = IntegerPartition::singletons(n);
            let exp = sampling_expansion(&eta, &x0(), &basis).unwrap();
            let values: Vec<Float> = grid
                .iter()
                .map(|t| {
                    let tp = TimePoint::from_rational(t, theta.clone(), 256).unwrap();
                    exp.evaluate(&tp).unwrap().upper().clone()
                })
                .collect();
            assert!(values.windows(2).all(|w| w[0] <= w[1]), "n={n}");
            assert!(*values.last().unwrap() <= to_float(&exp.stationary(), 256));
        }
    }

    #[test]
    fn exact_zero_is_reported_as_an_interval() {
        let one = MutationRate::from_int(1);
        let basis = build_basis(2, &one).unwrap();
        let tp = TimePoint::zero(one, 256).unwrap();
        let v = transient_sampling_probability(
            &p(&[1, 1]),
            &FrequencyVector::point_mass(),
            &tp,
            &basis,
        )
        .unwrap();
        assert!(v.is_underflow());
        assert!(close(v.upper(), &Float::ZERO, 240));
    }
}
