//! Large-`θ` predictions and the scans that compare them against exact
//! finite-`θ` values.

use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::basis::{build_basis, inner_product, unnormalized_family};
use crate::combinatorics::IntegerPartition;
use crate::error::{Error, Result};
use crate::moments::{power_sum_moment, MutationRate};
use crate::numeric::{factorial, format_rational, pow, to_f64, to_float, Float, Rational};
use crate::polynomial::PowerSumPoly;
use crate::sampling::FrequencyVector;
use crate::transient::{sampling_expansion, transient_moment, TimePoint, TransientValue};

/// Limit of `θ t(θ)` as `θ → ∞`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ThetaTLimit {
    Zero,
    Finite(Rational),
    Infinite,
}

/// Limit `k` of `θ t(θ) / log θ`. `Zero` is the sentinel for scales with
/// `θ t → ∞` but `θ t / log θ → 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LogRatio {
    Finite(Rational),
    Infinite,
    Zero,
}

impl LogRatio {
    /// `1/2`, `inf` or `0`.
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(LogRatio::Infinite),
            "0" => Ok(LogRatio::Zero),
            other => {
                let k = crate::numeric::parse_rational(other)?;
                if k <= Rational::ZERO {
                    return Err(Error::Domain("k must be positive".into()));
                }
                Ok(LogRatio::Finite(k))
            }
        }
    }
}

impl fmt::Display for LogRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogRatio::Finite(k) => f.write_str(&format_rational(k)),
            LogRatio::Infinite => f.write_str("inf"),
            LogRatio::Zero => f.write_str("0"),
        }
    }
}

pub type TimeFn = Arc<dyn Fn(&Float) -> Float + Send + Sync>;

#[derive(Clone)]
pub enum RegimeKind {
    /// `t = c/θ`
    Proportional(Rational),
    /// `t = k log θ / θ`
    Logarithmic(Rational),
    /// `t = log θ / (θ log log θ)`
    Sublog,
    /// Any other scale. Limits must be declared to be classifiable.
    Custom {
        name: String,
        t: TimeFn,
        theta_t: Option<ThetaTLimit>,
        log_ratio: Option<LogRatio>,
    },
}

/// A small-time scale `t(θ)`.
#[derive(Clone)]
pub struct RegimeSpec {
    kind: RegimeKind,
}

impl fmt::Debug for RegimeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RegimeSpec({self})")
    }
}

impl fmt::Display for RegimeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            RegimeKind::Proportional(c) => write!(f, "t=({})/θ", format_rational(c)),
            RegimeKind::Logarithmic(k) => write!(f, "t=({})logθ/θ", format_rational(k)),
            RegimeKind::Sublog => f.write_str("t=logθ/(θ·loglogθ)"),
            RegimeKind::Custom { name, .. } => write!(f, "custom:{name}"),
        }
    }
}

impl RegimeSpec {
    pub fn proportional(c: Rational) -> Result<Self> {
        if c <= Rational::ZERO {
            return Err(Error::Domain("c must be positive".into()));
        }
        Ok(Self {
            kind: RegimeKind::Proportional(c),
        })
    }

    pub fn logarithmic(k: Rational) -> Result<Self> {
        if k <= Rational::ZERO {
            return Err(Error::Domain("k must be positive".into()));
        }
        Ok(Self {
            kind: RegimeKind::Logarithmic(k),
        })
    }

    pub fn sublog() -> Self {
        Self {
            kind: RegimeKind::Sublog,
        }
    }

    pub fn custom(
        name: impl Into<String>,
        t: TimeFn,
        theta_t: Option<ThetaTLimit>,
        log_ratio: Option<LogRatio>,
    ) -> Self {
        Self {
            kind: RegimeKind::Custom {
                name: name.into(),
                t,
                theta_t,
                log_ratio,
            },
        }
    }

    /// `t = θ^{−1/2}`: `θt/logθ → ∞`.
    pub fn inverse_sqrt() -> Self {
        Self::custom(
            "theta^-1/2",
            Arc::new(|theta: &Float| (-(theta.clone().ln()) / Float::from(2u8)).exp()),
            Some(ThetaTLimit::Infinite),
            Some(LogRatio::Infinite),
        )
    }

    /// `t = θ^{−2}`: `θt → 0`.
    pub fn inverse_square() -> Self {
        Self::custom(
            "theta^-2",
            Arc::new(|theta: &Float| Float::ONE / (theta.clone() * theta.clone())),
            Some(ThetaTLimit::Zero),
            None,
        )
    }

    /// The scale whose `θt/logθ` limit is `k`.
    pub fn for_log_ratio(k: &LogRatio) -> Self {
        match k {
            LogRatio::Finite(k) => Self {
                kind: RegimeKind::Logarithmic(k.clone()),
            },
            LogRatio::Infinite => Self::inverse_sqrt(),
            LogRatio::Zero => Self::sublog(),
        }
    }

    /// `c:1`, `k:1/2`, `k:inf`, `sublog` or `zero`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "sublog" => return Ok(Self::sublog()),
            "zero" => return Ok(Self::inverse_square()),
            "k:inf" => return Ok(Self::inverse_sqrt()),
            _ => {}
        }
        match s.split_once(':') {
            Some(("c", v)) => Self::proportional(crate::numeric::parse_rational(v)?),
            Some(("k", v)) => Self::logarithmic(crate::numeric::parse_rational(v)?),
            _ => Err(Error::Parse(format!(
                "regime must be c:<rational>, k:<rational>, k:inf, sublog or zero; got {s:?}"
            ))),
        }
    }

    pub fn kind(&self) -> &RegimeKind {
        &self.kind
    }

    pub fn time_at(&self, theta: &MutationRate, precision: usize) -> Result<Float> {
        let th = to_float(theta.value(), precision);
        Ok(match &self.kind {
            RegimeKind::Proportional(c) => to_float(c, precision) / th,
            RegimeKind::Logarithmic(k) => to_float(k, precision) * th.clone().ln() / th,
            RegimeKind::Sublog => {
                let ln = th.clone().ln();
                let lnln = ln.clone().ln();
                if lnln <= Float::ZERO {
                    return Err(Error::Domain(format!(
                        "log log θ must be positive, got θ={theta}"
                    )));
                }
                ln / (th * lnln)
            }
            RegimeKind::Custom { t, .. } => t(&th),
        })
    }

    pub fn time_point(&self, theta: &MutationRate, precision: usize) -> Result<TimePoint> {
        TimePoint::new(self.time_at(theta, precision)?, theta.clone(), precision)
    }

    pub fn theta_t_limit(&self) -> Result<ThetaTLimit> {
        match &self.kind {
            RegimeKind::Proportional(c) => Ok(ThetaTLimit::Finite(c.clone())),
            RegimeKind::Logarithmic(_) | RegimeKind::Sublog => Ok(ThetaTLimit::Infinite),
            RegimeKind::Custom { theta_t, name, .. } => theta_t
                .clone()
                .ok_or_else(|| Error::Classification(format!("no θt limit declared for {name}"))),
        }
    }

    pub fn log_ratio(&self) -> Result<LogRatio> {
        match &self.kind {
            RegimeKind::Logarithmic(k) => Ok(LogRatio::Finite(k.clone())),
            RegimeKind::Sublog => Ok(LogRatio::Zero),
            RegimeKind::Proportional(_) => Err(Error::Classification(
                "θt stays bounded, so there is no logarithmic LDP regime".into(),
            )),
            RegimeKind::Custom {
                log_ratio, name, ..
            } => log_ratio.clone().ok_or_else(|| {
                Error::Classification(format!("no θt/logθ limit declared for {name}"))
            }),
        }
    }
}

/// Weak limit of `X_{t(θ)}` as `θ → ∞`.
#[derive(Debug, Clone, PartialEq)]
pub enum WeakLimit {
    /// `(0, 0, …)`: all mass in dust.
    PureDust,
    /// `e^{−c/2} x`, the rest of the mass in dust.
    Scaled {
        x: FrequencyVector,
        c: Rational,
    },
    Identity(FrequencyVector),
}

impl WeakLimit {
    /// `φ_ω` at the limit point. Homogeneity gives `e^{−c|ω|/2} φ_ω(x)` in
    /// the scaled case.
    pub fn predicted_moment(&self, omega: &IntegerPartition, precision: usize) -> Float {
        let phi = PowerSumPoly::monomial(omega.clone());
        match self {
            WeakLimit::PureDust => {
                to_float(&phi.evaluate(&FrequencyVector::pure_dust()), precision)
            }
            WeakLimit::Identity(x) => to_float(&phi.evaluate(x), precision),
            WeakLimit::Scaled { x, c } => {
                let factor = to_float(
                    &(c * Rational::from(omega.size()) / Rational::from(2u8)),
                    precision,
                );
                (-factor).exp() * to_float(&phi.evaluate(x), precision)
            }
        }
    }

    /// Atoms of the limit point.
    pub fn atoms(&self, precision: usize) -> Vec<Float> {
        match self {
            WeakLimit::PureDust => Vec::new(),
            WeakLimit::Identity(x) => x.atoms().iter().map(|a| to_float(a, precision)).collect(),
            WeakLimit::Scaled { x, c } => {
                let factor = (-to_float(c, precision) / Float::from(2u8)).exp();
                x.atoms()
                    .iter()
                    .map(|a| to_float(a, precision) * factor.clone())
                    .collect()
            }
        }
    }
}

pub fn weak_limit_point(x: &FrequencyVector, regime: &RegimeSpec) -> Result<WeakLimit> {
    Ok(match regime.theta_t_limit()? {
        ThetaTLimit::Infinite => WeakLimit::PureDust,
        ThetaTLimit::Zero => WeakLimit::Identity(x.clone()),
        ThetaTLimit::Finite(c) => WeakLimit::Scaled { x: x.clone(), c },
    })
}

#[derive(Debug, Clone)]
pub struct MomentLimitRow {
    pub theta: Rational,
    pub value: Float,
    pub predicted: Float,
    pub error: Float,
}

fn require_increasing(grid: &[Rational]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptyInput("θ grid is empty".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("θ grid must be increasing".into()));
    }
    Ok(())
}

/// `E_x φ_ω(X_{t(θ)})` against its weak-limit prediction along a `θ` grid.
pub fn moment_limit_scan(
    omega: &IntegerPartition,
    x: &FrequencyVector,
    regime: &RegimeSpec,
    theta_grid: &[Rational],
    precision: usize,
) -> Result<Vec<MomentLimitRow>> {
    require_increasing(theta_grid)?;
    let predicted = weak_limit_point(x, regime)?.predicted_moment(omega, precision);
    theta_grid
        .iter()
        .map(|theta| {
            let theta_rate = MutationRate::new(theta.clone())?;
            let basis = build_basis(omega.size(), &theta_rate)?;
            let tp = regime.time_point(&theta_rate, precision)?;
            let value = transient_moment(omega, x, &tp, &basis)?;
            let diff = value.clone() - predicted.clone();
            let error = if diff < Float::ZERO { -diff } else { diff };
            Ok(MomentLimitRow {
                theta: theta.clone(),
                value,
                predicted: predicted.clone(),
                error,
            })
        })
        .collect()
}

fn require_label(eta: &IntegerPartition) -> Result<()> {
    if eta.is_power_sum_label() {
        Ok(())
    } else {
        Err(Error::Domain(format!("parts must be >= 2, got {eta}")))
    }
}

fn factorial_product(eta: &IntegerPartition) -> Rational {
    eta.parts().iter().fold(Rational::ONE, |acc, &p| {
        acc * Rational::from(factorial(p - 1))
    })
}

/// Predicted `θ`-order of `⟨φ_η, 1⟩` (empty `ξ`) or `⟨φ_η, ψ_ξ⟩`.
pub fn lemma41_exponent(eta: &IntegerPartition, xi: &IntegerPartition) -> usize {
    let base = eta.size() - eta.len();
    if xi.is_empty() {
        base
    } else {
        base + xi.size() - xi.len() + 1
    }
}

/// Leading term of `⟨φ_η, 1⟩_θ` (empty `ξ`) or `⟨φ_η, ψ_ξ⟩_θ` at `θ`.
pub fn lemma41_leading_term(
    eta: &IntegerPartition,
    xi: &IntegerPartition,
    theta: &MutationRate,
) -> Result<Rational> {
    require_label(eta)?;
    if eta.is_empty() {
        return Err(Error::EmptyInput("η must be nonempty".into()));
    }
    require_label(xi)?;
    let order = pow(theta.value(), lemma41_exponent(eta, xi));
    if xi.is_empty() {
        return Ok(factorial_product(eta) / order);
    }
    let mut bracket = Rational::ZERO;
    for &a in eta.parts() {
        for &b in xi.parts() {
            bracket += Rational::from(factorial(a + b - 1))
                / Rational::from(factorial(a - 1) * factorial(b - 1));
        }
    }
    bracket -= Rational::from(eta.size() * xi.size());
    Ok(bracket * factorial_product(eta) * factorial_product(xi) / order)
}

/// Which `ψ_ξ` an inner product `⟨φ_η, ψ_ξ⟩` refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PsiFamily {
    /// The orthogonal basis from `build_basis`.
    #[default]
    Orthogonal,
    /// The recursion without division by `‖ψ_ξ‖²`.
    Unnormalized,
}

impl PsiFamily {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "orthogonal" => Ok(PsiFamily::Orthogonal),
            "unnormalized" => Ok(PsiFamily::Unnormalized),
            other => Err(Error::Parse(format!(
                "family must be orthogonal or unnormalized, got {other:?}"
            ))),
        }
    }
}

/// Exact `⟨φ_η, 1⟩_θ` or `⟨φ_η, ψ_ξ⟩_θ`.
pub fn lemma41_inner_product(
    eta: &IntegerPartition,
    xi: &IntegerPartition,
    theta: &MutationRate,
    family: PsiFamily,
) -> Result<Rational> {
    require_label(eta)?;
    require_label(xi)?;
    if xi.is_empty() {
        return power_sum_moment(eta, theta);
    }
    let phi = PowerSumPoly::monomial(eta.clone());
    let psi = match family {
        PsiFamily::Orthogonal => build_basis(xi.size(), theta)?
            .get(xi)
            .expect("ξ is a label of the basis")
            .coeffs()
            .clone(),
        PsiFamily::Unnormalized => {
            unnormalized_family(xi.size(), theta)?
                .into_iter()
                .find(|(label, _)| label == xi)
                .expect("ξ is a label of the family")
                .1
        }
    };
    inner_product(&phi, &psi, theta)
}

#[derive(Debug, Clone)]
pub struct OrderRow {
    pub theta: Rational,
    pub value: Rational,
    pub value_doubled: Rational,
    /// `−log₂(v(2θ)/v(θ))`, absent when the two values differ in sign.
    pub exponent: Option<f64>,
    pub predicted_exponent: usize,
    /// `v(θ)` over the predicted leading term at `θ`.
    pub constant_ratio: Option<f64>,
}

/// Measured `θ`-exponents over `(θ, 2θ)` pairs.
pub fn lemma41_order_scan(
    eta: &IntegerPartition,
    xi: &IntegerPartition,
    thetas: &[Rational],
    family: PsiFamily,
) -> Result<Vec<OrderRow>> {
    let predicted_exponent = lemma41_exponent(eta, xi);
    thetas
        .iter()
        .map(|theta| {
            let th = MutationRate::new(theta.clone())?;
            let th2 = MutationRate::new(theta * Rational::from(2u8))?;
            let value = lemma41_inner_product(eta, xi, &th, family)?;
            let value_doubled = lemma41_inner_product(eta, xi, &th2, family)?;
            let exponent = if value == Rational::ZERO {
                None
            } else {
                let r = to_f64(&(&value_doubled / &value));
                (r > 0.0).then(|| -r.log2())
            };
            let leading = lemma41_leading_term(eta, xi, &th)?;
            let constant_ratio = (leading != Rational::ZERO).then(|| to_f64(&(&value / &leading)));
            Ok(OrderRow {
                theta: theta.clone(),
                value,
                value_doubled,
                exponent,
                predicted_exponent,
                constant_ratio,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Speed {
    LogTheta,
    ThetaT,
}

impl Speed {
    pub fn as_str(self) -> &'static str {
        match self {
            Speed::LogTheta => "logθ",
            Speed::ThetaT => "θt",
        }
    }
}

impl Serialize for Speed {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateFunctionResult {
    pub speed: Speed,
    pub value: Rational,
}

impl Serialize for RateFunctionResult {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("RateFunctionResult", 2)?;
        s.serialize_field("speed", &self.speed)?;
        s.serialize_field("I", &format_rational(&self.value))?;
        s.end()
    }
}

/// Rate function of the sampling law at `t(θ)` with `θt/logθ → k`.
pub fn rate_function(n: usize, eta: &IntegerPartition, k: &LogRatio) -> Result<RateFunctionResult> {
    if eta.size() != n {
        return Err(Error::Domain(format!("{eta} is not a partition of {n}")));
    }
    let n_r = Rational::from(n);
    let l = Rational::from(eta.len());
    let a1 = Rational::from(eta.singleton_count());
    let log_speed = |value| RateFunctionResult {
        speed: Speed::LogTheta,
        value,
    };
    if eta.singleton_count() == n {
        let speed = if *k == LogRatio::Zero {
            Speed::ThetaT
        } else {
            Speed::LogTheta
        };
        return Ok(RateFunctionResult {
            speed,
            value: Rational::ZERO,
        });
    }
    let two = Rational::from(2u8);
    Ok(match k {
        LogRatio::Zero => RateFunctionResult {
            speed: Speed::ThetaT,
            value: (n_r - a1) / two,
        },
        LogRatio::Infinite => log_speed(n_r - l),
        LogRatio::Finite(k) => {
            if *k <= Rational::ZERO {
                return Err(Error::Domain("k must be positive".into()));
            }
            if *k >= two {
                log_speed(n_r - l)
            } else {
                let density = (&n_r - &a1) / (&l - &a1);
                let threshold = &two / (&two - k);
                if density > threshold {
                    log_speed((n_r - a1) * k / two)
                } else {
                    log_speed(n_r - l)
                }
            }
        }
    })
}

#[derive(Debug, Clone)]
pub struct LdpRow {
    pub theta: Rational,
    pub probability: TransientValue,
    /// `−log P / speed`; absent on underflow.
    pub slope: Option<Float>,
    /// `|s − I|`
    pub gap: Option<Float>,
    /// `s(θ_i) − s(θ_{i−1})`
    pub difference: Option<Float>,
}

impl LdpRow {
    pub fn underflow(&self) -> bool {
        self.probability.is_underflow()
    }
}

/// `s(θ) = −log P_n^θ(η) / speed` along a `θ` grid, with `t(θ)` chosen so
/// that `θt/logθ → k`.
pub fn ldp_slope_scan(
    n: usize,
    eta: &IntegerPartition,
    k: &LogRatio,
    x: &FrequencyVector,
    theta_grid: &[Rational],
    precision: usize,
) -> Result<Vec<LdpRow>> {
    require_increasing(theta_grid)?;
    let rate = rate_function(n, eta, k)?;
    let target = to_float(&rate.value, precision);
    let regime = RegimeSpec::for_log_ratio(k);
    let mut rows: Vec<LdpRow> = Vec::with_capacity(theta_grid.len());
    for theta in theta_grid {
        let theta_rate = MutationRate::new(theta.clone())?;
        let basis = build_basis(n, &theta_rate)?;
        let tp = regime.time_point(&theta_rate, precision)?;
        let probability = sampling_expansion(eta, x, &basis)?.evaluate(&tp)?;
        let slope = probability.point().map(|p| {
            let speed = match rate.speed {
                Speed::LogTheta => to_float(theta, precision).ln(),
                Speed::ThetaT => {
                    let t = regime
                        .time_at(&theta_rate, precision)
                        .expect("already evaluated");
                    to_float(theta, precision) * t
                }
            };
            -(p.clone().ln()) / speed
        });
        let gap = slope.as_ref().map(|s| {
            let d = s.clone() - target.clone();
            if d < Float::ZERO {
                -d
            } else {
                d
            }
        });
        let difference = match (&slope, rows.last().and_then(|r| r.slope.as_ref())) {
            (Some(s), Some(prev)) => Some(s.clone() - prev.clone()),
            _ => None,
        };
        rows.push(LdpRow {
            theta: theta.clone(),
            probability,
            slope,
            gap,
            difference,
        });
    }
    Ok(rows)
}
