//! Python bindings. Exact rationals cross the boundary as
//! `fractions.Fraction`; inputs may be `int`, `str` or `Fraction`.
//! Multiprecision floats are returned as decimal strings.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList, PyString, PyTuple};

use neutral_sampler::asymptotics::{rate_function as core_rate_function, LogRatio};
use neutral_sampler::basis::{build_basis, Basis as CoreBasis};
use neutral_sampler::combinatorics::IntegerPartition;
use neutral_sampler::config::parse_frequency_vector;
use neutral_sampler::error::Error;
use neutral_sampler::moments::{esf_monomial_moment, mixed_power_sum_moment, MutationRate};
use neutral_sampler::numeric::{
    format_float, format_rational, parse_rational, Rational, DEFAULT_PRECISION,
};
use neutral_sampler::sampling::{
    consistency_check as core_consistency_check, sampling_distribution as core_distribution,
    sampling_probability as core_sampling_probability, FrequencyVector as CoreVector,
};
use neutral_sampler::transient::{sampling_expansion, TimePoint, TransientValue};

create_exception!(neutral_sampler_py, NeutralSamplerError, PyException);
create_exception!(neutral_sampler_py, ResourceLimitError, NeutralSamplerError);

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Parse(_) => PyValueError::new_err(e.to_string()),
        Error::Resource { .. } => ResourceLimitError::new_err(e.to_string()),
        other => NeutralSamplerError::new_err(other.to_string()),
    }
}

fn fraction<'py>(py: Python<'py>, r: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?
        .getattr("Fraction")?
        .call1((format_rational(r),))
}

fn rational_arg(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    parse_rational(&obj.str()?.to_cow()?).map_err(to_py_err)
}

fn theta_arg(obj: &Bound<'_, PyAny>) -> PyResult<MutationRate> {
    MutationRate::new(rational_arg(obj)?).map_err(to_py_err)
}

/// Accepts a `Partition`, a string such as `"2,1"`, or a sequence of ints.
fn partition_arg(obj: &Bound<'_, PyAny>) -> PyResult<IntegerPartition> {
    if let Ok(p) = obj.extract::<PyRef<'_, Partition>>() {
        return Ok(p.inner.clone());
    }
    if let Ok(s) = obj.cast::<PyString>() {
        return IntegerPartition::parse(&s.to_cow()?).map_err(to_py_err);
    }
    let parts: Vec<usize> = obj.extract()?;
    IntegerPartition::new(parts).map_err(to_py_err)
}

fn vector_arg(obj: &Bound<'_, PyAny>) -> PyResult<CoreVector> {
    if let Ok(v) = obj.extract::<PyRef<'_, FrequencyVector>>() {
        return Ok(v.inner.clone());
    }
    let atoms = obj
        .try_iter()?
        .map(|a| rational_arg(&a?))
        .collect::<PyResult<Vec<_>>>()?;
    CoreVector::new(atoms).map_err(to_py_err)
}

/// Integer partition, parts in nonincreasing order.
#[pyclass(
    module = "neutral_sampler_py",
    frozen,
    eq,
    ord,
    hash,
    skip_from_py_object
)]
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Partition {
    inner: IntegerPartition,
}

#[pymethods]
impl Partition {
    #[new]
    fn new(parts: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(Self {
            inner: partition_arg(parts)?,
        })
    }

    #[getter]
    fn parts(&self) -> Vec<usize> {
        self.inner.parts().to_vec()
    }

    #[getter]
    fn size(&self) -> usize {
        self.inner.size()
    }

    /// `α_j` = number of parts equal to `j`.
    #[getter]
    fn alpha(&self) -> Vec<usize> {
        self.inner.alpha().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Partition({:?})", self.inner.parts())
    }
}

/// Finitely many atoms plus a dust mass `1 − Σ atoms`.
#[pyclass(module = "neutral_sampler_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct FrequencyVector {
    inner: CoreVector,
}

#[pymethods]
impl FrequencyVector {
    #[new]
    #[pyo3(signature = (atoms, dust = None))]
    fn new(atoms: &Bound<'_, PyAny>, dust: Option<&Bound<'_, PyAny>>) -> PyResult<Self> {
        let inner = match dust {
            None => vector_arg(atoms)?,
            Some(d) => {
                let atoms = atoms
                    .try_iter()?
                    .map(|a| Ok(format_rational(&rational_arg(&a?)?)))
                    .collect::<PyResult<Vec<_>>>()?
                    .join(",");
                parse_frequency_vector(&atoms, &d.str()?.to_cow()?).map_err(to_py_err)?
            }
        };
        Ok(Self { inner })
    }

    #[getter]
    fn atoms<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyAny>>> {
        self.inner.atoms().iter().map(|a| fraction(py, a)).collect()
    }

    #[getter]
    fn dust<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, self.inner.dust())
    }

    fn __repr__(&self) -> String {
        let atoms: Vec<String> = self.inner.atoms().iter().map(format_rational).collect();
        format!(
            "FrequencyVector([{}], dust={})",
            atoms.join(", "),
            format_rational(self.inner.dust())
        )
    }
}

/// Orthogonal polynomial basis `{ψ_ξ : |ξ| ≤ max_size}` under PD(θ).
#[pyclass(module = "neutral_sampler_py", frozen)]
struct Basis {
    inner: CoreBasis,
}

#[pymethods]
impl Basis {
    #[new]
    fn new(max_size: usize, theta: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(Self {
            inner: build_basis(max_size, &theta_arg(theta)?).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn theta<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, self.inner.theta().value())
    }

    #[getter]
    fn max_size(&self) -> usize {
        self.inner.max_size()
    }

    fn labels(&self) -> Vec<Partition> {
        self.inner
            .elements()
            .iter()
            .map(|e| Partition {
                inner: e.label().clone(),
            })
            .collect()
    }

    /// `‖ψ_ξ‖²`.
    fn norm2<'py>(
        &self,
        py: Python<'py>,
        label: &Bound<'py, PyAny>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let label = partition_arg(label)?;
        let e = self
            .inner
            .get(&label)
            .ok_or_else(|| PyValueError::new_err(format!("no basis element {label}")))?;
        fraction(py, e.norm2())
    }

    /// Power-sum coefficients of `ψ_ξ`, keyed by label tuple.
    fn coefficients<'py>(
        &self,
        py: Python<'py>,
        label: &Bound<'py, PyAny>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let label = partition_arg(label)?;
        let e = self
            .inner
            .get(&label)
            .ok_or_else(|| PyValueError::new_err(format!("no basis element {label}")))?;
        let out = PyDict::new(py);
        for (l, c) in e.coeffs().terms() {
            out.set_item(PyTuple::new(py, l.parts())?, fraction(py, c)?)?;
        }
        Ok(out)
    }

    /// `ψ_ξ(x)`.
    fn evaluate<'py>(
        &self,
        py: Python<'py>,
        label: &Bound<'py, PyAny>,
        x: &Bound<'py, PyAny>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let label = partition_arg(label)?;
        let x = vector_arg(x)?;
        let e = self
            .inner
            .get(&label)
            .ok_or_else(|| PyValueError::new_err(format!("no basis element {label}")))?;
        fraction(py, &e.coeffs().evaluate(&x))
    }

    fn __len__(&self) -> usize {
        self.inner.elements().len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Basis(max_size={}, theta={}, elements={})",
            self.inner.max_size(),
            self.inner.theta(),
            self.inner.elements().len()
        )
    }
}

/// Exact `P(η)` for a sample drawn from `x`.
#[pyfunction]
fn sampling_probability<'py>(
    py: Python<'py>,
    eta: &Bound<'py, PyAny>,
    x: &Bound<'py, PyAny>,
) -> PyResult<Bound<'py, PyAny>> {
    let p = core_sampling_probability(&partition_arg(eta)?, &vector_arg(x)?);
    fraction(py, &p)
}

/// `{Partition: Fraction}` over all partitions of `n`.
#[pyfunction]
fn sampling_distribution<'py>(
    py: Python<'py>,
    n: usize,
    x: &Bound<'py, PyAny>,
) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    for (eta, p) in core_distribution(n, &vector_arg(x)?).map_err(to_py_err)? {
        out.set_item(Partition { inner: eta }, fraction(py, &p)?)?;
    }
    Ok(out)
}

/// Whether the `n` and `n − 1` sample laws from `x` are consistent.
#[pyfunction]
fn consistency_check(n: usize, x: &Bound<'_, PyAny>) -> PyResult<bool> {
    Ok(core_consistency_check(n, &vector_arg(x)?)
        .map_err(to_py_err)?
        .consistent)
}

/// `E[φ_η φ_ξ]` under PD(θ); labels need parts ≥ 2.
#[pyfunction]
#[pyo3(signature = (eta, theta, xi = None))]
fn moment<'py>(
    py: Python<'py>,
    eta: &Bound<'py, PyAny>,
    theta: &Bound<'py, PyAny>,
    xi: Option<&Bound<'py, PyAny>>,
) -> PyResult<Bound<'py, PyAny>> {
    let xi = match xi {
        Some(xi) => partition_arg(xi)?,
        None => IntegerPartition::empty(),
    };
    let m =
        mixed_power_sum_moment(&partition_arg(eta)?, &xi, &theta_arg(theta)?).map_err(to_py_err)?;
    fraction(py, &m)
}

/// Ewens sampling formula probability of `η` under PD(θ).
#[pyfunction]
fn ewens_probability<'py>(
    py: Python<'py>,
    eta: &Bound<'py, PyAny>,
    theta: &Bound<'py, PyAny>,
) -> PyResult<Bound<'py, PyAny>> {
    let eta = partition_arg(eta)?;
    let p = neutral_sampler::combinatorics::multinomial_constant(&eta)
        * esf_monomial_moment(&eta, &theta_arg(theta)?);
    fraction(py, &p)
}

/// Transient `P(η)` at time `t` (a rational or `"inf"`) started from `x`.
/// Returns a dict with `value` (decimal string, or `None` on underflow),
/// `underflow`, `upper_bound`, `precision_bits`, and the exact endpoints
/// `t0_value` and `stationary_value`.
#[pyfunction]
#[pyo3(signature = (eta, x, theta, t, precision = DEFAULT_PRECISION))]
fn transient_probability<'py>(
    py: Python<'py>,
    eta: &Bound<'py, PyAny>,
    x: &Bound<'py, PyAny>,
    theta: &Bound<'py, PyAny>,
    t: &Bound<'py, PyAny>,
    precision: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let eta = partition_arg(eta)?;
    let x = vector_arg(x)?;
    let theta = theta_arg(theta)?;
    let tp = TimePoint::parse(&t.str()?.to_cow()?, theta.clone(), precision).map_err(to_py_err)?;
    let basis = build_basis(eta.size(), &theta).map_err(to_py_err)?;
    let expansion = sampling_expansion(&eta, &x, &basis).map_err(to_py_err)?;
    let value = expansion.evaluate(&tp).map_err(to_py_err)?;
    let out = PyDict::new(py);
    match &value {
        TransientValue::Point(v) => {
            out.set_item("value", format_float(v, precision))?;
            out.set_item("upper_bound", py.None())?;
        }
        TransientValue::Underflow { upper } => {
            out.set_item("value", py.None())?;
            out.set_item("upper_bound", format_float(upper, precision))?;
        }
    }
    out.set_item("underflow", value.is_underflow())?;
    out.set_item("precision_bits", precision)?;
    out.set_item("t0_value", fraction(py, &expansion.initial())?)?;
    out.set_item("stationary_value", fraction(py, &expansion.stationary())?)?;
    Ok(out)
}

/// `(speed, I)` with `k` the limit of `θt / log θ` (`"inf"` and `0` allowed).
#[pyfunction]
fn rate_function<'py>(
    py: Python<'py>,
    n: usize,
    eta: &Bound<'py, PyAny>,
    k: &Bound<'py, PyAny>,
) -> PyResult<(String, Bound<'py, PyAny>)> {
    let k = LogRatio::parse(&k.str()?.to_cow()?).map_err(to_py_err)?;
    let r = core_rate_function(n, &partition_arg(eta)?, &k).map_err(to_py_err)?;
    Ok((r.speed.as_str().to_string(), fraction(py, &r.value)?))
}

/// All partitions of `n`, in basis order.
#[pyfunction]
fn partitions(py: Python<'_>, n: usize) -> PyResult<Bound<'_, PyList>> {
    let parts = neutral_sampler::combinatorics::enumerate_partitions(n).map_err(to_py_err)?;
    PyList::new(py, parts.into_iter().map(|inner| Partition { inner }))
}

#[pymodule]
pub fn neutral_sampler_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add(
        "NeutralSamplerError",
        m.py().get_type::<NeutralSamplerError>(),
    )?;
    m.add(
        "ResourceLimitError",
        m.py().get_type::<ResourceLimitError>(),
    )?;
    m.add_class::<Partition>()?;
    m.add_class::<FrequencyVector>()?;
    m.add_class::<Basis>()?;
    m.add_function(wrap_pyfunction!(sampling_probability, m)?)?;
    m.add_function(wrap_pyfunction!(sampling_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(consistency_check, m)?)?;
    m.add_function(wrap_pyfunction!(moment, m)?)?;
    m.add_function(wrap_pyfunction!(ewens_probability, m)?)?;
    m.add_function(wrap_pyfunction!(transient_probability, m)?)?;
    m.add_function(wrap_pyfunction!(rate_function, m)?)?;
    m.add_function(wrap_pyfunction!(partitions, m)?)?;
    Ok(())
}
