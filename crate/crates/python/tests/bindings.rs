use std::ffi::CString;

use neutral_sampler_py::neutral_sampler_py;
use pyo3::prelude::*;

fn run_python(code: &str) {
    pyo3::append_to_inittab!(neutral_sampler_py);
    Python::initialize();
    Python::attach(|py| {
        let code = CString::new(code).unwrap();
        if let Err(e) = py.run(&code, None, None) {
            e.print(py);
            panic!("python check failed");
        }
    });
}

// One interpreter per process, so every check lives in a single test.
#[test]
fn module_round_trips_exact_values() {
    run_python(
        r#"
from fractions import Fraction
import neutral_sampler_py as ns

x = ns.FrequencyVector(["1/2", "1/3", "1/6"])
assert ns.sampling_probability("2,1", x) == Fraction(2, 3)
assert ns.sampling_probability([1], ns.FrequencyVector(["1/3"], dust="2/3")) == 1
assert ns.sampling_probability([1, 1], ["1/2"]) == Fraction(3, 4)
law = ns.sampling_distribution(5, ["1/4", "1/5"])
assert sum(law.values()) == 1 and len(law) == 7
assert ns.consistency_check(5, x)
assert ns.moment([2], 1, xi=[2]) == Fraction(7, 24)
assert ns.ewens_probability([1, 1], 3) == Fraction(3, 4)
b = ns.Basis(6, 1)
assert len(b) == 11 and b.norm2([2]) == Fraction(1, 24)
assert [p.size for p in ns.partitions(4)] == [4] * 5
assert str(ns.partitions(3)[1]) == "(2,1)"
r = ns.transient_probability([2], x, 3, "inf")
assert r["stationary_value"] == Fraction(1, 4) and r["t0_value"] == Fraction(7, 18)
assert ns.rate_function(3, [2, 1], "inf") == ("logθ", 1)
for bad in (lambda: ns.Partition("x"), lambda: ns.Basis(2, "0")):
    try:
        bad()
    except (ValueError, ns.NeutralSamplerError):
        pass
    else:
        raise AssertionError("accepted bad input")
"#,
    );
}
