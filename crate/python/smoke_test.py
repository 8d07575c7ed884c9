"""Smoke test for the neutral_sampler_py extension module.

Build and run from the repository root:

    cargo build --release -p neutral-sampler-py --features extension-module
    cp target/release/libneutral_sampler_py.so python/neutral_sampler_py.so
    python3 python/smoke_test.py
"""

import math
import sys
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import neutral_sampler_py as ns  # noqa: E402


def main() -> None:
    x = ns.FrequencyVector(["1/2", "1/3", "1/6"])
    assert x.dust == 0

    assert ns.sampling_probability([1], ns.FrequencyVector(["1/3"], dust="auto")) == 1
    assert ns.sampling_probability("2,1", x) == Fraction(2, 3)
    assert ns.sampling_probability([1, 1], [Fraction(1, 2)]) == Fraction(3, 4)

    law = ns.sampling_distribution(4, ["1/4", "1/5"])
    assert sum(law.values()) == 1
    assert list(law) == sorted(law)
    assert ns.consistency_check(4, ["1/4", "1/5"])

    assert ns.moment([2], 1) == Fraction(1, 2)
    assert ns.moment([2], 1, xi=[2]) == Fraction(7, 24)
    assert ns.ewens_probability([2], 3) == Fraction(1, 4)

    basis = ns.Basis(4, 1)
    assert [p.parts for p in basis.labels()] == [[], [2], [3], [4], [2, 2]]
    assert basis.norm2([2]) == Fraction(1, 24)
    assert basis.coefficients([2]) == {(2,): 1, (): Fraction(-1, 2)}
    assert basis.evaluate([2], x) == Fraction(7, 18) - Fraction(1, 2)

    r = ns.transient_probability([1, 1], [1], 1, str(math.log(2) / 2))
    assert abs(float(r["value"]) - 0.25) < 1e-12
    assert r["t0_value"] == 0 and r["stationary_value"] == Fraction(1, 2)
    r = ns.transient_probability([3], x, 1000, 10, precision=64)
    assert r["precision_bits"] == 64 and not r["underflow"]

    assert ns.rate_function(3, [2, 1], 1) == ("logθ", 1)
    assert ns.rate_function(3, [3], 0) == ("θt", Fraction(3, 2))

    p = ns.Partition([1, 2, 1])
    assert p.parts == [2, 1, 1] and p.alpha == [2, 1, 0, 0] and p.size == 4
    assert ns.Partition("2,1,1") == p and len({p, ns.Partition([2, 1, 1])}) == 1

    try:
        ns.Partition("two")
    except ValueError:
        pass
    else:
        raise AssertionError("bad partition accepted")
    try:
        ns.transient_probability([2], x, 1, 1, precision=32)
    except ns.ResourceLimitError:
        pass
    else:
        raise AssertionError("low precision accepted")
    try:
        ns.FrequencyVector(["2/3", "2/3"])
    except ns.NeutralSamplerError:
        pass
    else:
        raise AssertionError("mass above one accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
