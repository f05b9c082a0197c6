"""Smoke test for the sturmpy extension module.

Build and install first:  pip install --no-build-isolation ./crates/python
Then run:                 python python/smoke_test.py
"""

import cmath
import math

import sturmpy


def main():
    fib = sturmpy.ContinuedFraction.preset("fibonacci")
    assert fib.coefficients[:4] == [1, 1, 1, 1]
    assert sturmpy.build_sn(fib, 5) == "10110101"
    assert sturmpy.c_prefix(fib, 8) == "10110101"
    assert sturmpy.rotation_word(fib, 1, 8) == "10110101"
    assert len(sturmpy.subwords(fib, 10)) == 11
    p, q = fib.convergents()[10]
    assert abs(p / q - (math.sqrt(5) - 1) / 2) < 1e-4

    try:
        sturmpy.ContinuedFraction([1, 0, 1])
    except ValueError:
        pass
    else:
        raise AssertionError("a_2 = 0 accepted")

    part = sturmpy.standard_partition("0110", fib, 2)
    assert part["a"] == "0" and part["b"] == ""
    assert [b["tag"] for b in part["blocks"]] == ["S_PREV", "S_CUR"]
    assert sturmpy.two_block_decomposition("0110", fib) == (3, "01", "10")

    e = 2 + 0.5j
    m = sturmpy.word_product(1.0, e, sturmpy.build_sn(fib, 10))
    r = sturmpy.sn_product(1.0, e, fib, 10)
    assert abs(m.log_norm - r.log_norm) < 1e-10
    assert m.det_defect < 1e-12

    # Free case: tr M(s_n) = 2 cos(q_n arccos(E/2)).
    free = sturmpy.word_product(0.0, 0.3, sturmpy.build_sn(fib, 6))
    expected = 2 * math.cos(13 * math.acos(0.15))
    assert abs(free.trace() - expected) < 1e-12

    bands = sturmpy.approximate_spectrum(0.0, fib, 6)
    assert len(bands) == 1 and abs(bands[0][0] + 2) < 1e-6 and abs(bands[0][1] - 2) < 1e-6

    est = sturmpy.lyapunov_estimate(1.0, 5.0, fib, 20)
    assert est["gamma"] > 0.5

    fit = sturmpy.growth_fit(1.0, fib, [0.5], 2000, samples=4, seed=1)
    assert math.isfinite(fit["muMax"])
    bound = sturmpy.certified_bound(1.0, 0.5, "0110110101", fib)
    assert bound["direct"] <= bound["logBound"]

    passed, line = sturmpy.run_criterion(5)
    assert passed, line
    print(line)
    print("sturmpy smoke test passed")


if __name__ == "__main__":
    main()
