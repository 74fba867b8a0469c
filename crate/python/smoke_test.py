"""Smoke test for the carleman_lab extension module.

Build and install first, e.g.
    pip install maturin
    cd crates/python && maturin develop --release
then run: python python/smoke_test.py
"""

import math
import os
import tempfile

import carleman_lab as cl


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    g = cl.WeightSequence("gevrey:2", 64)
    assert len(g) == 65 and g.truncation == 64
    # log M_j = 2 log j!
    for j in (0, 1, 10, 64):
        assert close(g.log_m()[j], 2 * math.lgamma(j + 1)), j
    assert g.validate()["valid"]
    assert g.check("mg")["holds"] == "holds"
    assert cl.WeightSequence("gevrey:2", 512).check("nq")["holds"] == "holds"

    f = cl.WeightSequence("factorial", 64)
    cmp = f.compare(g)
    assert cmp["relation"] == "strictly_below", cmp
    sq = f.check("pointwise-square")
    assert sq["holds"] == "holds" and sq["certificate"]["C"] == 1.0

    omega = cl.WeightFunction.power(1.0)
    assert close(omega(3.0), 3.0)
    # x log x - x
    assert close(omega.upper(5.0)["value"], 5 * math.log(5) - 5, 1e-7)
    assert omega.check("omega1")["holds"] == "holds"

    mx = cl.WeightMatrix.example([1.0, 2.0])
    assert mx.lambdas == [1.0, 2.0] and mx.truncation == 1024
    v = mx.check("roumieu-square")
    assert v["holds"] == "holds" and v["certificate"]["kappa@1"] == 2.0

    a = cl.PowerSeries([1, 1, 0, 0])
    prod = a.cauchy(a).values()
    assert all(abs(x - y) < 1e-12 for x, y in zip(prod, [1, 2, 1, 0]))
    h = cl.PowerSeries([1, 2, 3]).hadamard(cl.PowerSeries([4, 5, 6])).values()
    assert all(abs(x - y) < 1e-12 for x, y in zip(h, [4, 10, 18]))

    big = cl.WeightSequence("gevrey:2", 600)
    theta = cl.PowerSeries.theta(big, 256, 320)
    m = theta.classify(big)
    assert m["roumieu"] == "holds" and m["beurling"] != "holds"

    with tempfile.TemporaryDirectory() as d:
        p = os.path.join(d, "theta.csv")
        theta.write_csv(p)
        assert cl.PowerSeries.read_csv(p).log_magnitudes() == theta.log_magnitudes()
        try:
            cl.PowerSeries.read_csv(os.path.join(d, "missing.csv"))
            raise AssertionError("expected OSError")
        except OSError:
            pass

    gap = cl.gap_sequence(cl.WeightSequence("qgevrey:2", 512), 4)
    assert gap[0] == 1 and all(b > a for a, b in zip(gap, gap[1:]))
    basis = cl.exponent_basis(2, 0.25, 0.75, 3)
    assert len(basis["b"]) == 2
    w = cl.witness(basis["b"][0], gap, cl.WeightSequence("qgevrey:2", 512), gap[-1])
    assert w.support() == gap

    try:
        cl.WeightSequence("gevrey:0.5")
        raise AssertionError("expected ValueError")
    except ValueError:
        pass

    print("smoke test passed (carleman_lab %s)" % cl.__version__)


if __name__ == "__main__":
    main()
