"""Smoke test for the qcspectra_py extension module.

Build and install it first:

    pip install --no-build-isolation ./crates/py
"""

import math

import qcspectra_py as qc


def close(a, b, rel=1e-12):
    return abs(a - b) <= rel * abs(b)


def main():
    kinds = [m.kind for m in qc.catalog()]
    assert kinds == ["identity", "epicycloid", "ellipse-shear", "rose-petal", "linear-shear"], kinds

    disc = qc.Map("identity")
    assert disc.K == 1.0 and disc.measure_preserving
    assert close(disc.area, math.pi)
    assert disc.evaluate(0.3 + 0.4j) == 0.3 + 0.4j
    assert close(qc.pi_p(2.0), math.pi)

    ellipse = qc.Map("ellipse-shear:a=0.5")
    assert qc.Map.from_json(ellipse.to_json()) == ellipse
    assert close(ellipse.jacobian(0.1j), 1.0)
    assert len(ellipse.boundary(64)) == 64

    rose = qc.Map("rose-petal")
    b = qc.bound(rose, 3.0)
    assert b["variant"] == "measure-preserving:inf"
    assert b["mu_lower"] > 0.0

    epi = qc.Map("epicycloid:A=2,B=1,n=3")
    area = qc.image_area(epi)
    assert close(area, epi.area, 1e-9)
    assert close(qc.jacobian_norm(epi, 1), area, 1e-9)
    assert qc.jacobian_norm(epi, "inf") >= qc.jacobian_norm(epi, 2) / math.sqrt(math.pi)

    q = qc.quasidisc(2.0, 4.0, area=math.pi)
    assert q["q_opt"] == 2.0
    assert q["M_p_log"]["ln"] < 0.0 and "mu_lower_log" in q

    e = qc.eigen(disc, 3.0, rings=16)
    assert e["converged"] and e["trace_monotone"]
    assert len(e["vertices"]) == len(e["field"])

    v = qc.verify(disc, 4.0, rings=32)
    assert v["status"] == "pass", v["status"]

    for bad in (lambda: qc.Map("disc"), lambda: qc.bound(disc, 2.0), lambda: disc.evaluate(2.0)):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")

    print(f"qcspectra_py {qc.__version__}: smoke test passed (disc mu_3 ~ {e['mu']:.6f})")


if __name__ == "__main__":
    main()
