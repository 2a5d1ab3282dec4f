"""Smoke test for the imdelab_py extension module."""

import math

import imdelab_py as im


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    names = im.problems()
    assert "pendulum" in names and "lorenz" in names, names
    assert im.initial_point("lorenz") == [-0.8, 0.7, 2.6]

    f = im.field("lorenz", [1.0, 1.0, 1.0])
    assert f[0] == 0.0 and f[1] == 17.0 and close(f[2], 22.0 / 3.0, 1e-12), f
    assert im.field("linear", [2.0], params={"lambda": -3.0}) == [-6.0]

    y = im.integrate("linear", "euler", [1.0], 0.1, steps=2, params={"lambda": 1.0})
    assert close(y[0], 1.21, 1e-14), y

    fs = im.imde_coefficients("pendulum", "euler", [0.0, 1.0], 1)
    assert close(fs[1][0], 0.0, 1e-12) and close(fs[1][1], -4.2073549, 1e-7), fs
    mid = im.imde_coefficients("lorenz", "explicit-midpoint", [0.3, -0.2, 1.1], 2)
    assert max(abs(v) for v in mid[1]) <= 1e-9, mid
    ab2 = im.imde_coefficients("linear", "ab2", [1.0], 2, params={"lambda": 1.0})
    assert close(ab2[2][0], 5.0 / 12.0, 1e-12), ab2

    engine = im.imde_truncated("pendulum", "euler", [0.4, 0.7], 0.05, 3)
    closed = im.closed_form("pendulum", "euler", [0.4, 0.7], 0.05)
    assert all(close(a, b, 1e-9 * max(1.0, abs(b))) for a, b in zip(engine, closed)), (engine, closed)
    composed = im.imde_coefficients("pendulum", "euler", [0.4, 0.7], 3, compositions=4)
    single = im.imde_coefficients("pendulum", "euler", [0.4, 0.7], 3)
    assert all(close(a, b, 1e-9) for ra, rb in zip(composed, single) for a, b in zip(ra, rb))

    defects = im.hamiltonicity_defects("pendulum-hnn", "symplectic-euler", 2, [[0.0, 1.0], [0.5, -0.3]])
    assert max(defects) <= 1e-8, defects
    euler_defect = im.hamiltonicity_defects("pendulum", "euler", 1, [[0.0, 1.0]])
    assert euler_defect[0] >= 0.1, euler_defect

    d = im.truncation_diagnostics("euler", 1.0, 1.0, 1e-3)
    assert d["no_valid_k"] and d["mu"] == 1.0 and math.isinf(d["h0"]), d
    assert close(d["q"], 15.05, 0.01), d

    assert close(im.convergence_order(0.4, 0.1), 2.0, 1e-15)
    for bad in (lambda: im.convergence_order(0.0, 0.1), lambda: im.field("van-der-pol", [0.0])):
        try:
            bad()
        except (ValueError, ArithmeticError):
            pass
        else:
            raise AssertionError("expected an error")

    config = {
        "problem.name": "damped-oscillator",
        "model.kind": "odenet",
        "data.count": "40",
        "data.test_count": "20",
        "net.hidden": "8",
        "train.batch": "20",
        "train.updates": "20",
        "train.log_every": "10",
        "eval.samples": "100000",
        "run.id": "smoke",
        "run.plot": "false",
    }
    run = im.train(config)
    assert run["status"] == "ok", run["status"]
    assert [s for s, _ in run["curve"]] == [0, 10, 20], run["curve"]
    assert run["E_net_vs_f"] > 0.0 and math.isfinite(run["train_loss"])
    again = im.train(dict(config))
    assert again["params"] == run["params"]

    print("smoke test passed")


if __name__ == "__main__":
    main()
