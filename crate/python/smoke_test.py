"""Smoke test for the tcquench_py extension.

Build and install first:  cd crates/python && maturin develop --release
"""

import math

import tcquench_py as tq


def main():
    p = tq.ModelParams(j=20, omega=2.0, m=40, lambda_=0.0)
    assert p.lambda_c == 0.5
    eps = tq.scaled_spectrum(p)
    assert len(eps) == 41 and all(a <= b for a, b in zip(eps, eps[1:]))

    _, w = tq.strength_function(p, 2.5)
    assert abs(sum(w) - 1.0) < 1e-10

    try:
        tq.ModelParams(j=20, omega=2.0, m=41, lambda_=0.0)
    except ValueError as e:
        assert "M exceeds 2j" in str(e)
    else:
        raise AssertionError("M > 2j accepted")

    lam = tq.tune_backward_critical(tq.ModelParams(j=200, omega=2.0, m=400, lambda_=2.5), 2.5)
    print(f"lambda_f/lambda_c = {lam / 0.5:.4f}")

    run = tq.run_quench(p, 2.5, tau_max=200.0, tau_samples=401)
    assert run["p_qm"][0] > 1 - 1e-9 and run["p_cl"] is None
    peaks = tq.revival_peaks(run["tau"], run["p_qm"])
    print("class:", run["class"], "peaks:", [(round(t, 1), round(h, 3)) for t, h in peaks[:3]])

    w = tq.ground_state_wigner(p, (-4.0, 4.0, 81), (-4.0, 4.0, 81))
    norm = sum(map(sum, w)) * 0.1 * 0.1
    assert abs(norm - 1.0) < 1e-3, norm
    x0, p0, sx, sp = tq.ground_state_moments(p)
    assert abs(sx - math.sqrt(0.5)) < 1e-6
    print("ok")


if __name__ == "__main__":
    main()
