"""Acceptance suite: one test per release criterion, tolerances pinned.

Each test prints a [PASS] line with the measured figure so a full run reads
as a checklist. Expected values marked as frozen were computed independently
with 50-digit arithmetic (mpmath) from the shipped wmelpop parameters.
"""

import json
import subprocess
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import pytest

from wolbachia.model import (
    PopulationState,
    classify_stability,
    equilibria,
    jacobian,
    vector_field,
)
from wolbachia.integrate import IntegrationOptions, integrate
from wolbachia.threshold import minimal_viable_w, separatrix_backward
from wolbachia.planner import tradeoff_table

# Table of published campaign rows: (n0 fraction, release-size fraction,
# period days, releases). The release count doubles as the search budget:
# each row is the cheapest campaign that fits its release budget.
CAMPAIGN_ROWS = [
    (0.25, 0.25, 1.0, 5),
    (0.25, 0.3615, 3.0, 3),
    (0.5, 0.39, 1.0, 9),
    (0.5, 0.773, 3.0, 3),
    (0.75, 0.43, 1.0, 11),
    (0.75, 1.178, 3.0, 4),
    (1.0, 0.43, 1.0, 12),
    (1.0, 1.39, 3.0, 8),
]

MINIMAL_SINGLE_ROWS = [(0.25, 0.38), (0.5, 0.83), (0.75, 1.32), (1.0, 1.85)]

N_SHARP_FROZEN = 1728.8159597026694
W_SHARP_FROZEN = 704.4105987365406


@pytest.fixture(scope="module")
def sep(wmelpop):
    return separatrix_backward(wmelpop)


def logistic(x0, r, capacity, t):
    return capacity / (1.0 + (capacity / x0 - 1.0) * np.exp(-r * t))


def test_c1_equilibria_closed_forms(wmelpop):
    eq = equilibria(wmelpop)  # warmup
    started = time.perf_counter()
    for _ in range(100):
        eq = equilibria(wmelpop)
    per_call_ms = (time.perf_counter() - started) * 10.0
    assert abs(eq.n_sharp - N_SHARP_FROZEN) / N_SHARP_FROZEN < 1e-12
    assert abs(eq.w_sharp - W_SHARP_FROZEN) / W_SHARP_FROZEN < 1e-12
    identity = abs(eq.e_c.n + eq.e_c.w - eq.w_sharp) / eq.w_sharp
    assert identity < 1e-12
    assert per_call_ms < 1.0
    print(
        f"\n[PASS] C1 equilibria closed forms: n#={eq.n_sharp!r}, "
        f"w#={eq.w_sharp!r}, identity residual {identity:.2e}, "
        f"{per_call_ms:.3f} ms/call"
    )


def test_c2_stability_suite(wmelpop):
    p = wmelpop
    report = classify_stability(p)
    eq = equilibria(p)
    closed_en = sorted((-(p.rho_n - p.alpha_n), -p.beta_w * (p.n_sharp - p.w_sharp)))
    closed_ew = sorted((-p.alpha_n - p.beta_n * p.w_sharp, -(p.rho_w - p.alpha_w)))
    for rec, closed in ((report.e_n, closed_en), (report.e_w, closed_ew)):
        got = sorted(v.real for v in rec.eigenvalues)
        assert all(v < 0.0 for v in got)
        for g, c in zip(got, closed):
            assert abs(g - c) / abs(c) < 1e-10
    det = float(np.linalg.det(jacobian(p, eq.e_c)))
    closed_det = -p.beta_w * p.beta_n * (eq.n_sharp - eq.w_sharp) * eq.e_c.n
    assert det < 0.0
    assert abs(det - closed_det) / abs(closed_det) < 1e-10
    print(
        f"\n[PASS] C2 stability suite: eig(e_n)={closed_en}, "
        f"eig(e_w)={closed_ew}, det J(e_c)={det:.6f}"
    )


def test_c3_logistic_oracle(wmelpop):
    p = wmelpop
    worst = 0.0
    for s0, r, capacity, column in (
        (PopulationState(150.0, 0.0), p.rho_n - p.alpha_n, p.n_sharp, 0),
        (PopulationState(0.0, 60.0), p.rho_w - p.alpha_w, p.w_sharp, 1),
    ):
        traj = integrate(p, s0, IntegrationOptions(t_max=500.0))
        x0 = s0.n if column == 0 else s0.w
        expected = logistic(x0, r, capacity, traj.t)
        err = np.abs(traj.states[:, column] - expected) / expected
        worst = max(worst, float(err.max()))
    assert worst <= 1e-6
    print(f"\n[PASS] C3 logistic oracle: worst relative error {worst:.2e} over [0, 500] d")


def test_c4_monotone_semiflow(wmelpop, rng):
    p = wmelpop
    eps = 1e-6 * max(p.n_sharp, p.w_sharp)
    times = np.linspace(0.0, 150.0, 61)
    opts = IntegrationOptions(t_max=float(times[-1]))
    violations = 0
    for _ in range(200):
        pts = rng.uniform(0.0, 1.0, size=(2, 2)) * (1.5 * p.n_sharp, 1.5 * p.w_sharp)
        lo = PopulationState(pts[:, 0].min(), pts[:, 1].max())
        hi = PopulationState(pts[:, 0].max(), pts[:, 1].min())
        a = integrate(p, lo, opts).at(times)
        b = integrate(p, hi, opts).at(times)
        if not (np.all(a[:, 0] <= b[:, 0] + eps) and np.all(a[:, 1] >= b[:, 1] - eps)):
            violations += 1
    assert violations == 0
    print(f"\n[PASS] C4 monotone semiflow: 200 ordered pairs, {violations} violations")


def test_c5_minimal_single_release_table(wmelpop):
    p = wmelpop
    started = time.perf_counter()
    results = {}
    for frac, expected in MINIMAL_SINGLE_ROWS:
        w0 = minimal_viable_w(p, frac * p.n_sharp)
        results[frac] = w0 / p.n_sharp
        assert abs(results[frac] - expected) <= 0.02, (frac, results[frac])
    elapsed = time.perf_counter() - started
    assert elapsed < 60.0
    table = ", ".join(f"{f}->{v:.4f}" for f, v in results.items())
    print(f"\n[PASS] C5 single-release table: {table} ({elapsed:.1f} s)")


def test_c6_separatrix_cross_validation(wmelpop, sep):
    p = wmelpop
    grid = np.linspace(0.0, p.n_sharp, 32)
    worst = 0.0
    for n0 in grid:
        w_bisect = minimal_viable_w(p, float(n0))
        w_curve = float(sep.w_of_n(n0))
        if n0 == 0.0:
            assert w_bisect == 0.0 and w_curve == 0.0
            continue
        worst = max(worst, abs(w_curve - w_bisect) / w_bisect)
    assert worst <= 1e-3
    assert np.all(np.diff(sep.n) > 0.0)
    assert np.all(np.diff(sep.w) >= 0.0)
    print(
        f"\n[PASS] C6 separatrix cross-validation: worst relative gap {worst:.2e} "
        f"at 32 grid points; polyline cone-unordered"
    )


def test_c7_campaign_table(wmelpop):
    p = wmelpop
    ns = p.n_sharp
    started = time.perf_counter()
    lines = []
    for frac, lam_expected, tau, n_expected in CAMPAIGN_ROWS:
        row = tradeoff_table(p, [frac * ns], [tau], budget=n_expected)[0]
        assert row.error is None
        lam_frac = row.lambda_hat / ns
        assert abs(lam_frac - lam_expected) <= 0.05, (frac, tau, lam_frac)
        assert abs(row.releases_used - n_expected) <= 1, (frac, tau, row.releases_used)
        lines.append(
            f"({frac}, tau={tau:.0f}): size {lam_frac:.4f} x {row.releases_used}"
        )
        if frac == 1.0:
            total_frac = row.total_released / ns
            expected_total = 5.16 if tau == 1.0 else 11.12
            assert abs(total_frac - expected_total) / expected_total <= 0.10
    elapsed = time.perf_counter() - started
    assert elapsed < 600.0
    print(f"\n[PASS] C7 campaign table: {'; '.join(lines)} ({elapsed:.1f} s)")


def test_c8_jacobian_vs_finite_differences(wmelpop, rng):
    p = wmelpop
    worst = 0.0
    for _ in range(1000):
        n = rng.uniform(0.01, 2.0 * p.n_sharp)
        w = rng.uniform(0.01, 2.0 * p.w_sharp)
        step = 1e-5 * max(1.0, n, w)
        approx = np.empty((2, 2))
        for j, (dn, dw) in enumerate(((step, 0.0), (0.0, step))):
            hi = vector_field(p, PopulationState(n + dn, w + dw))
            lo = vector_field(p, PopulationState(n - dn, w - dw))
            approx[:, j] = np.subtract(hi, lo) / (2.0 * step)
        exact = jacobian(p, PopulationState(n, w))
        worst = max(
            worst, float(np.linalg.norm(approx - exact) / np.linalg.norm(exact))
        )
    assert worst <= 1e-6
    print(f"\n[PASS] C8 jacobian vs finite differences: worst relative error {worst:.2e}")


def test_c9_determinism(tmp_path, wmelpop):
    # CLI: byte-identical reruns, exercised through a fresh interpreter
    outputs = []
    for tag in ("a", "b"):
        out = tmp_path / f"eq-{tag}.json"
        proc = subprocess.run(
            [sys.executable, "-m", "wolbachia.cli", "equilibria", "--out", str(out)],
            capture_output=True,
            cwd=str(Path(__file__).resolve().parents[1]),
        )
        assert proc.returncode == 0, proc.stderr.decode()
        outputs.append(out.read_bytes() + (tmp_path / f"eq-{tag}.json.meta.json").read_bytes())
    assert outputs[0] == outputs[1]

    # service: 32 simultaneous mixed requests, hash echo and payload equality
    from fastapi.testclient import TestClient
    from wolbachia.service import app

    bodies = [
        ("/equilibria", {"parameters": {"preset": "wmelpop"}}),
        ("/simulate", {"parameters": {"preset": "wmelpop"}, "n0": 300.0,
                       "w0": 400.0, "options": {"t_max": 30.0}}),
        ("/simulate", {"parameters": {"preset": "wmelpop"}, "n0": 40.0,
                       "w0": 10.0, "options": {"t_max": 30.0}}),
        ("/min-release", {"parameters": {"preset": "wmelpop"},
                          "n0_grid": [0.1 * wmelpop.n_sharp], "tol": 1e-3}),
    ]
    with TestClient(app) as client:
        reference = [client.post(path, json=body).json() for path, body in bodies]
        with ThreadPoolExecutor(max_workers=32) as pool:
            futures = [
                pool.submit(
                    lambda i=i: (i, client.post(bodies[i][0], json=bodies[i][1]).json())
                )
                for i in list(range(4)) * 8
            ]
            for future in futures:
                idx, got = future.result()
                assert got["request_hash"] == reference[idx]["request_hash"]
                assert got["result"] == reference[idx]["result"]
    print(
        "\n[PASS] C9 determinism: CLI reruns byte-identical; "
        "32 concurrent requests idempotent with matching hash echoes"
    )
