"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that is printed in the pytest terminal
summary, then asserts the same condition.
"""

import json
import math
import time

import numpy as np
import pytest

from conftest import record
from equiopinion.axials import CONSENSUS, DISSENSUS, catalog, quadratic_equivariant, verify_record
from equiopinion.cli import main
from equiopinion.constants import THETA_SIM
from equiopinion.dynamics import HomogeneousModel, ModelParams, drift
from equiopinion.oracle import brute_force_axials, compare_with_catalog
from equiopinion.presets import PRESETS, SEED, critical_lambda, fig4_fixed_run, fig5_sequence_ok
from equiopinion.simulation import SwitchVerdict
from equiopinion.spectral import critical_lambdas, numeric_critical_lambda
from equiopinion.state import GroupKind, classify_group, group_mean_norm, max_agent_norm
from equiopinion.symmetry import GroupElement, act, subspace_basis


def _random_element(rng, na, no):
    return GroupElement(tuple(int(i) for i in rng.permutation(na)),
                        tuple(int(i) for i in rng.permutation(no)))


def _random_tangent(rng, na, no):
    z = rng.normal(size=(na, no))
    return z - z.mean(axis=1, keepdims=True)


def test_criterion_1_equivariance():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        na, no = int(rng.integers(1, 11)), int(rng.integers(2, 6))
        params = ModelParams(*rng.uniform(-2, 2, 4), lam=rng.uniform(-2, 2))
        model = HomogeneousModel(na, no, params, bias=float(rng.uniform(-1, 1)))
        g = _random_element(rng, na, no)
        z = _random_tangent(rng, na, no)
        worst = max(worst, float(np.abs(act(g, drift(z, model)) - drift(act(g, z), model)).max()))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 5
    record(1, ok, f"max violation {worst:.2e}, {elapsed:.2f} s")
    assert ok


def test_criterion_2_critical_lambda():
    rng = np.random.default_rng(202)
    start = time.perf_counter()
    worst = 0.0
    done = 0
    while done < 20:
        na, no = int(rng.integers(2, 8)), int(rng.integers(2, 5))
        a, b, g, d = rng.uniform(-2, 2, 4)
        if a - b <= 0 or abs(g - d) < 1e-3:
            continue
        pred = critical_lambdas(a, b, g, d, na, no)
        space = "Wc" if g > d else "Wd"
        model = HomogeneousModel(na, no, ModelParams(a, b, g, d))
        numeric = numeric_critical_lambda(model, space)
        worst = max(worst, abs(numeric - pred.critical_lambda) / pred.critical_lambda)
        done += 1
    la, ld = critical_lambda("consensus"), critical_lambda("dissensus")
    elapsed = time.perf_counter() - start
    ok = (worst <= 1e-6 and abs(la - 0.322581) <= 1e-6 and abs(ld - 1.666667) <= 1e-6
          and elapsed < 10)
    record(2, ok, f"worst relative error {worst:.2e}, lambda_c^a={la:.6f}, "
                  f"lambda_c^d={ld:.6f}, {elapsed:.2f} s")
    assert ok


def test_criterion_3_fig4_outcomes():
    start = time.perf_counter()
    failures = []
    for seed in range(10):
        for kind in ("consensus", "dissensus"):
            below = fig4_fixed_run(kind, "below", seed=seed).final
            if max_agent_norm(below) > THETA_SIM:
                failures.append(f"seed {seed} {kind} below: max agent norm {max_agent_norm(below):.3f}")
            above = fig4_fixed_run(kind, "above", seed=seed).final
            label = classify_group(above, THETA_SIM).label
            if kind == "consensus" and label != GroupKind.CONSENSUS.value:
                failures.append(f"seed {seed} consensus above: {label}")
            if kind == "dissensus":
                mean = group_mean_norm(above)
                if not label.startswith(GroupKind.DISSENSUS.value) or mean > 0.05:
                    failures.append(f"seed {seed} dissensus above: {label}, mean agent norm {mean:.3f}")
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 60
    shown = "; ".join(failures[:4]) + (f"; +{len(failures) - 4} more" if len(failures) > 4 else "")
    record(3, ok, f"{40 - len(failures)}/40 runs as expected, {elapsed:.1f} s" + (f": {shown}" if shown else ""))
    assert ok, "\n".join(failures)


def test_criterion_4_catalog_records():
    start = time.perf_counter()
    bad, n_records = [], 0
    for n in range(1, 13):
        for k in range(2, 7):
            modes = (CONSENSUS, DISSENSUS) if n >= 2 else (CONSENSUS,)
            for mode in modes:
                for rec in catalog(n, k, mode):
                    n_records += 1
                    chk = verify_record(rec)
                    if chk.generator_residual > 1e-12 or chk.fix_dim != 1 or chk.subspace_residual > 1e-12:
                        bad.append(f"({n},{k},{mode}) {rec.label}")
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 30
    record(4, ok, f"{n_records - len(bad)}/{n_records} records verified, {elapsed:.1f} s")
    assert ok, bad


def test_criterion_5_oracle():
    start = time.perf_counter()
    verdicts = {}
    for n, k in ((3, 2), (2, 3), (3, 3), (4, 2), (2, 4)):
        cmp = compare_with_catalog(brute_force_axials(n, k, DISSENSUS), catalog(n, k, DISSENSUS))
        verdicts[(n, k)] = (cmp.verdict, cmp.oracle_classes)
    elapsed = time.perf_counter() - start
    ok = (all(v == "MATCH" for v, _ in verdicts.values()) and verdicts[(3, 3)][1] == 2
          and elapsed < 300)
    detail = ", ".join(f"{n}x{k} {v}({c})" for (n, k), (v, c) in verdicts.items())
    record(5, ok, f"{detail}, {elapsed:.1f} s")
    assert ok


def test_criterion_6_quadratic_equivariant():
    rng = np.random.default_rng(606)
    worst = 0.0
    for _ in range(50):
        na, no = int(rng.integers(2, 7)), int(rng.integers(2, 6))
        g, z = _random_element(rng, na, no), _random_tangent(rng, na, no)
        worst = max(worst, float(np.abs(act(g, quadratic_equivariant(z))
                                        - quadratic_equivariant(act(g, z))).max()))
    witnesses = {}
    for na, no in ((3, 3), (4, 4)):
        Q = subspace_basis(na, no, "Wd")
        best = 0.0
        for _ in range(20):
            c = rng.normal(size=Q.shape[1])
            z = (Q @ (c / np.linalg.norm(c))).reshape(na, no)
            best = max(best, float(np.linalg.norm(quadratic_equivariant(z))))
        witnesses[(na, no)] = best
    vanish = 0.0
    for _ in range(100):
        na = int(rng.integers(2, 9))
        Q = subspace_basis(na, 2, "Wd")
        z = (Q @ rng.normal(size=Q.shape[1])).reshape(na, 2)
        vanish = max(vanish, float(np.abs(quadratic_equivariant(z)).max()))
    ok = worst <= 1e-12 and min(witnesses.values()) > 0.1 and vanish <= 1e-12
    record(6, ok, f"equivariance {worst:.1e}, witness norms 3x3={witnesses[(3, 3)]:.3f} "
                  f"4x4={witnesses[(4, 4)]:.3f}, No=2 residual {vanish:.1e}")
    assert ok


@pytest.fixture(scope="module")
def reproduced(tmp_path_factory):
    """Each preset run twice through the CLI with the default seed."""
    root = tmp_path_factory.mktemp("reproduce")
    cache = {}

    def get(figure):
        if figure not in cache:
            times = []
            for run in ("a", "b"):
                start = time.perf_counter()
                code = main(["reproduce", figure, "--out", str(root / run), "--seed", str(SEED)])
                times.append(time.perf_counter() - start)
                assert code == 0
            cache[figure] = (root / "a" / figure, root / "b" / figure, times[0])
        return cache[figure]

    return get


def test_criterion_7_switchiness(reproduced):
    out, _, elapsed = reproduced("fig6")
    runs = json.loads((out / "summary.json").read_text())["runs"]
    verdicts = {name: r["switchiness"]["verdict"] for name, r in runs.items()}
    metrics = {name: r["switchiness"]["metric"] for name, r in runs.items()}
    expected = {name: (SwitchVerdict.SWITCH_LIKE.value if name.endswith("no3") else SwitchVerdict.CONTINUOUS.value)
                for name in runs}
    low = max(m for name, m in metrics.items() if name.endswith("no2"))
    high = min(m for name, m in metrics.items() if name.endswith("no3"))
    ratio = high / low if low > 0 else math.inf
    ok = verdicts == expected and ratio >= 5 and elapsed < 120
    detail = ", ".join(f"{name} {verdicts[name]} {metrics[name]:.3g}" for name in sorted(runs))
    record(7, ok, f"{detail}; No=3/No=2 metric ratio {ratio:.2f}, {elapsed:.1f} s")
    assert ok


def test_criterion_8_fig5_sequence(reproduced):
    out, _, elapsed = reproduced("fig5")
    summary = json.loads((out / "summary.json").read_text())
    labels = [p["label"] for p in summary["timeline"]]
    ok = fig5_sequence_ok(labels) and elapsed < 120
    me = "moderate/extremist seen" if summary["moderate_extremist_detected"] else "no moderate/extremist phase"
    record(8, ok, f"phases {' > '.join(labels)}; {me}; {elapsed:.1f} s")
    assert ok


@pytest.mark.parametrize("figure", sorted(PRESETS))
def test_criterion_9_determinism(reproduced, figure):
    a, b, _ = reproduced(figure)
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    differing = [n for n in names if (a / n).read_bytes() != (b / n).read_bytes()]
    _determinism[figure] = (len(names), differing)
    if len(_determinism) == len(PRESETS):
        ok = not any(d for _, d in _determinism.values())
        detail = ", ".join(f"{f} {n - len(d)}/{n} files identical" for f, (n, d) in sorted(_determinism.items()))
        record(9, ok, detail)
    assert not differing


_determinism = {}
