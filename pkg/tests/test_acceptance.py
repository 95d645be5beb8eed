"""Acceptance criteria, one test per criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line (shown live even under
pytest's output capture).  Run directly with ``python tests/test_acceptance.py``
for the summary alone.
"""

from __future__ import annotations

import sys
import time
from pathlib import Path

import numpy as np
import pytest

from actionsw.binary_examples import example1_model, example2_model, independent_policy
from actionsw.cli import main as cli_main
from actionsw.coding_sim import TypicalitySpec, simulate_network_scheme
from actionsw.gf2m import FieldSpec, clmul, gauss_inverse, invert_unitriangular, mat_mul
from actionsw.info import action_terms, binary_entropy
from actionsw.netgraph import Network, butterfly, min_cut, multicast_butterfly, random_dag, two_link_network
from actionsw.region import (
    Scenario,
    constraint_arrays,
    constraints_case_a,
    constraints_case_b,
    constraints_case_c,
    example1_closed_form,
    example2_closed_form,
    policy_grid,
    trace_frontier,
)
from actionsw.rlnc import (
    InputLayout,
    clopper_pearson,
    collision_counts,
    collision_probability_estimate,
    difference_vectors,
    lemma1_bound,
    multicast_simulate,
)

sys.path.insert(0, str(Path(__file__).parent))
from conftest import exhaustive_min_cut, random_model  # noqa: E402

# pinned tolerances and budgets
CLOSED_FORM_TOL = 1e-9
CLOSED_FORM_SECONDS = 10
COINCIDE_RESOLUTION = 512
COINCIDE_SECONDS = 30
CORNER_TOL = 1e-6
CASE_C_TOL = 1e-9
INCLUSION_TOL = 1e-9
INCLUSION_MODELS = 10_000
LEMMA_DAGS = 20
LEMMA_BITS = (4, 6, 8)
LEMMA_TRIALS = 100_000
LEMMA_SECONDS = 300
MULTICAST_BITS = 8
MULTICAST_LOW, MULTICAST_HIGH = 0.05, 0.95
MULTICAST_TRIALS = {2.0: 2000, 2.5: 200}
MULTICAST_SECONDS = 60
DUALITY_DAGS = 200
E2E_N, E2E_EPS, E2E_TRIALS = 12, 0.25, 500
E2E_INSIDE_MAX, E2E_BELOW_MIN, E2E_COST_SLACK = 0.2, 0.8, 0.1
E2E_SECONDS = 600
UNITRI_MATRICES, UNITRI_MAX = 1000, 20


def report(num: int, name: str, ok: bool, detail: str = ""):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {name}" + (f" ({detail})" if detail else "")
    capman = _capture_manager
    if capman is not None:
        with capman.global_and_fixture_disabled():
            print("\n" + line, flush=True)
    else:
        print(line, flush=True)
    return ok


_capture_manager = None


@pytest.fixture(autouse=True)
def _live_output(request):
    global _capture_manager
    _capture_manager = request.config.pluginmanager.getplugin("capturemanager")
    yield
    _capture_manager = None


# 1


def criterion_1():
    t0 = time.perf_counter()
    q = np.linspace(0.0, 1.0, 101)
    alpha, beta = (g.ravel() for g in np.meshgrid(q, q, indexing="ij"))
    pols = policy_grid(2, 2, 101)
    ind = np.stack([independent_policy(a) for a in q])
    worst = 0.0
    for delta in (0.1, 0.3, 0.5):
        m = example2_model(delta, 1.0)
        ch = m.py_given_xa.table
        for sc in (Scenario.DECODER, Scenario.ENCODER):
            gen = constraint_arrays(0.5 * pols[..., None] * ch, sc)
            cf, _ = example2_closed_form(alpha, beta, delta, sc)
            worst = max(worst, max(np.max(np.abs(g - c)) for g, c in zip(gen, cf.as_tuple())))
        gen = constraint_arrays(0.5 * ind[..., None] * ch, Scenario.INDEPENDENT)
        cf, _ = example2_closed_form(q, q, delta, Scenario.INDEPENDENT)
        worst = max(worst, max(np.max(np.abs(g - c)) for g, c in zip(gen, cf.as_tuple())))

    ch1 = example1_model(1.0).py_given_xa.table
    for sc in (Scenario.DECODER, Scenario.ENCODER):
        gen = constraint_arrays(0.5 * pols[..., None] * ch1, sc)
        cf, _ = example1_closed_form(alpha, beta, 1.0, sc)
        worst = max(worst, max(np.max(np.abs(g - c)) for g, c in zip(gen, cf.as_tuple())))
    gen = constraint_arrays(0.5 * ind[..., None] * ch1, Scenario.INDEPENDENT)
    cf, _ = example1_closed_form(q, 0.0, 1.0, Scenario.INDEPENDENT)
    worst = max(worst, max(np.max(np.abs(g - c)) for g, c in zip(gen, cf.as_tuple())))
    dt = time.perf_counter() - t0
    ok = worst <= CLOSED_FORM_TOL and dt < CLOSED_FORM_SECONDS
    return ok, f"max |generic - closed form| = {worst:.2e} <= {CLOSED_FORM_TOL:g}, {dt:.2f}s < {CLOSED_FORM_SECONDS}s"


def test_criterion_1_closed_form_equivalence():
    ok, detail = criterion_1()
    assert report(1, "closed-form oracle equivalence", ok, detail), detail


# 2


def criterion_2():
    t0 = time.perf_counter()
    res = COINCIDE_RESOLUTION
    tol = 2 / (res - 1)
    worst_line, worst_pair = 0.0, 0.0
    for gamma in np.round(np.arange(0.1, 1.0, 0.1), 10):
        frs = [trace_frontier(example1_model(gamma), sc, res) for sc in Scenario]
        xs = np.linspace(1 - gamma + tol, 2.0, 200)
        expected = np.maximum(2 - gamma - xs, 1 - gamma)
        curves = [fr.ry_at(xs) for fr in frs]
        for fr, c in zip(frs, curves):
            worst_line = max(worst_line, np.max(np.abs(c - expected)))
            # left edge of the region sits at R_X = 1 - Gamma
            worst_line = max(worst_line, abs(fr.rx[0] - (1 - gamma)))
        for a in range(3):
            for b in range(a + 1, 3):
                worst_pair = max(worst_pair, np.max(np.abs(curves[a] - curves[b])))
                worst_pair = max(worst_pair, abs(frs[a].rx[0] - frs[b].rx[0]))
    dt = time.perf_counter() - t0
    ok = worst_line <= tol and worst_pair <= tol and dt < COINCIDE_SECONDS
    detail = (
        f"max deviation from the line pair {worst_line:.4f}, between scenarios {worst_pair:.4f}, "
        f"tolerance 2 x step = {tol:.4f}; {dt:.1f}s < {COINCIDE_SECONDS}s"
    )
    return ok, detail


def test_criterion_2_example1_coincidence():
    ok, detail = criterion_2()
    assert report(2, "example 1 frontiers coincide", ok, detail), detail


# 3


def criterion_3():
    m = example2_model(0.5, 0.3)
    res = COINCIDE_RESOLUTION
    step = 1 / (res - 1)
    fa, fb, fc = (trace_frontier(m, sc, res) for sc in Scenario)
    xs = np.linspace(0.0, 2.0, 2001)
    dom_a = np.all(fa.ry_at(xs) <= fc.ry_at(xs) + 1e-9)
    dom_b = np.all(fb.ry_at(xs) <= fc.ry_at(xs) + 1e-9)

    corner_err = 0.0
    analytic_err = 0.0
    for fr in (fa, fb):
        t = action_terms(m.with_policy(fr.policies[-1]).joint().probs)
        corner = np.array([t["H(X)"], t["H(Y|X,A)"]], dtype=float)
        corner_err = max(corner_err, np.max(np.abs(fr.points[-1] - corner)))
        # the best corner sits at alpha = 0, beta = 0.4: (1, 0.2); beta = 0.4 is between grid points
        analytic_err = max(analytic_err, np.max(np.abs(fr.points[-1] - [1.0, 0.2])))
    c_triple = constraints_case_c(m.with_policy(independent_policy(0.3)).joint()).as_tuple()
    c_expected = (0.75 * binary_entropy(2 / 3), 0.5, 1.5)
    c_err = max(abs(a - b) for a, b in zip(c_triple, c_expected))
    ok = dom_a and dom_b and corner_err <= CORNER_TOL and analytic_err <= 2 * step and c_err <= CASE_C_TOL
    detail = (
        f"A<=C: {dom_a}, B<=C: {dom_b}; corner vs (H(X), H(Y|X,A)) {corner_err:.1e} <= {CORNER_TOL:g}, "
        f"vs analytic (1, 0.2) {analytic_err:.4f} <= {2 * step:.4f}; case C triple error {c_err:.1e}"
    )
    return ok, detail


def test_criterion_3_example2_dominance():
    ok, detail = criterion_3()
    assert report(3, "example 2 dominance and common corner", ok, detail), detail


# 4


def mutual_information(pxy: np.ndarray) -> float:
    """I between the row and column variables of a 2-D joint, in bits."""
    outer = pxy.sum(axis=1, keepdims=True) * pxy.sum(axis=0, keepdims=True)
    nz = pxy > 0
    return float(np.sum(pxy[nz] * np.log2(pxy[nz] / outer[nz])))


def criterion_4():
    rng = np.random.default_rng(20240)
    worst = 0.0
    for _ in range(INCLUSION_MODELS):
        j = random_model(rng).joint()
        a = constraints_case_a(j)
        b = constraints_case_b(j, clamp=False)
        b_clamped = constraints_case_b(j)
        i_ya = mutual_information(j.probs.sum(axis=0))
        worst = max(
            worst,
            abs(b.rx_min - (a.rx_min - i_ya)),
            abs(b_clamped.rx_min - max(b.rx_min, 0.0)),
            abs(a.ry_min - b.ry_min),
            abs(a.sum_min - b.sum_min),
        )
    ok = worst <= INCLUSION_TOL
    return ok, f"{INCLUSION_MODELS} random models, max deviation {worst:.1e} <= {INCLUSION_TOL:g}"


def test_criterion_4_region_inclusion():
    ok, detail = criterion_4()
    assert report(4, "case B = case A minus I(Y;A)", ok, detail), detail


# 5


def lemma_cells():
    """Every (DAG, n, W, t) cell of the collision experiment."""
    cells = []
    layout = InputLayout(2, 2)
    for g in range(LEMMA_DAGS):
        rng = np.random.default_rng([2024, g])
        net = random_dag(int(rng.integers(5, 11)), rng, 0.4, int(rng.integers(1, 3)))
        for n in LEMMA_BITS:
            f = FieldSpec(n)
            diffs = difference_vectors(net, layout, f, np.random.default_rng([2024, g, n]))
            labels = list(diffs)
            hits = collision_counts(
                net, layout, np.stack([diffs[k] for k in labels]), net.terminals, f, LEMMA_TRIALS, g * 100 + n
            )
            for i, label in enumerate(labels):
                for jt, t in enumerate(net.terminals):
                    h = int(hits[i, jt])
                    lo, hi = clopper_pearson(h, LEMMA_TRIALS)
                    bound = lemma1_bound(net, net.source_nodes(label), t, n)
                    cells.append({"dag": g, "n": n, "W": label, "t": t, "hits": h, "low": lo, "high": hi, "bound": bound})
    return cells


_lemma_cache: dict = {}


def lemma_results():
    if "cells" not in _lemma_cache:
        t0 = time.perf_counter()
        _lemma_cache["cells"] = lemma_cells()
        _lemma_cache["seconds"] = time.perf_counter() - t0
    return _lemma_cache["cells"], _lemma_cache["seconds"]


def criterion_5():
    cells, dt = lemma_results()
    over = [c for c in cells if c["high"] > c["bound"]]
    ok = not over and dt < LEMMA_SECONDS
    tight = sum(1 for c in over if c["low"] <= c["bound"] <= c["high"] and c["hits"] > 0)
    tiny = sum(1 for c in over if c["hits"] == 0)
    detail = (
        f"{len(cells)} cells, {len(over)} with 99% upper CI above the bound "
        f"({tiny} with zero hits whose bound is below the CI resolution, {tight} where the bound is attained); {dt:.0f}s"
    )
    return ok, detail


def test_criterion_5_lemma1_upper_ci():
    ok, detail = criterion_5()
    assert report(5, "collision upper CI never exceeds the bound", ok, detail), detail


def test_criterion_5_companion_bound_not_rejected():
    cells, dt = lemma_results()
    rejected = [c for c in cells if c["low"] > c["bound"]]
    ok = not rejected and dt < LEMMA_SECONDS
    detail = f"{len(cells)} cells, {len(rejected)} with the 99% lower CI above the bound"
    assert report(5, "companion: no cell significantly exceeds the bound", ok, detail), detail


def test_criterion_5_companion_single_link():
    net = Network.build(["s1", "s2", "t"], [("s1", "t", 1)], "s1", "s2", ["t"])
    misses = []
    for n in LEMMA_BITS:
        est = collision_probability_estimate(net, InputLayout(1), [1], [0], 2, FieldSpec(n), LEMMA_TRIALS, n)
        if not est.low <= 2.0 ** -n <= est.high:
            misses.append(n)
    ok = not misses
    detail = f"2^-n inside the 99% CI for n in {LEMMA_BITS}" if ok else f"missed for n = {misses}"
    assert report(5, "companion: single-link estimate matches 2^-n", ok, detail), detail


# 6


def criterion_6():
    net = multicast_butterfly()
    t0 = time.perf_counter()
    low = multicast_simulate(net, net.s1, 2.0, MULTICAST_BITS, MULTICAST_TRIALS[2.0], 6)
    high = multicast_simulate(net, net.s1, 2.5, MULTICAST_BITS, MULTICAST_TRIALS[2.5], 6)
    dt = time.perf_counter() - t0
    ok = low.error_rate < MULTICAST_LOW and high.error_rate > MULTICAST_HIGH and dt < MULTICAST_SECONDS
    detail = (
        f"R=2: {low.error_rate:.4f} < {MULTICAST_LOW} over {low.trials} trials; "
        f"R=2.5: {high.error_rate:.3f} > {MULTICAST_HIGH} over {high.trials} trials; {dt:.1f}s"
    )
    return ok, detail


def test_criterion_6_multicast():
    ok, detail = criterion_6()
    assert report(6, "butterfly multicast threshold", ok, detail), detail


# 7


def criterion_7():
    rng = np.random.default_rng(77)
    checked = mismatches = 0
    for _ in range(DUALITY_DAGS):
        net = random_dag(int(rng.integers(4, 13)), rng, 0.35, int(rng.integers(1, 3)), max_capacity=3)
        for t in net.terminals:
            for label in ("s1", "s2", "s1,s2"):
                src = net.source_nodes(label)
                checked += 1
                mismatches += min_cut(net, src, t) != exhaustive_min_cut(net, src, t)
    return mismatches == 0, f"{DUALITY_DAGS} DAGs, {checked} (W, t) pairs, {mismatches} mismatches"


def test_criterion_7_flow_duality():
    ok, detail = criterion_7()
    assert report(7, "max-flow equals exhaustive min cut", ok, detail), detail


# 8


def criterion_8():
    gamma = 0.5
    m = example2_model(0.5, gamma, 0.0, 0.0)
    spec = TypicalitySpec(E2E_N, E2E_EPS)
    t0 = time.perf_counter()
    # the A = X bounds are (0, 0, 1); the corner (1, 0) plus 0.15 bits per link, on the 1/n grid
    inside = simulate_network_scheme(two_link_network(14 / 12, 2 / 12), m, None, spec, trials=E2E_TRIALS, seed=7)
    # sum capacity 0.9, i.e. 0.1 below the sum bound
    below = simulate_network_scheme(two_link_network(0.75, 0.15), m, None, spec, trials=E2E_TRIALS, seed=7)
    dt = time.perf_counter() - t0
    cost = max(inside.mean_cost, below.mean_cost)
    ok = (
        inside.error_rate < E2E_INSIDE_MAX
        and below.error_rate > E2E_BELOW_MIN
        and cost <= gamma + E2E_COST_SLACK
        and dt < E2E_SECONDS
    )
    detail = (
        f"inside: {inside.error_rate:.3f} < {E2E_INSIDE_MAX}; below: {below.error_rate:.3f} > {E2E_BELOW_MIN}; "
        f"mean cost {cost:.3f} <= {gamma + E2E_COST_SLACK}; {dt:.0f}s"
    )
    return ok, detail


@pytest.mark.slow
def test_criterion_8_end_to_end():
    ok, detail = criterion_8()
    assert report(8, "end-to-end achievability", ok, detail), detail


# 9


def criterion_9():
    f = FieldSpec(8)
    a, b = np.meshgrid(np.arange(256), np.arange(256), indexing="ij")
    table = f.mul_array(a, b)
    oracle = np.array([[clmul(x, y, f.poly) for y in range(256)] for x in range(256)])
    mul_bad = int(np.count_nonzero(table != oracle))

    rng = np.random.default_rng(99)
    inv_bad = 0
    for i in range(UNITRI_MATRICES):
        k = 1 + i % UNITRI_MAX
        F = np.triu(f.random((k, k), rng), 1)
        u = np.eye(k, dtype=np.int64) ^ F
        g = invert_unitriangular(f, u)
        inv_bad += not (np.array_equal(mat_mul(f, g, u), np.eye(k)) and np.array_equal(mat_mul(f, u, g), np.eye(k)))
        if i % 50 == 0:
            inv_bad += not np.array_equal(g, gauss_inverse(f, u))
    ok = mul_bad == 0 and inv_bad == 0
    return ok, f"{mul_bad}/65536 product mismatches; {inv_bad}/{UNITRI_MATRICES} inverse failures (sizes 1..{UNITRI_MAX})"


def test_criterion_9_field_exhaustive():
    ok, detail = criterion_9()
    assert report(9, "GF(2^8) exhaustive and (I-F)^-1 exact", ok, detail), detail


# 10


def criterion_10(tmp: Path):
    model = tmp / "model.json"
    example2_model(0.5, 0.5, 0.0, 0.0).to_json(model)
    net = tmp / "net.json"
    two_link_network(1.25, 0.25).to_json(net)
    bf = tmp / "bf.json"
    butterfly().to_json(bf)
    commands = {
        "region": ["region", "--model", str(model), "--scenario", "A", "--resolution", "65"],
        "examples": ["examples", "2", "--gamma", "0.3", "--delta", "0.5", "--resolution", "65"],
        "mincut": ["mincut", "--network", str(bf)],
        "rlnc-verify": ["rlnc-verify", "--network", str(bf), "--n", "4", "--trials", "2000", "--seed", "5"],
        "simulate-network": ["simulate", "--model", str(model), "--network", str(net), "--n", "8",
                             "--trials", "40", "--seed", "5"],
        "simulate-scenario": ["simulate", "--model", str(model), "--scenario", "A", "--rates", "1.15", "0.15",
                              "--n", "8", "--trials", "40", "--seed", "5"],
    }
    differing = []
    for name, args in commands.items():
        outs = []
        for run in (1, 2):
            out = tmp / f"{name}_{run}.out"
            if cli_main(args + ["--out", str(out)]) != 0:
                differing.append(f"{name} (exit code)")
                break
            files = [out] + ([out.with_name(out.stem + "_closed_form.csv")] if name == "examples" else [])
            outs.append(b"".join(p.read_bytes() for p in files))
        if len(outs) == 2 and outs[0] != outs[1]:
            differing.append(name)
    ok = not differing
    return ok, f"{len(commands)} commands re-run" + ("" if ok else f"; differing: {differing}")


def test_criterion_10_determinism(tmp_path):
    ok, detail = criterion_10(tmp_path)
    assert report(10, "byte-identical reruns", ok, detail), detail


if __name__ == "__main__":
    import tempfile

    runs = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8, criterion_9]
    names = [
        "closed-form oracle equivalence", "example 1 frontiers coincide", "example 2 dominance and common corner",
        "case B = case A minus I(Y;A)", "collision upper CI never exceeds the bound", "butterfly multicast threshold",
        "max-flow equals exhaustive min cut", "end-to-end achievability", "GF(2^8) exhaustive and (I-F)^-1 exact",
    ]
    failed = 0
    for i, (fn, name) in enumerate(zip(runs, names), start=1):
        ok, detail = fn()
        failed += not report(i, name, ok, detail)
    with tempfile.TemporaryDirectory() as d:
        ok, detail = criterion_10(Path(d))
        failed += not report(10, "byte-identical reruns", ok, detail)
    sys.exit(1 if failed else 0)
