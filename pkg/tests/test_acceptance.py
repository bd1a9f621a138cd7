"""Acceptance suite.

Every test records a single verdict line through the `verdict` fixture; the
lines are repeated in the terminal summary. Run on its own with

    pytest tests/test_acceptance.py -v -s
"""

import csv
import filecmp
import io
import math
import time

import numpy as np
import pytest

from memetic_balance.cli import CalibrationInfeasible, cmd_race_calibrate, main, resolve_spec
from memetic_balance.core import BitString, RngStream, derive_seed
from memetic_balance.engine import MAConfig, run
from memetic_balance.functions import (
    ConstantFn,
    LongPathFn,
    OneMax,
    RaceFn,
    RaceParams,
    SectionedPathFn,
    SectionedPathParams,
)
from memetic_balance.localsearch import FIRST_IMPROVEMENT, STEEPEST_ASCENT, local_search, local_search_value
from memetic_balance.stategraph import autocorrelation, build_state_graph, sinks

pytestmark = pytest.mark.acceptance

DEPTH_INSTANCE = [
    "function=f_d", "dim=28", "k=3", "D=10", "gap=4", "sections=30",
    "mu=1", "lambda=28", "schedule=every_tau", "tau=1",
    "delta_values=6,10,14", "pilot_values=10", "replicates=50", "master_seed=7",
]
RACE_CALIBRATION = [
    "half_dim=13", "k=4", "delta=4", "tau=8", "replicates=50", "master_seed=11",
]


def sets(pairs):
    out = []
    for p in pairs:
        out += ["--set", p]
    return out


def read_rows(path):
    with open(path, encoding="utf-8") as fh:
        body = [line for line in fh.read().splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


@pytest.fixture(scope="module")
def outdir(tmp_path_factory):
    return tmp_path_factory.mktemp("acceptance")


def test_c01_path_structure(outdir, verdict):
    start = time.perf_counter()
    assert main(["verify-paths", "--set", "k_values=2,3", "--set", "max_dim=13", "--out", str(outdir / "paths")]) == 0
    rows = read_rows(outdir / "paths" / "paths.csv")
    bad = sum(int(r["violations"]) for r in rows) + sum(r["length"] != r["expected_length"] for r in rows)
    elapsed = time.perf_counter() - start
    verdict(1, bad == 0 and elapsed < 10, f"{len(rows)} paths, {bad} violations, {elapsed:.1f}s")


def test_c02_only_improving_successor(verdict):
    start = time.perf_counter()
    violations = checked = 0
    for dim in (5, 7, 9, 11):
        f = LongPathFn(dim, 2)
        vals = f.path.values
        for i, v in enumerate(vals[:-1]):
            fv = f.evaluate_value(v)
            better = [v ^ (1 << b) for b in range(dim) if f.evaluate_value(v ^ (1 << b)) > fv]
            violations += better != [vals[i + 1]]
            checked += 1
    elapsed = time.perf_counter() - start
    verdict(2, violations == 0 and elapsed < 30, f"{checked} path points, {violations} violations, {elapsed:.1f}s")


def _fixtures():
    return [
        ("onemax(11)", OneMax(11)),
        ("constant(4)", ConstantFn(4)),
        ("longpath(9,k=2)", LongPathFn(9, 2)),
        ("longpath(11,k=2)", LongPathFn(11, 2)),
        ("longpath(10,k=3)", LongPathFn(10, 3)),
        ("f_d(7,3,D=4,gap=2,S=2)", SectionedPathFn(SectionedPathParams(7, 3, 4, 2, 2))),
        ("f_d(10,3,D=4,gap=2,S=3)", SectionedPathFn(SectionedPathParams(10, 3, 4, 2, 3))),
        ("race_con(5,4)", RaceFn(RaceParams(5, 4, 6, 2, variant="con"))),
        ("race_uncon(5,4)", RaceFn(RaceParams(5, 4, 6, 2, variant="uncon"))),
    ]


def test_c03_sinks_equal_local_search_outputs(verdict):
    start = time.perf_counter()
    mismatched = []
    for name, f in _fixtures():
        expected = {x.value for x in sinks(build_state_graph(f))}
        for pivot in (FIRST_IMPROVEMENT, STEEPEST_ASCENT):
            reached = {local_search_value(v, f.evaluate_value(v), f, None, pivot)[0] for v in range(1 << f.dim)}
            if reached != expected:
                mismatched.append(f"{name}/{pivot}")
    elapsed = time.perf_counter() - start
    ok = not mismatched and elapsed < 120
    verdict(3, ok, f"{len(_fixtures())} fixtures x 2 pivots, mismatches {mismatched or 'none'}, {elapsed:.1f}s")


def test_c04_sectioned_sink_census(verdict):
    start = time.perf_counter()
    params = SectionedPathParams(dim=7, k=3, D=4, gap=2, sections=2)
    f = SectionedPathFn(params)
    found = sinks(build_state_graph(f))
    nonzero = {x for x in found if f.evaluate(x) > 0}
    census = nonzero == set(f.section_ends()) | set(f.targets)
    top = max(f.evaluate_value(v) for v in range(1 << f.dim))
    targets_top = all(f.evaluate(t) == top for t in f.targets)
    unique_top = sum(f.evaluate_value(v) == top for v in range(1 << f.dim)) == len(f.targets)
    identity = True
    ls = f.section_length
    for i in range(2, params.sections + 1):
        prev_end = f.evaluate(f.section_point(i - 1, ls - 1))
        for d in range(ls):
            identity &= (f.evaluate(f.section_point(i, d)) > prev_end) == (d >= params.D - params.gap + 1)
    elapsed = time.perf_counter() - start
    ok = census and targets_top and unique_top and identity and elapsed < 60
    verdict(4, ok, f"census={census} targets_max={targets_top and unique_top} threshold={identity}, {elapsed:.1f}s")


def test_c05_one_plus_one_ea_on_long_paths(verdict):
    start = time.perf_counter()
    dims = (7, 11, 15, 19, 23)
    medians = []
    finite = True
    for d in dims:
        f = LongPathFn(d, 2)
        evals = []
        for i in range(200):
            rec = run(MAConfig(d, max_evaluations=10**7, seed=derive_seed(5, 1000 * d + i)), f)
            evals.append(rec.total_evals if rec.outcome.value == "OPTIMUM_FOUND" else math.inf)
        med = float(np.median(evals))
        finite &= math.isfinite(med)
        medians.append(med)
    slope = float(np.polyfit(np.log(dims), np.log(medians), 1)[0]) if finite else math.inf
    elapsed = time.perf_counter() - start
    ok = finite and slope <= 3.8 and elapsed < 600
    meds = ", ".join(f"{d}:{m:g}" for d, m in zip(dims, medians))
    verdict(5, ok, f"slope {slope:.2f}, medians {meds}, {elapsed:.0f}s")


def test_c06_hillclimber_walks_the_whole_path(verdict):
    start = time.perf_counter()
    results = []
    for d in (9, 11, 13, 15):
        f = LongPathFn(d, 2)
        for pivot in (FIRST_IMPROVEMENT, STEEPEST_ASCENT):
            out = local_search(BitString.zeros(d), f, None, pivot)
            results.append(out.converged and out.iterations_used == len(f.path) - 1)
    elapsed = time.perf_counter() - start
    verdict(6, all(results) and elapsed < 60, f"{sum(results)}/{len(results)} exact, {elapsed:.1f}s")


def test_c07_depth_phase_transition(outdir, verdict):
    start = time.perf_counter()
    assert main(["sweep-delta", *sets(DEPTH_INSTANCE), "--out", str(outdir / "depth")]) == 0
    rows = {r["value"]: float(r["success_rate"]) for r in read_rows(outdir / "depth" / "summary.csv")}
    low, mid, high = rows["6"], rows["10"], rows["14"]
    elapsed = time.perf_counter() - start
    ok = mid >= 0.8 and low <= 0.2 and high <= 0.2 and mid - max(low, high) >= 0.6 and elapsed < 900
    verdict(7, ok, f"success at delta=D-gap/D/D+gap: {low}/{mid}/{high}, {elapsed:.0f}s")


def _calibrate(out):
    spec = resolve_spec("race-calibrate", dict(p.split("=") for p in RACE_CALIBRATION), out=str(out))
    out.mkdir(exist_ok=True)
    try:
        return cmd_race_calibrate(spec)
    except CalibrationInfeasible as exc:
        return exc.best


def test_c08_frequency_phase_transition(outdir, verdict):
    start = time.perf_counter()
    cal = _calibrate(outdir / "race")
    tau = 8
    args = [
        "sweep-tau",
        *sets(
            [
                "function=race_con", f"half_dim={cal.half_dim}", f"k={cal.k}", f"L_con={cal.L_con}",
                f"L_unc={cal.L_unc}", "delta=4", f"tau_values={tau},{2 * tau}", "budget=fixed",
                "max_generations=20000", "replicates=50", "master_seed=11",
            ]
        ),
        "--out", str(outdir / "race_sweep"),
    ]
    assert main(args) == 0
    rows = {(r["value"], r["variant"]): r for r in read_rows(outdir / "race_sweep" / "summary.csv")}

    def rate(value, variant, column):
        return float(rows[(str(value), variant)][column])

    con_opt = rate(tau, "con", "success_rate")
    con_trap = rate(2 * tau, "con", "trap_rate")
    unc_trap = rate(tau, "uncon", "trap_rate")
    unc_opt = rate(2 * tau, "uncon", "success_rate")
    elapsed = time.perf_counter() - start
    ok = min(con_opt, con_trap, unc_trap, unc_opt) >= 0.8 and elapsed < 1200
    verdict(
        8,
        ok,
        f"calibrated pair L_con={cal.L_con} L_unc={cal.L_unc} feasible={cal.feasible}; "
        f"con: opt@tau={con_opt} trap@2tau={con_trap}; uncon: trap@tau={unc_trap} opt@2tau={unc_opt}, {elapsed:.0f}s",
    )


def test_c09_one_local_search_step_boost(verdict):
    # every offspring of one parent on the unconnected half is tried both ways
    start = time.perf_counter()
    f = RaceFn(RaceParams(25, 4, L_con=100, L_unc=50))
    n, j = f.dim, 5
    parent = f.point(10, j).value
    samples, chunk = 20_000_000, 1_000_000
    gen = np.random.Generator(np.random.PCG64(derive_seed(9, 0)))
    weights = np.array([1 << (n - 1 - i) for i in range(n)], dtype=np.int64)
    counts: dict[int, int] = {}
    for _ in range(samples // chunk):
        flips = gen.random((chunk, n)) < 1.0 / n
        masks, c = np.unique(flips.astype(np.int64) @ weights, return_counts=True)
        for m, k in zip(masks.tolist(), c.tolist()):
            counts[m] = counts.get(m, 0) + k
    def advanced(v):
        # progress only counts at a valid point, i.e. positive fitness
        pc, pu = f.positions_value(v)
        return pc is not None and pu is not None and pu > j

    mut_hits = ls_hits = 0
    for mask, k in counts.items():
        child = parent ^ mask
        mut_hits += k * advanced(child)
        z = local_search_value(child, f.evaluate_value(child), f, 1)[0]
        ls_hits += k * advanced(z)
    ratio = ls_hits / mut_hits if mut_hits else math.inf
    elapsed = time.perf_counter() - start
    ok = n <= ratio <= 9 * n and elapsed < 300
    verdict(9, ok, f"ratio {ratio:.1f} (3n = {3 * n}), hits ls={ls_hits} mutation={mut_hits} of {samples}, {elapsed:.0f}s")


def test_c10_onemax_autocorrelation(verdict):
    start = time.perf_counter()
    n = 50
    f = OneMax(n)
    a = autocorrelation(f, 10**6, 10, RngStream(derive_seed(10, 0))).r
    b = autocorrelation(f, 10**6, 10, RngStream(derive_seed(10, 1))).r
    closed = np.array([(1 - 2 / n) ** s for s in range(11)])
    # the closed form must first agree with the second walk before it judges the first
    validated = float(np.max(np.abs(b[1:] - closed[1:]))) <= 0.02
    err = float(np.max(np.abs(a[1:] - closed[1:])))
    elapsed = time.perf_counter() - start
    verdict(10, validated and err <= 0.02 and elapsed < 60, f"max |r - (1-2/n)^s| = {err:.4f}, reference walk ok={validated}, {elapsed:.0f}s")


def test_c11_determinism(outdir, verdict):
    start = time.perf_counter()
    first = outdir / "depth"
    if not (first / "runs.csv").exists():
        pytest.skip("needs the output of criterion 7")
    again = outdir / "depth_again"
    assert main(["sweep-delta", "--config", str(first / "summary.csv"), "--out", str(again)]) == 0
    same = [filecmp.cmp(first / name, again / name, shallow=False) for name in ("runs.csv", "runs.jsonl", "summary.csv")]
    assert main(["verify-paths", "--set", "k_values=2,3", "--set", "max_dim=13", "--out", str(outdir / "paths_again")]) == 0
    same.append(filecmp.cmp(outdir / "paths" / "paths.csv", outdir / "paths_again" / "paths.csv", shallow=False))
    if (outdir / "race" / "calibration.csv").exists():
        _calibrate(outdir / "race_again")
        same.append(filecmp.cmp(outdir / "race" / "calibration.csv", outdir / "race_again" / "calibration.csv", shallow=False))
    elapsed = time.perf_counter() - start
    verdict(11, all(same), f"{sum(same)}/{len(same)} files byte-identical, {elapsed:.0f}s")
