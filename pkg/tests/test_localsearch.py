import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memetic_balance.core import BitString, RngStream, neighbors
from memetic_balance.functions import ConstantFn, CountingFunction, LongPathFn, OneMax, SectionedPathFn, SectionedPathParams
from memetic_balance.localsearch import (
    FIRST_IMPROVEMENT,
    FIRST_IMPROVEMENT_SHUFFLED,
    RANDOM_IMPROVEMENT,
    STEEPEST_ASCENT,
    EvalCounter,
    PivotRule,
    local_search,
)

ALL_PIVOTS = [FIRST_IMPROVEMENT, FIRST_IMPROVEMENT_SHUFFLED, STEEPEST_ASCENT, RANDOM_IMPROVEMENT]
PIVOT_IDS = [str(p) for p in ALL_PIVOTS]


def is_local_optimum(f, x):
    fx = f.evaluate(x)
    return all(f.evaluate(y) <= fx for y in neighbors(x))


@pytest.mark.parametrize("pivot", ALL_PIVOTS, ids=PIVOT_IDS)
def test_zero_depth(pivot):
    y = BitString.from_str("0101")
    out = local_search(y, OneMax(4), 0, pivot, RngStream(1))
    assert out.point == y
    assert out.iterations_used == 0
    assert out.converged is False


@pytest.mark.parametrize("pivot", ALL_PIVOTS, ids=PIVOT_IDS)
@pytest.mark.parametrize("n", [1, 5, 12])
def test_onemax_climbs_to_optimum(pivot, n):
    out = local_search(BitString.zeros(n), OneMax(n), n, pivot, RngStream(2))
    assert out.point == BitString.ones(n)
    assert out.iterations_used == n
    # one more probe round would be needed to certify; depth n stops first
    more = local_search(BitString.zeros(n), OneMax(n), n + 1, pivot, RngStream(2))
    assert more.converged and more.iterations_used == n


@pytest.mark.parametrize("pivot", ALL_PIVOTS, ids=PIVOT_IDS)
def test_longpath_forced_trajectory(pivot):
    f = LongPathFn(9, 2)
    out = local_search(f.path[0], f, 5, pivot, RngStream(3))
    assert out.point == f.path[5]
    assert out.converged is False
    assert out.iterations_used == 5


def test_pivot_equivalence_on_path():
    f = LongPathFn(7, 2)
    for start in range(len(f.path) - 1):
        for d in (1, 3):
            pts = {local_search(f.path[start], f, d, p, RngStream(4)).point for p in ALL_PIVOTS}
            assert pts == {f.path[min(start + d, len(f.path) - 1)]}


def test_plateau_stops_immediately():
    f = SectionedPathFn(SectionedPathParams(dim=13, k=3, D=8, gap=3, sections=4))
    on = set(f.path.values) | set(f.target_values)
    # a zero-fitness point whose neighbours all score zero as well
    v = next(
        v
        for v in range(1 << 13)
        if v not in on and all(f.evaluate_value(v ^ (1 << i)) == 0 for i in range(13))
    )
    out = local_search(BitString(13, v), f, 10, FIRST_IMPROVEMENT)
    assert out.iterations_used == 0 and out.converged


def test_constant_converges_without_moving():
    out = local_search(BitString.zeros(4), ConstantFn(4), 3, STEEPEST_ASCENT)
    assert out.converged and out.iterations_used == 0


def test_steepest_tie_breaks_to_lowest_index():
    # OneMax from 0000: all four moves tie; steepest must set bit 0
    out = local_search(BitString.zeros(4), OneMax(4), 1, STEEPEST_ASCENT)
    assert str(out.point) == "1000"


def test_first_improvement_scans_ascending():
    out = local_search(BitString.from_str("0101"), OneMax(4), 1, FIRST_IMPROVEMENT)
    assert str(out.point) == "1101"


def test_random_improvement_is_uniform():
    rng = RngStream(5)
    counts = {}
    for _ in range(8000):
        p = str(local_search(BitString.zeros(4), OneMax(4), 1, RANDOM_IMPROVEMENT, rng).point)
        counts[p] = counts.get(p, 0) + 1
    assert set(counts) == {"1000", "0100", "0010", "0001"}
    assert all(abs(c - 2000) < 200 for c in counts.values())


def test_randomised_rules_need_rng():
    with pytest.raises(ValueError):
        local_search(BitString.zeros(3), OneMax(3), 1, RANDOM_IMPROVEMENT)
    with pytest.raises(ValueError):
        local_search(BitString.zeros(3), OneMax(3), 1, FIRST_IMPROVEMENT_SHUFFLED)


def test_dimension_and_depth_checks():
    with pytest.raises(ValueError):
        local_search(BitString.zeros(3), OneMax(4), 1)
    with pytest.raises(ValueError):
        local_search(BitString.zeros(4), OneMax(4), -1)


def test_pivot_parse():
    assert PivotRule.parse("steepest") is STEEPEST_ASCENT
    assert str(PivotRule.parse("first-shuffled")) == "first-shuffled"
    with pytest.raises(ValueError):
        PivotRule.parse("best")
    assert FIRST_IMPROVEMENT.deterministic and STEEPEST_ASCENT.deterministic
    assert not RANDOM_IMPROVEMENT.deterministic


@pytest.mark.parametrize("pivot", ALL_PIVOTS, ids=PIVOT_IDS)
def test_evaluation_accounting(pivot):
    f = LongPathFn(9, 2)
    rng = RngStream(6)
    for v in range(0, 512, 7):
        cf = CountingFunction(f)
        counter = EvalCounter()
        out = local_search(BitString(9, v), cf, 6, pivot, rng, counter)
        assert counter.count == cf.count == out.evaluations


def test_known_fitness_skips_start_evaluation():
    f = OneMax(6)
    cf = CountingFunction(f)
    out = local_search(BitString.zeros(6), cf, 2, STEEPEST_ASCENT, fitness=0)
    assert cf.count == out.evaluations == 12


def test_first_improvement_counts_probes_until_success():
    cf = CountingFunction(OneMax(4))
    out = local_search(BitString.from_str("1101"), cf, 1, FIRST_IMPROVEMENT, fitness=3)
    assert out.evaluations == 3  # bits 0 and 1 fail, bit 2 succeeds


fd_small = SectionedPathFn(SectionedPathParams(dim=7, k=3, D=4, gap=2, sections=2))
FUNCTIONS = [OneMax(9), LongPathFn(9, 2), LongPathFn(10, 3), fd_small]


@settings(max_examples=200, deadline=None)
@given(
    st.sampled_from(FUNCTIONS),
    st.integers(0, (1 << 13) - 1),
    st.integers(0, 12),
    st.sampled_from(ALL_PIVOTS),
    st.integers(0, 2**32),
)
def test_monotone_and_certified(f, raw, depth, pivot, seed):
    y = BitString(f.dim, raw % (1 << f.dim))
    out = local_search(y, f, depth, pivot, RngStream(seed))
    assert out.iterations_used <= depth
    fy = f.evaluate(y)
    assert out.fitness == f.evaluate(out.point)
    assert out.fitness >= fy
    if out.iterations_used > 0:
        assert out.fitness > fy
    if out.converged:
        assert is_local_optimum(f, out.point)


@pytest.mark.parametrize("pivot", ALL_PIVOTS, ids=PIVOT_IDS)
def test_strictly_increasing_trajectory(pivot):
    f = LongPathFn(11, 2)
    rng = RngStream(7)
    for v in range(0, 1 << 11, 37):
        prev = f.evaluate(BitString(11, v))
        x = BitString(11, v)
        for _ in range(15):
            out = local_search(x, f, 1, pivot, rng)
            if out.iterations_used == 0:
                break
            assert out.fitness > prev
            prev, x = out.fitness, out.point


def test_unbounded_depth():
    f = LongPathFn(7, 2)
    out = local_search(f.path[0], f, None, FIRST_IMPROVEMENT)
    assert out.point == f.path[-1] and out.converged
    assert out.iterations_used == len(f.path) - 1
