import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from tawcet.dbm import (DBM, INF, INFINITY, Bound, CanonicalFormError, DimensionError,
                        bound_add, canonicalize, dbm_universe, dbm_zero, decode, diagonal_ok,
                        encode, includes, intersect, is_consistent, lower_bound, raw_add, reset,
                        reset_by_table, unconstrained_cells, up, upper_bound)
from tawcet.testing import random_canonical_zone

FINITE_BOUNDS = [Bound(c, s) for c in range(-5, 6) for s in (False, True)]
ALL_BOUNDS = FINITE_BOUNDS + [INFINITY]


def two_clock_zones():
    """Every 2-clock zone built from non-strict clock intervals with constants
    up to 5 and one difference constraint of either strictness."""
    uppers = [INF] + [2 * c + 1 for c in range(6)]
    lowers = [-2 * c + 1 for c in range(6)]
    diffs = [INF] + [encode(b) for b in FINITE_BOUNDS]
    for u1, u2, l1, l2, d in itertools.product(uppers, uppers, lowers, lowers, diffs):
        cells = unconstrained_cells(3)
        cells[3], cells[6] = u1, u2
        cells[1], cells[2] = l1, l2
        cells[1 * 3 + 2] = d
        yield DBM(3, cells)


TWO_CLOCK = list(two_clock_zones())
TWO_CLOCK_CANON = [z for z in map(canonicalize, TWO_CLOCK) if diagonal_ok(z.cells, 3)]


def contains(d: DBM, v) -> bool:
    """Membership of a valuation (index 0 is the reference clock, value 0)."""
    n = d.dim
    for i in range(n):
        for j in range(n):
            b = d[i, j]
            if b.is_infinite:
                continue
            diff = v[i] - v[j]
            if diff > b.weight or (b.strict and diff == b.weight):
                return False
    return True


GRID = [(0, Fraction(a, 2), Fraction(b, 2)) for a in range(14) for b in range(14)]


# -- bounds -------------------------------------------------------------------

def test_encoding_order_matches_bound_order():
    ordered = sorted(ALL_BOUNDS, key=encode)
    for a, b in zip(ordered, ordered[1:]):
        assert a.weight < b.weight or (a.weight == b.weight and a.strict and not b.strict)


@pytest.mark.parametrize("b", ALL_BOUNDS, ids=str)
def test_decode_inverts_encode(b):
    assert decode(encode(b)) == b


def test_infinite_bound_must_be_strict():
    with pytest.raises(ValueError):
        Bound(math.inf, False)


def test_fractional_weight_rejected():
    with pytest.raises(ValueError):
        Bound(1.5)


def test_overflow_detected():
    with pytest.raises(OverflowError):
        Bound(1 << 41)
    with pytest.raises(OverflowError):
        bound_add(Bound(1 << 40), Bound(1 << 40))


@pytest.mark.parametrize("a,b", list(itertools.product(ALL_BOUNDS, repeat=2)))
def test_bound_addition(a, b):
    s = bound_add(a, b)
    if a.is_infinite or b.is_infinite:
        assert s == INFINITY
    else:
        assert s == Bound(a.weight + b.weight, a.strict or b.strict)
    assert decode(raw_add(encode(a), encode(b))) == s


@pytest.mark.parametrize("a,b", list(itertools.product(ALL_BOUNDS, repeat=2)))
def test_intersection_strictness_table(a, b):
    d1 = DBM.from_bounds(2, {(1, 0): a})
    d2 = DBM.from_bounds(2, {(1, 0): b})
    got = intersect(d1, d2)[1, 0]
    if a.is_infinite or b.is_infinite:
        assert got == (b if a.is_infinite else a)
    elif a.weight < b.weight:
        assert got == a
    elif a.weight > b.weight:
        assert got == b
    else:
        assert got == Bound(a.weight, a.strict or b.strict)


# -- exhaustive two-clock laws ------------------------------------------------

def test_two_clock_domain_size():
    assert len(TWO_CLOCK) == 7 * 7 * 6 * 6 * 23
    assert len(TWO_CLOCK_CANON) > 10_000


def test_canonicalize_idempotent_exhaustive():
    for c in TWO_CLOCK_CANON:
        assert canonicalize(DBM(3, c.cells)) == c


def test_canonical_cells_are_tight_exhaustive():
    for z in TWO_CLOCK_CANON:
        c = z.cells
        for i, j, k in itertools.product(range(3), repeat=3):
            assert c[i * 3 + j] <= raw_add(c[i * 3 + k], c[k * 3 + j])


def test_canonicalize_preserves_valuations():
    rng = random.Random(3)
    for z in rng.sample(TWO_CLOCK, 150):
        c = canonicalize(z)
        for v in GRID:
            assert contains(z, v) == contains(c, v)


def test_up_preserves_canonical_form_exhaustive():
    for z in TWO_CLOCK_CANON:
        u = up(z)
        assert u.canonical
        assert canonicalize(DBM(3, u.cells)) == u


def test_up_is_time_successor():
    rng = random.Random(4)
    for z in rng.sample(TWO_CLOCK_CANON, 100):
        u = up(z)
        for v in GRID:
            if contains(z, v):
                for d in (Fraction(1, 2), 3, 17):
                    assert contains(u, (0, v[1] + d, v[2] + d))


@pytest.mark.parametrize("clocks", [(1,), (2,), (1, 2)])
def test_reset_restoration_equals_full_canonicalization_exhaustive(clocks):
    for z in TWO_CLOCK_CANON:
        fast = reset(z, clocks)
        assert fast == canonicalize(reset_by_table(z, clocks))
        assert fast == canonicalize(DBM(3, fast.cells))


def test_reset_semantics():
    z = canonicalize(DBM.from_bounds(3, {(1, 0): Bound(4), (0, 1): Bound(-2), (2, 0): Bound(3)}))
    r = reset(z, [1])
    assert r[1, 0] == Bound(0) and r[0, 1] == Bound(0)
    assert r[2, 0] == Bound(3)


# -- randomized laws on larger zones ------------------------------------------

zones = st.builds(lambda seed, k: random_canonical_zone(random.Random(seed), k),
                  st.integers(0, 10**9), st.integers(2, 5))


@given(zones)
def test_canonicalize_idempotent_random(z):
    assert canonicalize(DBM(z.dim, z.cells)) == z


@given(zones)
def test_up_preserves_canonical_form_random(z):
    assert canonicalize(DBM(z.dim, up(z).cells)) == up(z)


@given(zones, st.data())
def test_reset_restoration_random(z, data):
    clocks = data.draw(st.sets(st.integers(1, z.dim - 1), min_size=1))
    assert reset(z, clocks) == canonicalize(reset_by_table(z, clocks))


@given(zones, zones)
def test_intersection_is_greatest_lower_bound(a, b):
    if a.dim != b.dim:
        return
    c = canonicalize(intersect(a, b))
    if not diagonal_ok(c.cells, c.dim):
        return
    assert includes(a, c) and includes(b, c)


@given(zones)
def test_inclusion_reflexive_and_up_monotone(z):
    assert includes(z, z)
    assert includes(up(z), z)
    assert includes(dbm_universe(z.dim), z)


# -- errors and accessors -----------------------------------------------------

def test_dimension_errors():
    with pytest.raises(DimensionError):
        intersect(dbm_zero(2), dbm_zero(3))
    with pytest.raises(DimensionError):
        DBM(2, [1, 1, 1])
    with pytest.raises(DimensionError):
        reset(dbm_zero(2), [2])
    with pytest.raises(DimensionError):
        dbm_zero(0)
    with pytest.raises(DimensionError):
        upper_bound(dbm_zero(2), 0)


def test_operations_require_canonical_input():
    raw = DBM(2, unconstrained_cells(2))
    with pytest.raises(CanonicalFormError):
        up(raw)
    with pytest.raises(CanonicalFormError):
        includes(raw, dbm_zero(2))


def test_consistency():
    empty = DBM.from_bounds(2, {(1, 0): Bound(2), (0, 1): Bound(-3)})
    assert not is_consistent(empty)
    touching = DBM.from_bounds(2, {(1, 0): Bound(3, True), (0, 1): Bound(-3)})
    assert not is_consistent(touching)
    assert is_consistent(dbm_zero(3))


def test_bound_accessors_and_rendering():
    z = canonicalize(DBM.from_bounds(3, {(1, 0): Bound(5, True), (0, 1): Bound(-2)}))
    assert upper_bound(z, 1) == Bound(5, True)
    assert lower_bound(z, 1) == Bound(-2)
    assert "x1 - x0 < 5" in z.constraints()
    assert z.pretty(["0", "a", "b"]) == ["a >= 2", "a < 5"]
