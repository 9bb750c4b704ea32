import math
import random

import pytest
from hypothesis import given, strategies as st

from tawcet.dbm import DBM, INF, Bound, canonicalize, decode, encode, includes, unconstrained_cells
from tawcet.extrapolation import (BoundsContext, dot_cells, extra_LU, extra_LU_plus, extra_M,
                                  extra_M_plus, in_m_form, is_partially_canonical, mcanon,
                                  mcanon_after_extrapolation, mextra_M)
from tawcet.testing import random_canonical_zone

M = 10


def random_context(rng, n, m=M, delta=None):
    lower, upper = {}, {}
    for i in range(1, n):
        if i == delta:
            continue
        if rng.random() < 0.8:
            lower[i] = rng.randint(0, m)
        if rng.random() < 0.8:
            upper[i] = rng.randint(0, m)
    # At least one clock carries the global maximum.
    first = 1 if delta != 1 else 2
    upper[first] = m
    return BoundsContext(m, n, lower, upper, delta)


def zone_and_context(seed, clocks, delta=False):
    rng = random.Random(seed)
    z = random_canonical_zone(rng, clocks, max_const=2 * M)
    d = z.dim - 1 if delta else None
    return z, random_context(rng, z.dim, delta=d)


BOUNDARY = [-M - 1, -M, M, M + 1]


CASES = [(w, s) for w in BOUNDARY for s in (False, True)] + [(math.inf, True)]


@pytest.mark.parametrize("weight,strict", CASES)
def test_extra_m_case_table(weight, strict):
    b = Bound(weight, strict)
    # A single difference cell in an otherwise free zone is already closed.
    cells = unconstrained_cells(3)
    cells[1 * 3 + 2] = encode(b)
    out = extra_M(DBM(3, cells, canonical=True), BoundsContext(M, 3))
    got = out[1, 2]
    if weight > M:
        assert got.is_infinite
    elif weight < -M:
        assert got == Bound(-M, True)
    else:
        assert got == b


def test_extra_m_keeps_diagonal():
    z = canonicalize(DBM.from_bounds(2, {(0, 1): Bound(-50), (1, 0): Bound(60)}))
    out = extra_M(z, BoundsContext(M, 2))
    assert out[0, 0] == Bound(0) and out[1, 1] == Bound(0)
    assert out[1, 0].is_infinite and out[0, 1] == Bound(-M, True)


@pytest.mark.parametrize("seed", range(1000))
def test_inclusion_chain(seed):
    z, ctx = zone_and_context(seed, 1 + seed % 4)
    em = canonicalize(extra_M(z, ctx))
    elu = canonicalize(extra_LU(z, ctx))
    assert includes(em, z)
    assert includes(elu, em)
    assert includes(canonicalize(extra_M_plus(z, ctx)), em)
    assert includes(canonicalize(extra_LU_plus(z, ctx)), elu)


@given(st.integers(0, 10**9), st.integers(1, 4))
def test_extra_m_output_in_m_form(seed, clocks):
    z, ctx = zone_and_context(seed, clocks)
    assert in_m_form(extra_M(z, ctx), M)


@given(st.integers(0, 10**9), st.integers(1, 4))
def test_partial_extrapolation_leaves_observer_untouched(seed, clocks):
    z, ctx = zone_and_context(seed, clocks, delta=True)
    out, changed = mextra_M(z, ctx)
    n, d = z.dim, ctx.delta_index
    for k in range(n):
        assert out.cells[d * n + k] == z.cells[d * n + k]
        assert out.cells[k * n + d] == z.cells[k * n + d]
    assert in_m_form(out, M, d)
    assert sorted(changed) == sorted(
        (i, j) for i in range(n) for j in range(n) if out.cells[i * n + j] != z.cells[i * n + j])


@pytest.mark.parametrize("seed", range(500))
def test_untouched_cells_survive_retightening(seed):
    z, ctx = zone_and_context(seed, 1 + seed % 4, delta=True)
    ext, changed = mextra_M(z, ctx)
    local = mcanon_after_extrapolation(ext, ctx, changed)
    full = mcanon(ext, ctx)
    n = z.dim
    touched = set(changed)
    for i in range(n):
        for j in range(n):
            if (i, j) not in touched:
                assert full.cells[i * n + j] == z.cells[i * n + j]
                assert local.cells[i * n + j] == z.cells[i * n + j]
    assert local == full


@given(st.integers(0, 10**9), st.integers(1, 4))
def test_retightening_from_partial_form(seed, clocks):
    z, ctx = zone_and_context(seed, clocks, delta=True)
    start = mcanon(extra_M(z, ctx), ctx)
    assert is_partially_canonical(start, ctx.delta_index)
    ext, changed = mextra_M(start, ctx)
    assert mcanon_after_extrapolation(ext, ctx, changed) == mcanon(ext, ctx)


@given(st.integers(0, 10**9), st.integers(1, 4))
def test_canonical_is_partially_canonical(seed, clocks):
    z, ctx = zone_and_context(seed, clocks, delta=True)
    assert is_partially_canonical(z, ctx.delta_index)
    assert is_partially_canonical(mcanon(DBM(z.dim, z.cells), ctx), ctx.delta_index)


def test_split_closure_matches_full_when_observer_is_free():
    # Observer row and column unconstrained: no shortest path goes through it.
    rng = random.Random(11)
    for _ in range(200):
        z = random_canonical_zone(rng, 3)
        n = z.dim + 1
        cells = unconstrained_cells(n)
        for i in range(z.dim):
            for j in range(z.dim):
                cells[i * n + j] = z.cells[i * z.dim + j]
        loose = [c + 2 if c < INF and i != j else c
                 for (i, j), c in zip(((i, j) for i in range(n) for j in range(n)), cells)]
        d = DBM(n, loose)
        ctx = BoundsContext(M, n, delta_index=n - 1)
        assert mcanon(d, ctx).cells == canonicalize(d).cells


def test_split_closure_keeps_dot_cells_loose():
    # x1 - δ <= 0 and δ <= 3 would give x1 <= 3, but dot cells ignore observer paths.
    d = DBM.from_bounds(3, {(1, 2): Bound(0), (2, 0): Bound(3)})
    ctx = BoundsContext(M, 3, delta_index=2)
    out = mcanon(d, ctx)
    assert out[1, 0].is_infinite
    assert canonicalize(d)[1, 0] == Bound(3)
    assert is_partially_canonical(out, 2)


def test_partial_extrapolation_requires_observer_index():
    z = canonicalize(DBM(2, unconstrained_cells(2)))
    with pytest.raises(ValueError):
        mextra_M(z, BoundsContext(M, 2))


def test_dot_cells_drop_observer():
    z = canonicalize(DBM(3, unconstrained_cells(3)))
    assert len(dot_cells(z, 2)) == 4
    assert decode(dot_cells(z, 2)[0]) == Bound(0)
