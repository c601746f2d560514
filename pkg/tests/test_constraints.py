import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cqa.constraints import (
    ClauseIndicator,
    Gf2Solution,
    InfeasibleError,
    LinearZ,
    ZParity,
    bits_to_int,
    constraint_as_hamiltonian,
    constraint_from_json,
    constraint_to_json,
    eval_constraint,
    gf2_rank,
    gf2_solve,
    int_to_bits,
    sector_basis,
)
from cqa.constraints import _dfs_sector
from cqa.encodings import gi_constraints
from cqa.pauli import to_matrix

from conftest import brute_force_sector, gf2_brute_force


def test_bit_helpers_round_trip():
    assert bits_to_int("0011") == 0b1100
    assert int_to_bits(0b1100, 4) == "0011"


def test_eval_linear_two_up_two_down():
    assert eval_constraint(LinearZ((1, 1, 1, 1), 0), bits_to_int("0011")) == 0


def test_eval_parity_one_down():
    assert eval_constraint(ZParity((0, 1, 2)), bits_to_int("010")) == -1


def test_eval_clause():
    c = ClauseIndicator((0, 1, 2), bits_to_int("000"))
    assert c.violating_pair == (0, 7)
    assert eval_constraint(c, bits_to_int("000")) == 1
    assert eval_constraint(c, bits_to_int("111")) == 1
    assert eval_constraint(c, bits_to_int("010")) == 0
    assert sum(eval_constraint(c, s) == 0 for s in range(8)) == 6


def test_eval_out_of_range():
    with pytest.raises(ValueError):
        eval_constraint(ZParity((0, 5)), 0, n=3)


def test_linear_parity_mismatch_rejected():
    with pytest.raises(ValueError):
        LinearZ((1, 1, 1), 0)


def test_occupation_conversion():
    # one up among three -> 1 - 2 = -1 in spin units
    assert LinearZ.from_occupation(3, [0, 1, 2], 1).target == -1


def test_sector_magnetization_zero():
    sec = sector_basis([LinearZ((1,) * 4, 0)], 4)
    assert sec.size == 6


def test_sector_gi_permutations_against_brute_force():
    n = 3
    sec = sector_basis(gi_constraints(n), n * n)

    def one_up_per_line(sp):
        grid = np.array(sp).reshape(n, n)
        return all((grid == 1).sum(axis=1) == 1) and all((grid == 1).sum(axis=0) == 1)

    assert sec.states.tolist() == brute_force_sector(one_up_per_line, n * n)
    assert sec.size == 6


def test_sector_parity_pair():
    sec = sector_basis([ZParity((0, 1), 1)], 2)
    assert sec.bitstrings() == ["00", "11"]


def test_sector_empty_is_flagged():
    sec = sector_basis([ZParity((0,), 1), ZParity((0,), -1)], 2)
    assert not sec.feasible and sec.size == 0


def test_sector_index_map():
    sec = sector_basis([LinearZ((1,) * 5, 1)], 5)
    assert np.all(np.diff(sec.states) > 0)
    for k, s in enumerate(sec.states):
        assert sec.index_of[int(s)] == k
    assert sec.index([int(sec.states[2]), 0]).tolist() == [2, -1]


constraint_strategy = st.one_of(
    st.builds(
        lambda n, sites, occ: LinearZ.from_occupation(n, sites, min(occ, len(sites))),
        st.just(8),
        st.sets(st.integers(0, 7), min_size=1, max_size=8).map(sorted),
        st.integers(0, 8),
    ),
    st.builds(lambda sup, t: ZParity(tuple(sup), t), st.sets(st.integers(0, 7), min_size=1, max_size=4).map(sorted), st.sampled_from([1, -1])),
    st.builds(lambda sup, v: ClauseIndicator(tuple(sup), v), st.permutations(range(8)).map(lambda p: p[:3]), st.integers(0, 7)),
)


def _oracle_value(c, sp):
    if isinstance(c, LinearZ):
        return sum(a * z for a, z in zip(c.coeffs, sp))
    if isinstance(c, ZParity):
        return int(np.prod([sp[i] for i in c.support]))
    bits = [(1 - sp[i]) // 2 for i in c.support]
    cfg = sum(b << k for k, b in enumerate(bits))
    return int(cfg in c.violating_pair)


@given(st.lists(constraint_strategy, min_size=1, max_size=3))
def test_sector_equals_brute_force_filter(cs):
    n = 8
    sec = sector_basis(cs, n)
    oracle = brute_force_sector(lambda sp: all(_oracle_value(c, sp) == c.target for c in cs), n)
    assert sec.states.tolist() == oracle


@given(st.lists(constraint_strategy, min_size=1, max_size=3))
def test_dfs_enumeration_matches_filter(cs):
    assert sorted(_dfs_sector(cs, 8).tolist()) == sector_basis(cs, 8).states.tolist()


def test_dfs_used_for_large_registers():
    # GI n = 5: 25 sites, 120 permutation states
    sec = sector_basis(gi_constraints(5), 25)
    assert sec.size == 120


@given(constraint_strategy)
def test_constraint_hamiltonian_diagonal_matches_eval(c):
    n = 8
    m = to_matrix(constraint_as_hamiltonian(c, n))
    assert np.count_nonzero(m - np.diag(np.diag(m))) == 0
    np.testing.assert_allclose(np.diag(m).real, eval_constraint(c, np.arange(1 << n)), atol=1e-12)


def test_constraint_hamiltonian_examples():
    h = constraint_as_hamiltonian(LinearZ((1, 1), 0))
    assert {t.label for t in h.terms} == {"ZI", "IZ"}
    h = constraint_as_hamiltonian(ZParity((0, 1, 2)))
    assert [t.label for t in h.terms] == ["ZZZ"]
    m = to_matrix(constraint_as_hamiltonian(ClauseIndicator((0, 1, 2), 0)))
    expected = np.zeros(8)
    expected[[0, 7]] = 1
    np.testing.assert_allclose(m, np.diag(expected), atol=1e-15)


def test_constraint_json_round_trip():
    for c in (LinearZ((1, 0, 1), 0), ZParity((2, 0), -1), ClauseIndicator((4, 1, 2), 5)):
        assert constraint_from_json(constraint_to_json(c)) == c


# -- GF(2) ---------------------------------------------------------------------


def _check_solution(sol: Gf2Solution, parities, n_exhaustive_max=12, rng=None):
    indep = sol.independent_vars
    if len(indep) <= n_exhaustive_max:
        assigns = itertools.product((0, 1), repeat=len(indep))
    else:
        assigns = (tuple(rng.integers(0, 2, len(indep))) for _ in range(10_000))
    for bits in assigns:
        full = sol.assign(dict(zip(indep, bits)))
        for p in parities:
            assert sum(full[i] for i in p.support) % 2 == p.rhs


def test_gf2_single_row():
    sol = gf2_solve([ZParity((0, 1, 2))])
    assert sol.dependent_vars == (2,)
    assert sol.expressions == ((0, 1),)
    assert sol.independent_vars == (0, 1)


def test_gf2_chain_substitution():
    ps = [ZParity((0, 1, 2)), ZParity((2, 3, 4))]
    sol = gf2_solve(ps)
    assert sol.dependent_vars == (2, 4)
    assert sol.expressions == ((0, 1), (0, 1, 3))
    _check_solution(sol, ps)


def test_gf2_contradiction():
    with pytest.raises(InfeasibleError):
        gf2_solve([ZParity((0,), -1), ZParity((0,), 1)])


def test_gf2_inhomogeneous_rows():
    ps = [ZParity((0, 1), -1), ZParity((1, 2), 1)]
    sol = gf2_solve(ps)
    assert 1 in sol.constants
    _check_solution(sol, ps)


def test_gf2_redundant_rows_dropped():
    ps = [ZParity((0, 1)), ZParity((1, 2)), ZParity((0, 2))]
    sol = gf2_solve(ps)
    assert len(sol.dependent_vars) == 2
    _check_solution(sol, ps)


def test_gf2_json_round_trip():
    sol = gf2_solve([ZParity((0, 1, 2)), ZParity((2, 3, 4), -1)])
    assert Gf2Solution.from_json(sol.to_json()) == sol
    assert set(sol.to_json()) >= {"dependent", "exprs"}


parity_systems = st.integers(1, 12).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.lists(
            st.tuples(st.sets(st.integers(0, n - 1), min_size=1, max_size=n), st.sampled_from([1, -1])),
            min_size=1,
            max_size=8,
        ),
    )
)


@given(parity_systems)
def test_gf2_agrees_with_brute_force(system):
    n, rows = system
    ps = [ZParity(tuple(sorted(s)), t) for s, t in rows]
    oracle = gf2_brute_force([(p.support, p.rhs) for p in ps], n)
    try:
        sol = gf2_solve(ps, n)
    except InfeasibleError:
        assert oracle == []
        return
    assert oracle
    _check_solution(sol, ps)
    # solution count: 2 ** (#independent)
    assert len(oracle) == 2 ** len(sol.independent_vars)
    # dependent/independent partition all sites
    assert sorted(sol.dependent_vars + sol.independent_vars) == list(range(n))
    # dependents never appear in expressions
    assert not set(sol.dependent_vars) & {i for e in sol.expressions for i in e}


@given(st.lists(st.integers(0, 255), max_size=10))
def test_gf2_rank_matches_numpy_elimination(rows):
    # oracle: rank of the row space = log2 of the span size
    span = {0}
    for r in rows:
        span |= {s ^ r for s in span}
    assert 2 ** gf2_rank(rows) == len(span)
