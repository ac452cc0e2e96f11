"""Tests for the pair-substitution quadratizer and cost assembly."""

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from puboanneal.errors import NormalizationError
from puboanneal.polynomial import MultilinearPolynomial, NormKind, bool_to_spin
from puboanneal.quadratize import (
    QuadratizationResult,
    ancilla_count,
    assemble_cost,
    quadratize,
)
from puboanneal.sat import gen_toughsat, gen_unique_pt4


def poly(n, terms):
    return MultilinearPolynomial(n, "boolean", terms)


def min_over_ancillas(q, x_bits):
    """Exact minimum of the quadratic form over all ancilla completions."""
    best = None
    for anc in itertools.product((0, 1), repeat=q.n_ancillas):
        val = q.qubo.evaluate(tuple(x_bits) + anc)
        best = val if best is None else min(best, val)
    return best


# ---------------------------------------------------------------------------
# mechanics


def test_single_cubic_term():
    q = quadratize(poly(3, {(0, 1, 2): 6}))
    assert q.ancillas == ((3, (0, 1)),)  # lexicographically first pair
    assert q.penalty_strengths == (Fraction(7),)
    assert q.problem_part.terms == {(2, 3): Fraction(6)}
    # Rosenberg penalty: xy - 2xa - 2ya + 3a, scaled by the strength
    assert q.constraint_part.terms == {
        (0, 1): Fraction(7),
        (0, 3): Fraction(-14),
        (1, 3): Fraction(-14),
        (3,): Fraction(21),
    }


def test_quadratic_input_passes_through():
    p = poly(3, {(0, 1): 2, (2,): -1, (): 5})
    q = quadratize(p)
    assert q.n_ancillas == 0
    assert q.qubo == p
    assert q.constraint_part == MultilinearPolynomial.zero(3)


def test_shared_pair_is_reused():
    # both cubics contain the pair (0, 1): one ancilla serves both,
    # with penalty strength sum(|coeff| + 1)
    q = quadratize(poly(4, {(0, 1, 2): 2, (0, 1, 3): 1}))
    assert q.ancillas == ((4, (0, 1)),)
    assert q.penalty_strengths == (Fraction(5),)
    assert q.problem_part.terms == {(2, 4): Fraction(2), (3, 4): Fraction(1)}


def test_determinism():
    f = gen_toughsat(6, seed=77)
    from puboanneal.encodings import encode_sat

    p = encode_sat(f).polynomial
    assert quadratize(p) == quadratize(p)


def test_ancilla_counts_for_generators():
    assert ancilla_count(gen_unique_pt4(6, seed=0)) == 0  # no cubic terms
    f = gen_toughsat(6, seed=0)
    assert 1 <= ancilla_count(f) <= f.n_clauses


def test_extend_assignment_and_consistency():
    q = quadratize(poly(4, {(0, 1, 2): 1, (1, 2, 3): -2}))
    for bits in itertools.product((0, 1), repeat=4):
        full = q.extend_assignment(bits)
        assert len(full) == q.n_vars
        assert q.consistent_assignment(full)
        # the penalty vanishes exactly on consistent completions
        assert q.constraint_part.evaluate(full) == 0
    with pytest.raises(ValueError):
        q.extend_assignment((0, 1))


def test_json_round_trip():
    q = quadratize(poly(3, {(0, 1, 2): 6, (0,): -2}))
    assert QuadratizationResult.from_json(q.to_json()) == q


# ---------------------------------------------------------------------------
# exactness


cubic_polys = st.dictionaries(
    st.sets(st.integers(min_value=0, max_value=5), min_size=1, max_size=3).map(
        lambda s: tuple(sorted(s))
    ),
    st.fractions(min_value=-5, max_value=5, max_denominator=4).filter(
        lambda f: f != 0
    ),
    min_size=1,
    max_size=7,
)


@settings(max_examples=30, deadline=None)
@given(cubic_polys)
def test_minimum_over_ancillas_recovers_cubic(terms):
    """For every original assignment, minimizing the quadratic form over the
    ancillas reproduces the cubic value exactly."""
    p = poly(6, terms)
    q = quadratize(p)
    for bits in itertools.product((0, 1), repeat=6):
        assert min_over_ancillas(q, bits) == p.evaluate(bits)


@settings(max_examples=20, deadline=None)
@given(cubic_polys)
def test_global_minimizers_are_consistent_at_unit_penalty(terms):
    p = poly(6, terms)
    q = quadratize(p)
    values = {
        full: q.qubo.evaluate(full)
        for full in itertools.product((0, 1), repeat=q.n_vars)
    }
    best = min(values.values())
    # every optimum of the lambda = 1 form satisfies the product constraints
    for full, val in values.items():
        if val == best:
            assert q.consistent_assignment(full)


def test_restricted_ground_state_matches_cubic_ground():
    from puboanneal.encodings import encode_sat

    f = gen_toughsat(6, seed=13)
    p = encode_sat(f).polynomial
    q = quadratize(p)
    cubic_best = min(
        p.evaluate(bits) for bits in itertools.product((0, 1), repeat=6)
    )
    full_best_args = []
    best = None
    for full in itertools.product((0, 1), repeat=q.n_vars):
        v = q.qubo.evaluate(full)
        if best is None or v < best:
            best, full_best_args = v, [full]
        elif v == best:
            full_best_args.append(full)
    assert best == cubic_best
    for full in full_best_args:
        assert p.evaluate(full[:6]) == cubic_best


# ---------------------------------------------------------------------------
# cost assembly


def test_assemble_cost_normalizes_by_largest_pair_coupling():
    q = quadratize(poly(3, {(0, 1, 2): 6}))
    h = assemble_cost(q, lam=1)
    assert max(abs(v) for v in h.j2.values()) == 1
    assert h.scale_j > 0


def test_assemble_cost_lambda_zero_drops_constraints():
    q = quadratize(poly(3, {(0, 1, 2): 6}))
    h0 = assemble_cost(q, lam=0)
    want = bool_to_spin(q.problem_part)
    assert h0.scale_j * Fraction(1) == max(abs(v) for v in want.j2.values())
    # spectrum is the pure problem part, rescaled
    for bits in itertools.product((0, 1), repeat=q.n_vars):
        assert h0.energy_of_bits(bits) * h0.scale_j == want.energy_of_bits(bits)


def test_assemble_cost_rejects_negative_lambda():
    q = quadratize(poly(3, {(0, 1, 2): 1}))
    with pytest.raises(ValueError):
        assemble_cost(q, lam=-1)


def test_assemble_cost_without_pair_couplings_raises():
    # a linear objective quadratizes to itself and has no J2 at all
    q = quadratize(poly(2, {(0,): 1, (1,): -2}))
    with pytest.raises(NormalizationError):
        assemble_cost(q, lam=1)


def test_larger_lambda_raises_penalty_scale():
    q = quadratize(poly(4, {(0, 1, 2): 1, (1, 2, 3): 1}))
    h1 = assemble_cost(q, lam=1)
    h4 = assemble_cost(q, lam=4)
    assert h4.scale_j > h1.scale_j
