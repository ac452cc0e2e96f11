"""Tests for the problem encoders: SAT penalties, the fixed-point toy
polynomial, independent-set and coloring reductions, p-spin, and resource
counting."""

import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from puboanneal.encodings import (
    Hypergraph,
    conflict_graph,
    encode_clause_penalty,
    encode_hypergraph_coloring,
    encode_mis,
    encode_pspin,
    encode_sat,
    encode_toy_polynomial,
    pspin_hamiltonian,
    resource_counts,
    toy_value_of_bits,
    toy_value_polynomial,
)
from puboanneal.polynomial import MultilinearPolynomial, bool_to_spin
from puboanneal.sat import (
    CnfFormula,
    assignment_of_index,
    clause,
    gen_toughsat,
    gen_unique_pt4,
    violation_counts,
)


def all_bits(n):
    return itertools.product((0, 1), repeat=n)


# ---------------------------------------------------------------------------
# clause penalties


def test_clause_penalty_mixed_signs():
    # (x0 | ~x1 | ~x2) is violated exactly at x = (0, 1, 1)
    c = clause(1, -2, -3)
    p = encode_clause_penalty(c)
    assert p.terms == {
        (1, 2): Fraction(1),
        (0, 1, 2): Fraction(-1),
    }
    for bits in all_bits(3):
        assert p.evaluate(bits) == (0 if c.satisfied_by(bits) else 1)


def test_clause_penalty_is_indicator():
    c = clause(-1, 2, -4)
    p = encode_clause_penalty(c, n_vars=4)
    assert p.n_vars == 4
    for bits in all_bits(4):
        assert p.evaluate(bits) == (0 if c.satisfied_by(bits) else 1)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_sat_encoding_counts_violations(seed):
    f = gen_toughsat(5, 12, seed=seed)
    enc = encode_sat(f)
    assert enc.declared_degree == 3
    counts = violation_counts(f)
    vals = enc.polynomial.values_on_bitstrings()
    assert np.array_equal(vals, counts.astype(float))
    # and exactly, through rational evaluation
    for idx in (0, 13, 31):
        bits = assignment_of_index(idx, 5)
        assert enc.polynomial.evaluate(bits) == f.count_violated(bits)


def test_empty_formula_encodes_to_zero():
    enc = encode_sat(CnfFormula(3, ()))
    assert enc.polynomial == MultilinearPolynomial.zero(3)


def test_local_field_instances_have_no_couplings():
    """One generator family pins every variable with single-variable clause
    groups, so the spin Hamiltonian carries local fields only."""
    for seed in range(3):
        f = gen_unique_pt4(5, seed=seed)
        h = bool_to_spin(encode_sat(f).polynomial)
        assert h.j3 == {} and h.j2 == {}
        assert all(v != 0 for v in h.hz)
        diag = h.diagonal()
        planted_idx = sum(b << i for i, b in enumerate(f.planted))
        assert np.argmin(diag) == planted_idx


# ---------------------------------------------------------------------------
# fixed-point toy polynomial


def test_toy_value_polynomial_layout():
    # bit 0 weights 2**(int_bits-1) ... down to 2**-frac_bits
    p = toy_value_polynomial(2, 1)
    assert p.terms == {
        (0,): Fraction(2),
        (1,): Fraction(1),
        (2,): Fraction(1, 2),
    }
    assert toy_value_of_bits(2, 1, (1, 0, 1)) == Fraction(5, 2)


def test_toy_cubic_encoding_exact_coefficients():
    # f(u) = u**3 + u over a 3-bit fixed-point register
    enc = encode_toy_polynomial([0, 1, 0, 1], int_bits=2, frac_bits=1)
    assert enc.declared_degree == 3
    assert enc.polynomial.terms == {
        (0,): Fraction(10),
        (1,): Fraction(2),
        (2,): Fraction(5, 8),
        (0, 1): Fraction(18),
        (0, 2): Fraction(15, 2),
        (1, 2): Fraction(9, 4),
        (0, 1, 2): Fraction(6),
    }


def test_toy_encoding_matches_direct_evaluation():
    coeffs = [Fraction(1, 2), -2, 0, 3]
    enc = encode_toy_polynomial(coeffs, int_bits=2, frac_bits=2)
    for bits in all_bits(4):
        u = toy_value_of_bits(2, 2, bits)
        expected = sum(c * u**k for k, c in enumerate(coeffs))
        assert enc.polynomial.evaluate(bits) == expected


def test_toy_identity_polynomial():
    enc = encode_toy_polynomial([0, 1], int_bits=1, frac_bits=0)
    assert enc.polynomial.terms == {(0,): Fraction(1)}


def test_toy_grid_minimum():
    # f(u) = (u - 3/2)**2 = 9/4 - 3u + u**2, grid minimum at u = 3/2
    enc = encode_toy_polynomial([Fraction(9, 4), -3, 1], int_bits=2, frac_bits=1)
    vals = {bits: enc.polynomial.evaluate(bits) for bits in all_bits(3)}
    best = min(vals, key=vals.get)
    assert toy_value_of_bits(2, 1, best) == Fraction(3, 2)
    assert vals[best] == 0


# ---------------------------------------------------------------------------
# independent set


def test_conflict_graph_single_clause_is_triangle():
    f = CnfFormula(3, (clause(1, 2, 3),))
    g = conflict_graph(f)
    assert g.n_vertices == 3
    assert set(g.edges) == {(0, 1), (0, 2), (1, 2)}
    assert [str(l) for l in g.literal_of] == ["x0", "x1", "x2"]


def test_conflict_graph_cross_edges_between_complements():
    # x0 in clause 1, ~x0 in clause 2: one cross edge between those slots
    f = CnfFormula(4, (clause(1, 2, 3), clause(-1, 3, 4)))
    g = conflict_graph(f)
    cross = [e for e in g.edges if e[0] // 3 != e[1] // 3]
    assert cross == [(0, 3)]


def test_mis_objective_reaches_minus_m_iff_satisfiable():
    for seed in range(4):
        f = gen_toughsat(5, 7, seed=seed)
        enc, g = encode_mis(f)
        assert enc.declared_degree == 2
        vals = enc.polynomial.values_on_bitstrings()
        sat = violation_counts(f).min() == 0
        assert (vals.min() == -f.n_clauses) == sat


def test_mis_penalty_objective_floor_is_zero():
    f = gen_toughsat(4, 5, seed=11)
    enc, _ = encode_mis(f, objective="penalty")
    vals = enc.polynomial.values_on_bitstrings()
    assert vals.min() == 0  # the empty set is independent
    with pytest.raises(ValueError):
        encode_mis(f, objective="maximal")


# ---------------------------------------------------------------------------
# hypergraph coloring


def test_single_edge_two_coloring():
    g = Hypergraph(2, ((0, 1),))
    enc = encode_hypergraph_coloring(g, k=2)
    p = enc.polynomial
    assert p.n_vars == 4
    # proper: v0 color 0, v1 color 1 -> one-hot bits (1,0,0,1)
    assert p.evaluate((1, 0, 0, 1)) == 0
    # monochrome selection is penalized
    assert p.evaluate((1, 0, 1, 0)) == 1
    # breaking one-hot is penalized too (v1 picks no color)
    assert p.evaluate((1, 0, 0, 0)) == 1
    # double-booking v0 adds a shared-color penalty on top
    assert p.evaluate((1, 1, 0, 1)) == 2


def test_three_uniform_edge_penalty_degree():
    g = Hypergraph(3, ((0, 1, 2),))
    enc = encode_hypergraph_coloring(g, k=2)
    assert enc.declared_degree == 3
    vals = enc.polynomial.values_on_bitstrings()
    # a 3-vertex hyperedge is 2-colorable (only all-same-color fails)
    assert vals.min() == 0


def test_odd_cycle_needs_three_colors():
    triangle = Hypergraph(3, ((0, 1), (1, 2), (0, 2)))
    two = encode_hypergraph_coloring(triangle, k=2)
    three = encode_hypergraph_coloring(triangle, k=3)
    assert two.polynomial.values_on_bitstrings().min() > 0
    assert three.polynomial.values_on_bitstrings().min() == 0
    with pytest.raises(ValueError):
        encode_hypergraph_coloring(triangle, k=0)


# ---------------------------------------------------------------------------
# p-spin


def test_pspin_two_spins_ferromagnet():
    enc = encode_pspin(2, 2)
    assert enc.polynomial.basis == "spin"
    vals = enc.polynomial.values_on_bitstrings()
    # -N m**2: aligned states at -2, anti-aligned at 0
    assert list(vals) == [-2.0, 0.0, 0.0, -2.0]


def test_pspin_odd_p_breaks_symmetry():
    h = pspin_hamiltonian(3, 3)
    diag = h.diagonal()
    assert diag[0] == pytest.approx(-3.0)  # all spins up
    assert diag[-1] == pytest.approx(3.0)  # all spins down
    assert np.argmin(diag) == 0


def test_pspin_even_p_is_symmetric():
    diag = pspin_hamiltonian(4, 2).diagonal()
    assert diag[0] == diag[-1] == pytest.approx(-4.0)
    assert diag[0] == diag.min()


def test_pspin_rejects_bad_arguments():
    with pytest.raises(ValueError):
        encode_pspin(0, 2)
    with pytest.raises(ValueError):
        encode_pspin(3, 0)


def test_pspin_hamiltonian_degree_cap():
    # multilinear reduction keeps n=2 at degree 2 for any p ...
    assert pspin_hamiltonian(2, 4).j3 == {}
    # ... but four distinct spins at p=4 genuinely exceed three-body terms
    with pytest.raises(ValueError):
        pspin_hamiltonian(4, 4)


# ---------------------------------------------------------------------------
# resource counts


@pytest.mark.parametrize(
    "n, m, expected",
    [
        (6, 25, (6, 31, 75, 81)),
        (1, 0, (1, 1, 0, 1)),
        (10, 42, (10, 52, 126, 136)),
    ],
)
def test_resource_counts(n, m, expected):
    rc = resource_counts(n, m)
    assert (rc.pubo, rc.slack_qubo_max, rc.mis, rc.ilp) == expected
