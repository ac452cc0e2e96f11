"""Cost-function encodings of combinatorial problems.

The central encoding maps a 3-CNF formula to the pseudo-Boolean polynomial
counting violated clauses: each clause contributes a product of three
factors, (1 - x) for a positive literal and x for a negated one, which is 1
exactly on the violating assignment of that clause.  The minimum of the sum
is the MAX-SAT violation count, 0 iff the formula is satisfiable.

Further encodings: numeric fixed-point bit expansions of one-variable
polynomials, maximum-independent-set reformulations of SAT on a conflict
graph, hypergraph proper-coloring penalties, and the p-spin mean-field
model.  All return exact-coefficient polynomials; degree bookkeeping is
validated against what each construction can produce.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import FormatError
from .polynomial import (
    BOOLEAN,
    SPIN,
    MultilinearPolynomial,
    SpinHamiltonian,
    spin_poly_to_hamiltonian,
)
from .sat import Clause, CnfFormula, Literal

#: declared maximal degree per encoding provenance (None = computed per call)
PROVENANCE_DEGREE = {
    "sat_penalty": 3,
    "toy_polynomial": None,
    "mis": 2,
    "hypergraph_coloring": None,
    "p_spin": None,
}


@dataclass(frozen=True)
class EncodedProblem:
    """A polynomial cost function plus where it came from.

    ``declared_degree`` is the construction's degree bound; the stored
    polynomial never exceeds it.
    """

    polynomial: MultilinearPolynomial
    provenance: str
    declared_degree: int
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.provenance not in PROVENANCE_DEGREE:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if self.polynomial.degree > self.declared_degree:
            raise ValueError(
                f"polynomial degree {self.polynomial.degree} exceeds declared "
                f"bound {self.declared_degree} for {self.provenance}"
            )


# ---------------------------------------------------------------------------
# 3-SAT violation-count encoding


def encode_clause_penalty(c: Clause, n_vars: int | None = None
                          ) -> MultilinearPolynomial:
    """Penalty polynomial of one clause: product over literals of (1 - x)
    for positive and x for negated; equals 1 iff the clause is violated."""
    if n_vars is None:
        n_vars = max(c.variables) + 1
    one = MultilinearPolynomial.constant(1, n_vars, BOOLEAN)
    p = one
    for lit in c.literals:
        x = MultilinearPolynomial.variable(lit.var, n_vars, BOOLEAN)
        p = p * (x if lit.negated else one - x)
    return p


def encode_sat(f: CnfFormula) -> EncodedProblem:
    """Sum of clause penalties: value = number of violated clauses.

    Ground value 0 iff satisfiable; for a planted-unique instance the
    planted assignment is the unique zero.
    """
    total = MultilinearPolynomial.zero(f.n_vars, BOOLEAN)
    for cl in f.clauses:
        total = total + encode_clause_penalty(cl, f.n_vars)
    return EncodedProblem(
        polynomial=total,
        provenance="sat_penalty",
        declared_degree=3,
        metadata={"n_clauses": f.n_clauses},
    )


# ---------------------------------------------------------------------------
# numeric toy encoding: fixed-point bit expansion of a one-variable polynomial


def toy_value_polynomial(int_bits: int, frac_bits: int) -> MultilinearPolynomial:
    """The linear polynomial representing the encoded number:
    x = sum_{i=1}^{n} 2^{n-i} b_{i-1} + sum_{i=1}^{m} 2^{-i} b_{n+i-1}."""
    n, m = int_bits, frac_bits
    if n < 0 or m < 0 or n + m == 0:
        raise ValueError("need at least one bit")
    terms = {}
    for i in range(1, n + 1):
        terms[(i - 1,)] = Fraction(2) ** (n - i)
    for i in range(1, m + 1):
        terms[(n + i - 1,)] = Fraction(1, 2) ** i
    return MultilinearPolynomial(n + m, BOOLEAN, terms)


def toy_value_of_bits(int_bits: int, frac_bits: int,
                      bits: Sequence[int]) -> Fraction:
    """Decode a bitstring back to the represented number."""
    return toy_value_polynomial(int_bits, frac_bits).evaluate(
        [Fraction(int(b)) for b in bits]
    )


def encode_toy_polynomial(coeffs: Sequence[Fraction | int | str],
                          int_bits: int, frac_bits: int) -> EncodedProblem:
    """Encode minimization of f(x) = sum_k coeffs[k] x^k over the fixed-point
    grid spanned by ``int_bits`` integer and ``frac_bits`` fractional bits.

    ``coeffs[k]`` multiplies x**k; the polynomial must have degree >= 1.
    """
    coeffs = [Fraction(c) for c in coeffs]
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    if len(coeffs) < 2:
        raise ValueError("polynomial must have degree >= 1")
    x = toy_value_polynomial(int_bits, frac_bits)
    n_all = int_bits + frac_bits
    total = MultilinearPolynomial.constant(coeffs[0], n_all, BOOLEAN)
    xk = MultilinearPolynomial.constant(1, n_all, BOOLEAN)
    for c in coeffs[1:]:
        xk = xk * x
        if c != 0:
            total = total + xk * c
    declared = min(len(coeffs) - 1, n_all)
    return EncodedProblem(
        polynomial=total,
        provenance="toy_polynomial",
        declared_degree=declared,
        metadata={
            "int_bits": int_bits,
            "frac_bits": frac_bits,
            "coeffs": [str(c) for c in coeffs],
        },
    )


# ---------------------------------------------------------------------------
# maximum-independent-set reformulation of 3-SAT


@dataclass(frozen=True)
class ConflictGraph:
    """One vertex per clause literal (vertex 3m + j for literal j of clause
    m); edges join literals within a clause (triangles) and complementary
    literals of the same variable across clauses."""

    n_vertices: int
    edges: tuple[tuple[int, int], ...]
    literal_of: tuple[Literal, ...]

    def __post_init__(self) -> None:
        if len(self.literal_of) != self.n_vertices:
            raise ValueError("literal_of length != n_vertices")
        seen = set()
        for a, b in self.edges:
            if not (0 <= a < b < self.n_vertices):
                raise ValueError(f"bad edge ({a}, {b})")
            if (a, b) in seen:
                raise ValueError(f"duplicate edge ({a}, {b})")
            seen.add((a, b))


def conflict_graph(f: CnfFormula) -> ConflictGraph:
    literals: list[Literal] = []
    for cl in f.clauses:
        literals.extend(cl.literals)
    edges: set[tuple[int, int]] = set()
    m = f.n_clauses
    for c in range(m):
        base = 3 * c
        edges.update({(base, base + 1), (base, base + 2), (base + 1, base + 2)})
    for a in range(3 * m):
        for b in range(a + 1, 3 * m):
            if a // 3 == b // 3:
                continue
            la, lb = literals[a], literals[b]
            if la.var == lb.var and la.negated != lb.negated:
                edges.add((a, b))
    return ConflictGraph(3 * m, tuple(sorted(edges)), tuple(literals))


def encode_mis(f: CnfFormula, objective: str = "standard"
               ) -> tuple[EncodedProblem, ConflictGraph]:
    """Independent-set QUBO on the conflict graph of ``f``.

    objective="standard": - sum_v x_v + 2 sum_{(u,v) in E} x_u x_v, whose
    minimum is -M iff the formula is satisfiable (one literal selected per
    clause, no conflicts).  objective="penalty": just sum_{(u,v)} x_u x_v,
    the bare edge-penalty form, minimized (0) by any independent set.
    """
    if objective not in ("standard", "penalty"):
        raise ValueError(f"unknown objective {objective!r}")
    g = conflict_graph(f)
    terms: dict[tuple[int, ...], Fraction] = {}
    for a, b in g.edges:
        weight = Fraction(2) if objective == "standard" else Fraction(1)
        terms[(a, b)] = weight
    if objective == "standard":
        for v in range(g.n_vertices):
            terms[(v,)] = Fraction(-1)
    poly = MultilinearPolynomial(g.n_vertices, BOOLEAN, terms)
    enc = EncodedProblem(
        polynomial=poly,
        provenance="mis",
        declared_degree=2,
        metadata={"objective": objective, "n_clauses": f.n_clauses},
    )
    return enc, g


# ---------------------------------------------------------------------------
# hypergraph proper coloring


@dataclass(frozen=True)
class Hypergraph:
    """Vertices 0..n-1 plus hyperedges, each a nonempty vertex subset."""

    n_vertices: int
    edges: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.n_vertices < 1:
            raise ValueError("hypergraph needs at least one vertex")
        canon = []
        for e in self.edges:
            e = tuple(sorted(set(int(v) for v in e)))
            if not e:
                raise ValueError("hyperedges must be nonempty")
            if e[0] < 0 or e[-1] >= self.n_vertices:
                raise ValueError(f"edge {e} out of range")
            canon.append(e)
        object.__setattr__(self, "edges", tuple(canon))


def coloring_var(vertex: int, color: int, k: int) -> int:
    """Index of the one-hot bit 'vertex has this color'."""
    return vertex * k + color


def encode_hypergraph_coloring(g: Hypergraph, k: int) -> EncodedProblem:
    """Proper-coloring penalty with one-hot color bits x_{v,c}.

    Three penalty groups, each nonnegative with minimum 0:
    (a) one-hot: (1 - sum_c x_{v,c})**2 per vertex;
    (b) no monochromatic hyperedge: per edge e and color c, the product
        prod_{v in e} x_{v,c};
    (c) nothing else -- ground value 0 iff a proper coloring exists.
    """
    if k < 1:
        raise ValueError("need at least one color")
    n_all = g.n_vertices * k
    total = MultilinearPolynomial.zero(n_all, BOOLEAN)
    one = MultilinearPolynomial.constant(1, n_all, BOOLEAN)
    for v in range(g.n_vertices):
        s = MultilinearPolynomial.zero(n_all, BOOLEAN)
        for c in range(k):
            s = s + MultilinearPolynomial.variable(coloring_var(v, c, k),
                                                   n_all, BOOLEAN)
        d = one - s
        total = total + d * d
    for e in g.edges:
        for c in range(k):
            prod = one
            for v in e:
                prod = prod * MultilinearPolynomial.variable(
                    coloring_var(v, c, k), n_all, BOOLEAN)
            total = total + prod
    declared = max(2, max((len(e) for e in g.edges), default=1))
    return EncodedProblem(
        polynomial=total,
        provenance="hypergraph_coloring",
        declared_degree=declared,
        metadata={"k": k, "n_vertices": g.n_vertices,
                  "var_layout": "vertex*k + color"},
    )


# ---------------------------------------------------------------------------
# p-spin mean-field model


def pspin_polynomial(n: int, p: int) -> MultilinearPolynomial:
    """Spin-basis polynomial of H = -N (mean sigma)^p with sigma_i = 2 s_i.

    Repeated-index reduction s**2 = 1/4 happens during expansion, so the
    result is multilinear of degree <= p.
    """
    if n < 1 or p < 1:
        raise ValueError("need n >= 1 and p >= 1")
    total = MultilinearPolynomial.zero(n, SPIN)
    for i in range(n):
        total = total + MultilinearPolynomial.variable(i, n, SPIN)
    poly = total.power(p) * (Fraction(2, n) ** p * (-n))
    return poly


def encode_pspin(n: int, p: int) -> EncodedProblem:
    """p-spin model as an encoded problem.  For odd p the ground state is
    all sigma = +1; for even p the global flip makes it doubly degenerate."""
    poly = pspin_polynomial(n, p)
    return EncodedProblem(
        polynomial=poly,
        provenance="p_spin",
        declared_degree=p,
        metadata={"n": n, "p": p},
    )


def pspin_hamiltonian(n: int, p: int) -> SpinHamiltonian:
    """SpinHamiltonian form; requires the reduced degree to be <= 3."""
    poly = pspin_polynomial(n, p)
    if poly.degree > 3:
        raise ValueError(
            f"p-spin with n={n}, p={p} reduces to degree {poly.degree} > 3"
        )
    return spin_poly_to_hamiltonian(poly)


# ---------------------------------------------------------------------------
# qubit resource counts


@dataclass(frozen=True)
class ResourceCount:
    """Qubit counts of the standard formulations of an (N, M) 3-SAT
    instance: native PUBO, slack-variable QUBO upper bound, MIS vertices,
    and ILP with per-clause slack."""

    pubo: int
    slack_qubo_max: int
    mis: int
    ilp: int


def resource_counts(n: int, m: int) -> ResourceCount:
    if n < 1 or m < 0:
        raise ValueError("need n >= 1 and m >= 0")
    return ResourceCount(
        pubo=n,
        slack_qubo_max=n + m,
        mis=3 * m,
        ilp=n + 3 * m,
    )
