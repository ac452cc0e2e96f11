"""Reduce cubic pseudo-Boolean polynomials to quadratic with ancilla bits.

Each substitution introduces an ancilla y meant to equal a product x_i x_j
and rewrites every cubic term containing that pair, a x_i x_j x_k -> a y x_k.
Consistency is enforced by the standard penalty

    P(x_i, x_j, y) = 3 y + x_i x_j - 2 x_i y - 2 x_j y

which is 0 when y = x_i x_j and >= 1 otherwise.  The penalty strength for an
ancilla is sum(|a| + 1) over the cubic coefficients it rewrites, enough to
dominate any energy gain from violating the constraint.

Pairs are chosen greedily by how many remaining cubic terms contain them
(unweighted count, lexicographically smallest pair on ties), so the
procedure is deterministic.  The result separates the rewritten problem
polynomial from the constraint polynomial; the cost Hamiltonian is
assembled as problem + lambda * constraints, spin-mapped, and normalized by
the largest |J2(lambda)|.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import FormatError
from .polynomial import (
    BOOLEAN,
    MultilinearPolynomial,
    NormKind,
    SpinHamiltonian,
    bool_to_spin,
    normalize,
)
from .sat import CnfFormula
from .encodings import encode_sat


@dataclass(frozen=True)
class QuadratizationResult:
    """Quadratic reformulation of a cubic polynomial.

    ``problem_part`` carries the rewritten objective, ``constraint_part``
    the sum of strength-weighted penalties; both live on the extended
    variable space (originals then ancillas).  ``qubo`` is their sum at
    lambda = 1.  ``ancillas`` maps each ancilla index to its substituted
    pair, aligned with ``penalty_strengths``.
    """

    qubo: MultilinearPolynomial
    problem_part: MultilinearPolynomial
    constraint_part: MultilinearPolynomial
    n_original: int
    ancillas: tuple[tuple[int, tuple[int, int]], ...]
    penalty_strengths: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if len(self.ancillas) != len(self.penalty_strengths):
            raise ValueError("ancillas and penalty_strengths must align")
        if self.qubo != self.problem_part + self.constraint_part:
            raise ValueError("qubo must equal problem_part + constraint_part")
        for poly in (self.qubo, self.problem_part, self.constraint_part):
            if poly.degree > 2:
                raise ValueError("quadratization output must be degree <= 2")

    @property
    def n_ancillas(self) -> int:
        return len(self.ancillas)

    @property
    def n_vars(self) -> int:
        return self.n_original + self.n_ancillas

    def consistent_assignment(self, bits: Sequence[int]) -> bool:
        """True when every ancilla bit equals its product x_i x_j."""
        for a, (i, j) in self.ancillas:
            if int(bits[a]) != int(bits[i]) * int(bits[j]):
                return False
        return True

    def extend_assignment(self, bits: Sequence[int]) -> tuple[int, ...]:
        """Append consistent ancilla values to an original-variable
        assignment."""
        if len(bits) != self.n_original:
            raise ValueError("assignment length != n_original")
        out = [int(b) for b in bits]
        for _, (i, j) in self.ancillas:
            out.append(out[i] * out[j])
        return tuple(out)

    # -- serialization -----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "n_original": self.n_original,
            "ancillas": [
                {"index": a, "pair": list(pair), "strength": str(s)}
                for (a, pair), s in zip(self.ancillas, self.penalty_strengths)
            ],
            "problem_part": self.problem_part.to_json_dict(),
            "constraint_part": self.constraint_part.to_json_dict(),
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "QuadratizationResult":
        try:
            problem = MultilinearPolynomial.from_json_dict(data["problem_part"])
            constraint = MultilinearPolynomial.from_json_dict(
                data["constraint_part"])
            ancillas = tuple(
                (int(item["index"]), (int(item["pair"][0]), int(item["pair"][1])))
                for item in data["ancillas"]
            )
            strengths = tuple(
                Fraction(item["strength"]) for item in data["ancillas"]
            )
            return cls(
                qubo=problem + constraint,
                problem_part=problem,
                constraint_part=constraint,
                n_original=int(data["n_original"]),
                ancillas=ancillas,
                penalty_strengths=strengths,
            )
        except FormatError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed quadratization JSON: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "QuadratizationResult":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc}") from exc
        return cls.from_json_dict(data)


def quadratize(p: MultilinearPolynomial) -> QuadratizationResult:
    """Greedy pair-substitution quadratization of a degree <= 3 Boolean
    polynomial.  Degree <= 2 input passes through with zero ancillas."""
    if p.basis != BOOLEAN:
        raise ValueError("quadratize expects a Boolean-basis polynomial")
    if p.degree > 3:
        raise ValueError(f"degree {p.degree} > 3 not supported")
    n = p.n_vars

    cubic = {k: c for k, c in p.terms.items() if len(k) == 3}
    lower = {k: c for k, c in p.terms.items() if len(k) <= 2}

    ancillas: list[tuple[int, tuple[int, int]]] = []
    strengths: list[Fraction] = []
    rewritten: dict[tuple[int, ...], Fraction] = {}

    while cubic:
        counts: dict[tuple[int, int], int] = {}
        for (i, j, k) in cubic:
            for pair in ((i, j), (i, k), (j, k)):
                counts[pair] = counts.get(pair, 0) + 1
        best = min(counts, key=lambda pr: (-counts[pr], pr))
        a = n + len(ancillas)
        affected = [key for key in cubic if best[0] in key and best[1] in key]
        strength = Fraction(0)
        for key in affected:
            coeff = cubic.pop(key)
            (third,) = [v for v in key if v not in best]
            new_key = (third, a)  # ancilla index always largest
            rewritten[new_key] = rewritten.get(new_key, Fraction(0)) + coeff
            strength += abs(coeff) + 1
        ancillas.append((a, best))
        strengths.append(strength)

    n_all = n + len(ancillas)
    problem_terms = dict(rewritten)
    for key, coeff in lower.items():
        problem_terms[key] = problem_terms.get(key, Fraction(0)) + coeff
    problem = MultilinearPolynomial(n_all, BOOLEAN, problem_terms)

    constraint_terms: dict[tuple[int, ...], Fraction] = {}

    def bump(key: tuple[int, ...], value: Fraction) -> None:
        constraint_terms[key] = constraint_terms.get(key, Fraction(0)) + value

    for (a, (i, j)), s in zip(ancillas, strengths):
        bump((a,), 3 * s)
        bump((i, j), s)
        bump((i, a), -2 * s)
        bump((j, a), -2 * s)
    constraint = MultilinearPolynomial(n_all, BOOLEAN, constraint_terms)

    return QuadratizationResult(
        qubo=problem + constraint,
        problem_part=problem,
        constraint_part=constraint,
        n_original=n,
        ancillas=tuple(ancillas),
        penalty_strengths=tuple(strengths),
    )


def assemble_cost(q: QuadratizationResult,
                  lam: Fraction | int | float = 1) -> SpinHamiltonian:
    """Cost Hamiltonian at penalty weight lambda: spin-map
    problem + lambda * constraints and normalize by max |J2(lambda)|.

    Raises NormalizationError when no quadratic coupling survives (e.g.
    lambda = 0 on a pair-free problem part).
    """
    lam = Fraction(lam)
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    poly = q.problem_part + q.constraint_part * lam
    return normalize(bool_to_spin(poly), NormKind.QUBO)


def ancilla_count(f: CnfFormula) -> int:
    """Ancillas the greedy quadratizer spends on a formula's violation
    polynomial."""
    return quadratize(encode_sat(f).polynomial).n_ancillas
