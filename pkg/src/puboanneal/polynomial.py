"""Multilinear polynomials over Boolean or spin variables, exactly.

Coefficients are ``fractions.Fraction`` throughout; floating point enters
only when Hamiltonian matrices are built.  Monomials are stored as sorted
tuples of distinct variable indices mapping to nonzero coefficients.
Reduction happens during multiplication: x**2 = x in the Boolean basis
(x in {0, 1}) and s**2 = 1/4 in the spin basis (s in {+1/2, -1/2}).

The two bases are linked by the involution s = 1/2 - x, so bit 0 maps to
spin +1/2.  A degree <= 3 polynomial is equivalently a ``SpinHamiltonian``

    H = - sum J3_ijk s_i s_j s_k - sum J2_ij s_i s_j - sum hz_i s_i + const

whose coefficient classes J3, J2, hz carry the sign convention above.
``normalize`` rescales so the largest designated coupling equals one and
accumulates the factor in ``scale_j``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import FormatError, NormalizationError

BOOLEAN = "boolean"
SPIN = "spin"

_FractionLike = Fraction | int | str


def _frac(value: _FractionLike | float) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


def _canon_key(key: Iterable[int]) -> tuple[int, ...]:
    out = tuple(sorted(int(i) for i in key))
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ValueError(f"repeated variable index in monomial {out}")
    if out and out[0] < 0:
        raise ValueError(f"negative variable index in monomial {out}")
    return out


class MultilinearPolynomial:
    """Immutable multilinear polynomial with exact coefficients.

    ``terms`` maps sorted index tuples to Fractions; the empty tuple is the
    constant term.  Zero coefficients are never stored.
    """

    __slots__ = ("n_vars", "basis", "_terms")

    def __init__(self, n_vars: int, basis: str,
                 terms: Mapping[tuple[int, ...], Fraction] | None = None):
        if basis not in (BOOLEAN, SPIN):
            raise ValueError(f"basis must be '{BOOLEAN}' or '{SPIN}', got {basis!r}")
        if n_vars < 0:
            raise ValueError("n_vars must be >= 0")
        self.n_vars = int(n_vars)
        self.basis = basis
        clean: dict[tuple[int, ...], Fraction] = {}
        for key, coeff in (terms or {}).items():
            key = _canon_key(key)
            if key and key[-1] >= n_vars:
                raise ValueError(f"monomial {key} out of range for n_vars={n_vars}")
            coeff = _frac(coeff)
            if coeff != 0:
                clean[key] = coeff
        self._terms = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, n_vars: int, basis: str = BOOLEAN) -> "MultilinearPolynomial":
        return cls(n_vars, basis)

    @classmethod
    def constant(cls, value: _FractionLike, n_vars: int,
                 basis: str = BOOLEAN) -> "MultilinearPolynomial":
        return cls(n_vars, basis, {(): _frac(value)})

    @classmethod
    def variable(cls, index: int, n_vars: int,
                 basis: str = BOOLEAN) -> "MultilinearPolynomial":
        return cls(n_vars, basis, {(index,): Fraction(1)})

    # -- inspection --------------------------------------------------------

    @property
    def terms(self) -> dict[tuple[int, ...], Fraction]:
        return dict(self._terms)

    def coefficient(self, key: Iterable[int]) -> Fraction:
        return self._terms.get(_canon_key(key), Fraction(0))

    @property
    def degree(self) -> int:
        return max((len(k) for k in self._terms), default=0)

    def terms_of_degree(self, d: int) -> dict[tuple[int, ...], Fraction]:
        return {k: c for k, c in self._terms.items() if len(k) == d}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultilinearPolynomial):
            return NotImplemented
        return (self.n_vars, self.basis, self._terms) == \
            (other.n_vars, other.basis, other._terms)

    def __hash__(self):
        return hash((self.n_vars, self.basis,
                     tuple(sorted(self._terms.items()))))

    def __repr__(self) -> str:
        if not self._terms:
            body = "0"
        else:
            var = "x" if self.basis == BOOLEAN else "s"
            parts = []
            for key in sorted(self._terms, key=lambda k: (len(k), k)):
                coeff = self._terms[key]
                mono = "*".join(f"{var}{i}" for i in key) or "1"
                parts.append(f"({coeff})*{mono}")
            body = " + ".join(parts)
        return f"<{self.basis} poly n={self.n_vars}: {body}>"

    # -- arithmetic --------------------------------------------------------

    def _check_compatible(self, other: "MultilinearPolynomial") -> None:
        if self.basis != other.basis:
            raise ValueError(f"basis mismatch: {self.basis} vs {other.basis}")
        if self.n_vars != other.n_vars:
            raise ValueError(
                f"variable-count mismatch: {self.n_vars} vs {other.n_vars}"
            )

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MultilinearPolynomial.constant(other, self.n_vars, self.basis)
        if not isinstance(other, MultilinearPolynomial):
            return NotImplemented
        self._check_compatible(other)
        terms = dict(self._terms)
        for key, coeff in other._terms.items():
            terms[key] = terms.get(key, Fraction(0)) + coeff
        return MultilinearPolynomial(self.n_vars, self.basis, terms)

    __radd__ = __add__

    def __neg__(self):
        return MultilinearPolynomial(
            self.n_vars, self.basis, {k: -c for k, c in self._terms.items()}
        )

    def __sub__(self, other):
        return self + (-other if isinstance(other, MultilinearPolynomial)
                       else MultilinearPolynomial.constant(-_frac(other),
                                                           self.n_vars, self.basis))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            other = _frac(other)
            return MultilinearPolynomial(
                self.n_vars, self.basis,
                {k: c * other for k, c in self._terms.items()}
            )
        if not isinstance(other, MultilinearPolynomial):
            return NotImplemented
        self._check_compatible(other)
        out: dict[tuple[int, ...], Fraction] = {}
        spin = self.basis == SPIN
        for ka, ca in self._terms.items():
            sa = set(ka)
            for kb, cb in other._terms.items():
                sb = set(kb)
                common = sa & sb
                if spin:
                    # s_i**2 = 1/4: repeated indices leave the monomial
                    key = tuple(sorted(sa ^ sb))
                    coeff = ca * cb * Fraction(1, 4) ** len(common)
                else:
                    # x_i**2 = x_i: repeated indices are absorbed
                    key = tuple(sorted(sa | sb))
                    coeff = ca * cb
                out[key] = out.get(key, Fraction(0)) + coeff
        return MultilinearPolynomial(self.n_vars, self.basis, out)

    def __rmul__(self, other):
        return self.__mul__(other)

    def power(self, k: int) -> "MultilinearPolynomial":
        if k < 0:
            raise ValueError("power must be >= 0")
        result = MultilinearPolynomial.constant(1, self.n_vars, self.basis)
        for _ in range(k):
            result = result * self
        return result

    def with_n_vars(self, n_vars: int) -> "MultilinearPolynomial":
        """Re-embed into a larger variable space."""
        if n_vars < self.n_vars:
            raise ValueError("cannot shrink the variable space")
        return MultilinearPolynomial(n_vars, self.basis, self._terms)

    # -- evaluation --------------------------------------------------------

    def evaluate(self, values: Sequence[_FractionLike]) -> Fraction:
        """Exact evaluation at a point of the basis domain (0/1 for Boolean,
        +-1/2 for spin; any Fraction-compatible values are accepted)."""
        if len(values) != self.n_vars:
            raise ValueError("value vector length != n_vars")
        vals = [_frac(v) for v in values]
        total = Fraction(0)
        for key, coeff in self._terms.items():
            prod = coeff
            for i in key:
                prod *= vals[i]
            total += prod
        return total

    def values_on_bitstrings(self) -> np.ndarray:
        """Float values at every bit assignment (packed index, bit i = var i).

        Spin-basis polynomials are evaluated at s_i = 1/2 - x_i.
        """
        dim = 1 << self.n_vars
        out = np.zeros(dim, dtype=np.float64)
        idx = np.arange(dim, dtype=np.uint64)
        for key, coeff in self._terms.items():
            factor = np.full(dim, float(coeff))
            for i in key:
                bit = ((idx >> np.uint64(i)) & np.uint64(1)).astype(np.float64)
                factor *= (0.5 - bit) if self.basis == SPIN else bit
            out += factor
        return out

    # -- serialization -----------------------------------------------------

    def to_json_dict(self) -> dict:
        terms = [
            {"vars": list(key), "coeff": _coeff_str(self._terms[key])}
            for key in sorted(self._terms, key=lambda k: (len(k), k))
        ]
        return {"n_vars": self.n_vars, "basis": self.basis, "terms": terms}

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "MultilinearPolynomial":
        try:
            n_vars = int(data["n_vars"])
            basis = data["basis"]
            raw = data["terms"]
            terms: dict[tuple[int, ...], Fraction] = {}
            for item in raw:
                key = _canon_key(item["vars"])
                coeff = _parse_coeff(item["coeff"])
                terms[key] = terms.get(key, Fraction(0)) + coeff
            return cls(n_vars, basis, terms)
        except FormatError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed polynomial JSON: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "MultilinearPolynomial":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc}") from exc
        return cls.from_json_dict(data)


def _coeff_str(coeff: Fraction) -> str:
    return str(coeff)  # "3/4" or "6"


def _parse_coeff(value) -> Fraction:
    if isinstance(value, bool):
        raise FormatError(f"invalid coefficient {value!r}")
    if isinstance(value, (int, str)):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise FormatError(f"invalid coefficient {value!r}: {exc}") from exc
    if isinstance(value, float):
        return Fraction(value)
    raise FormatError(f"invalid coefficient {value!r}")


# ---------------------------------------------------------------------------
# basis conversion


def bool_to_spin_poly(p: MultilinearPolynomial) -> MultilinearPolynomial:
    """Substitute x_i = 1/2 - s_i and expand."""
    if p.basis != BOOLEAN:
        raise ValueError("expected a Boolean-basis polynomial")
    out: dict[tuple[int, ...], Fraction] = {}
    for key, coeff in p.terms.items():
        # prod_{i in key} (1/2 - s_i) = sum over subsets T of key:
        #   (1/2)^{|key|-|T|} (-1)^{|T|} s_T
        k = len(key)
        for mask in range(1 << k):
            sub = tuple(key[i] for i in range(k) if (mask >> i) & 1)
            t = len(sub)
            c = coeff * Fraction(1, 2) ** (k - t) * (-1) ** t
            out[sub] = out.get(sub, Fraction(0)) + c
    return MultilinearPolynomial(p.n_vars, SPIN, out)


def spin_to_bool_poly(p: MultilinearPolynomial) -> MultilinearPolynomial:
    """Substitute s_i = 1/2 - x_i and expand (inverse of bool_to_spin_poly)."""
    if p.basis != SPIN:
        raise ValueError("expected a spin-basis polynomial")
    out: dict[tuple[int, ...], Fraction] = {}
    for key, coeff in p.terms.items():
        k = len(key)
        for mask in range(1 << k):
            sub = tuple(key[i] for i in range(k) if (mask >> i) & 1)
            t = len(sub)
            c = coeff * Fraction(1, 2) ** (k - t) * (-1) ** t
            out[sub] = out.get(sub, Fraction(0)) + c
    return MultilinearPolynomial(p.n_vars, BOOLEAN, out)


# ---------------------------------------------------------------------------
# spin Hamiltonians


class NormKind(str, Enum):
    """Which coupling class sets the energy unit J."""

    PUBO = "pubo"          # J = max |J3|
    QUBO = "qubo"          # J = max |J2|
    LOCAL_ONLY = "local"   # J = max |hz|


@dataclass(frozen=True)
class SpinHamiltonian:
    """H = -sum J3 s s s - sum J2 s s - sum hz s + constant, s = +-1/2.

    Coupling keys are strictly increasing index tuples; zero couplings are
    dropped at construction.  ``scale_j`` records the product of all
    normalization factors applied so far (1 for a raw Hamiltonian).
    """

    n_spins: int
    j3: dict[tuple[int, int, int], Fraction] = field(default_factory=dict)
    j2: dict[tuple[int, int], Fraction] = field(default_factory=dict)
    hz: tuple[Fraction, ...] = ()
    constant: Fraction = Fraction(0)
    scale_j: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        if self.n_spins < 1:
            raise ValueError("n_spins must be >= 1")
        hz = tuple(_frac(v) for v in self.hz) if self.hz else \
            tuple(Fraction(0) for _ in range(self.n_spins))
        if len(hz) != self.n_spins:
            raise ValueError("hz length != n_spins")
        object.__setattr__(self, "hz", hz)
        for attr, width in (("j3", 3), ("j2", 2)):
            clean = {}
            for key, coeff in getattr(self, attr).items():
                key = _canon_key(key)
                if len(key) != width:
                    raise ValueError(f"{attr} key {key} must have {width} indices")
                if key[-1] >= self.n_spins:
                    raise ValueError(f"{attr} key {key} out of range")
                coeff = _frac(coeff)
                if coeff != 0:
                    clean[key] = coeff
            object.__setattr__(self, attr, clean)
        object.__setattr__(self, "constant", _frac(self.constant))
        object.__setattr__(self, "scale_j", _frac(self.scale_j))
        if self.scale_j <= 0:
            raise ValueError("scale_j must be positive")

    # -- views -------------------------------------------------------------

    def class_values(self, kind: NormKind) -> list[Fraction]:
        if kind == NormKind.PUBO:
            return list(self.j3.values())
        if kind == NormKind.QUBO:
            return list(self.j2.values())
        return [v for v in self.hz if v != 0]

    def max_abs(self, kind: NormKind) -> Fraction:
        values = self.class_values(kind)
        if not values:
            raise NormalizationError(
                f"no nonzero {kind.value} couplings; consider "
                f"NormKind.LOCAL_ONLY for local-field-only Hamiltonians"
            )
        return max(abs(v) for v in values)

    def to_spin_polynomial(self) -> MultilinearPolynomial:
        terms: dict[tuple[int, ...], Fraction] = {(): self.constant}
        for i, h in enumerate(self.hz):
            if h != 0:
                terms[(i,)] = -h
        for key, j in self.j2.items():
            terms[key] = -j
        for key, j in self.j3.items():
            terms[key] = -j
        return MultilinearPolynomial(self.n_spins, SPIN, terms)

    def to_boolean_polynomial(self) -> MultilinearPolynomial:
        return spin_to_bool_poly(self.to_spin_polynomial())

    def energy_of_bits(self, bits: Sequence[int]) -> Fraction:
        """Exact energy of a basis state (bit i = Boolean variable i,
        spin value s_i = 1/2 - x_i)."""
        spins = [Fraction(1, 2) - _frac(int(b)) for b in bits]
        return self.to_spin_polynomial().evaluate(spins)

    def diagonal(self) -> np.ndarray:
        """Float energies of all 2**n basis states, packed-index order."""
        return self.to_spin_polynomial().values_on_bitstrings()

    # -- serialization -----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "n_spins": self.n_spins,
            "j3": [
                {"vars": list(k), "coeff": _coeff_str(self.j3[k])}
                for k in sorted(self.j3)
            ],
            "j2": [
                {"vars": list(k), "coeff": _coeff_str(self.j2[k])}
                for k in sorted(self.j2)
            ],
            "hz": [_coeff_str(v) for v in self.hz],
            "constant": _coeff_str(self.constant),
            "scale_j": _coeff_str(self.scale_j),
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "SpinHamiltonian":
        try:
            return cls(
                n_spins=int(data["n_spins"]),
                j3={tuple(item["vars"]): _parse_coeff(item["coeff"])
                    for item in data["j3"]},
                j2={tuple(item["vars"]): _parse_coeff(item["coeff"])
                    for item in data["j2"]},
                hz=tuple(_parse_coeff(v) for v in data["hz"]),
                constant=_parse_coeff(data["constant"]),
                scale_j=_parse_coeff(data.get("scale_j", 1)),
            )
        except FormatError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed Hamiltonian JSON: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "SpinHamiltonian":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc}") from exc
        return cls.from_json_dict(data)


def spin_poly_to_hamiltonian(p: MultilinearPolynomial,
                             scale_j: Fraction = Fraction(1)) -> SpinHamiltonian:
    """Read a degree <= 3 spin polynomial as H = -J3 sss - J2 ss - hz s + c."""
    if p.basis != SPIN:
        raise ValueError("expected a spin-basis polynomial")
    if p.degree > 3:
        raise ValueError(f"degree {p.degree} > 3 cannot form a spin Hamiltonian")
    hz = [Fraction(0)] * p.n_vars
    j2: dict[tuple[int, int], Fraction] = {}
    j3: dict[tuple[int, int, int], Fraction] = {}
    constant = Fraction(0)
    for key, coeff in p.terms.items():
        if len(key) == 0:
            constant = coeff
        elif len(key) == 1:
            hz[key[0]] = -coeff
        elif len(key) == 2:
            j2[key] = -coeff
        else:
            j3[key] = -coeff
    return SpinHamiltonian(p.n_vars, j3=j3, j2=j2, hz=tuple(hz),
                           constant=constant, scale_j=scale_j)


def bool_to_spin(p: MultilinearPolynomial) -> SpinHamiltonian:
    """Map a degree <= 3 Boolean polynomial to its spin Hamiltonian via
    s = 1/2 - x."""
    if p.degree > 3:
        raise ValueError(
            f"degree {p.degree} > 3: quadratize or reformulate first"
        )
    return spin_poly_to_hamiltonian(bool_to_spin_poly(p))


def spin_flip(h: SpinHamiltonian) -> SpinHamiltonian:
    """Global spin flip s -> -s: odd-order couplings change sign, even-order
    ones and the constant are untouched.  The annealing spectrum is invariant
    under this map (the transverse drive commutes with the flip unitary)."""
    return SpinHamiltonian(
        n_spins=h.n_spins,
        j3={k: -v for k, v in h.j3.items()},
        j2=dict(h.j2),
        hz=tuple(-v for v in h.hz),
        constant=h.constant,
        scale_j=h.scale_j,
    )


def normalize(h: SpinHamiltonian, kind: NormKind) -> SpinHamiltonian:
    """Divide every coefficient by the largest |coupling| of the designated
    class so that max equals 1; the factor multiplies ``scale_j``.

    Raises NormalizationError when the designated class is empty.
    Normalizing twice with the same kind is the identity.
    """
    scale = h.max_abs(kind)
    return SpinHamiltonian(
        n_spins=h.n_spins,
        j3={k: v / scale for k, v in h.j3.items()},
        j2={k: v / scale for k, v in h.j2.items()},
        hz=tuple(v / scale for v in h.hz),
        constant=h.constant / scale,
        scale_j=h.scale_j * scale,
    )
