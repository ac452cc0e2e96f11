"""3-SAT instances: types, random generators, brute-force solving, DIMACS I/O.

Three instance families are provided:

* ``gen_toughsat`` -- fully random 3-SAT: each clause picks three distinct
  variables uniformly and negates each with a fair coin.  Near the critical
  clause ratio M/N ~ 4.24 these are hard on average.
* ``gen_unique_pt1`` -- plants a random assignment and builds N + 6 clauses
  around it: seven clauses pin three core variables to the planted pattern,
  then one forcing clause per remaining variable propagates the assignment,
  and two extra random (planted-satisfied) clauses are appended.  The planted
  assignment is the unique solution.
* ``gen_unique_pt4`` -- plants a random assignment and emits, per variable,
  four clauses covering all sign patterns on two round-robin partner
  variables.  The resulting 4N clauses have the planted assignment as unique
  solution, and the violation-count polynomial is purely local (all cubic and
  quadratic coefficients cancel).

Assignments are tuples of 0/1 ints indexed by variable.  The brute-force
solver enumerates assignments in numpy chunks and refuses more than 30
variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import FormatError, GenerationError, SizeLimitError

BRUTE_FORCE_MAX_VARS = 30
DEFAULT_MAX_ATTEMPTS = 10**6

# assignments are enumerated in chunks of 2**_CHUNK_BITS to bound memory
_CHUNK_BITS = 18


@dataclass(frozen=True)
class Literal:
    """A possibly negated propositional variable (0-based index)."""

    var: int
    negated: bool = False

    def __post_init__(self) -> None:
        if self.var < 0:
            raise ValueError(f"variable index must be >= 0, got {self.var}")

    def satisfied_by(self, assignment: Sequence[int]) -> bool:
        return bool(assignment[self.var]) != self.negated

    def __str__(self) -> str:
        return ("~x%d" if self.negated else "x%d") % self.var


@dataclass(frozen=True)
class Clause:
    """Disjunction of exactly three literals on pairwise distinct variables."""

    literals: tuple[Literal, Literal, Literal]

    def __post_init__(self) -> None:
        if len(self.literals) != 3:
            raise ValueError("a clause must contain exactly 3 literals")
        vars_ = [lit.var for lit in self.literals]
        if len(set(vars_)) != 3:
            raise ValueError(f"clause variables must be pairwise distinct: {vars_}")

    @property
    def variables(self) -> tuple[int, int, int]:
        return tuple(lit.var for lit in self.literals)  # type: ignore[return-value]

    def satisfied_by(self, assignment: Sequence[int]) -> bool:
        return any(lit.satisfied_by(assignment) for lit in self.literals)

    def __str__(self) -> str:
        return "(" + " | ".join(str(lit) for lit in self.literals) + ")"


def clause(*lits: Literal | tuple[int, bool] | int) -> Clause:
    """Build a clause from Literals, (var, negated) pairs, or DIMACS-style
    signed 1-based ints (``-3`` means "not x2")."""
    out = []
    for item in lits:
        if isinstance(item, Literal):
            out.append(item)
        elif isinstance(item, tuple):
            out.append(Literal(item[0], bool(item[1])))
        else:
            if item == 0:
                raise ValueError("0 is not a valid signed literal")
            out.append(Literal(abs(item) - 1, item < 0))
    return Clause(tuple(out))


@dataclass(frozen=True)
class CnfFormula:
    """A 3-CNF formula, optionally carrying a planted satisfying assignment."""

    n_vars: int
    clauses: tuple[Clause, ...]
    planted: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.n_vars < 1:
            raise ValueError("formula needs at least one variable")
        for cl in self.clauses:
            for lit in cl.literals:
                if lit.var >= self.n_vars:
                    raise ValueError(
                        f"literal {lit} out of range for n_vars={self.n_vars}"
                    )
        if self.planted is not None:
            if len(self.planted) != self.n_vars:
                raise ValueError("planted assignment length != n_vars")
            if any(v not in (0, 1) for v in self.planted):
                raise ValueError("planted assignment must be 0/1 valued")
            bad = [i for i, cl in enumerate(self.clauses)
                   if not cl.satisfied_by(self.planted)]
            if bad:
                raise ValueError(f"planted assignment violates clauses {bad}")

    @property
    def n_clauses(self) -> int:
        return len(self.clauses)

    def count_violated(self, assignment: Sequence[int]) -> int:
        return sum(0 if cl.satisfied_by(assignment) else 1 for cl in self.clauses)

    def satisfied_by(self, assignment: Sequence[int]) -> bool:
        return self.count_violated(assignment) == 0


@dataclass(frozen=True)
class SolveReport:
    """Outcome of exhaustive solving.  ``unique`` is only meaningful when the
    enumeration cap was >= 2 (the solver stops once ``cap`` solutions exist)."""

    satisfiable: bool
    solutions: tuple[tuple[int, ...], ...]
    unique: bool
    truncated: bool = False


def assignment_of_index(index: int, n: int) -> tuple[int, ...]:
    """Unpack a basis-state integer into an assignment (variable i at bit i)."""
    return tuple((int(index) >> i) & 1 for i in range(n))


def index_of_assignment(assignment: Sequence[int]) -> int:
    """Pack an assignment into an integer, variable i at bit i."""
    return sum(int(v) << i for i, v in enumerate(assignment))


def violation_counts(f: CnfFormula) -> np.ndarray:
    """Number of violated clauses for every assignment, indexed by the packed
    integer (bit i = variable i).  Used as an independent oracle against the
    polynomial encodings; refuses n_vars > 30."""
    if f.n_vars > BRUTE_FORCE_MAX_VARS:
        raise SizeLimitError(
            f"violation table limited to {BRUTE_FORCE_MAX_VARS} variables, "
            f"got {f.n_vars}"
        )
    total = 1 << f.n_vars
    counts = np.zeros(total, dtype=np.int64)
    for start in range(0, total, 1 << _CHUNK_BITS):
        stop = min(start + (1 << _CHUNK_BITS), total)
        arr = np.arange(start, stop, dtype=np.uint64)
        for cl in f.clauses:
            sat = np.zeros(arr.shape, dtype=bool)
            for lit in cl.literals:
                bit = (arr >> np.uint64(lit.var)) & np.uint64(1)
                sat |= bit == np.uint64(0 if lit.negated else 1)
            counts[start:stop] += ~sat
    return counts


def brute_force_solve(f: CnfFormula, cap: int = 2) -> SolveReport:
    """Enumerate satisfying assignments, stopping once ``cap`` are found.

    The scan is chunked through numpy, so 2**30 assignments stay feasible;
    anything wider raises SizeLimitError.
    """
    if f.n_vars > BRUTE_FORCE_MAX_VARS:
        raise SizeLimitError(
            f"brute force limited to {BRUTE_FORCE_MAX_VARS} variables, "
            f"got {f.n_vars}"
        )
    if cap < 1:
        raise ValueError("cap must be >= 1")
    total = 1 << f.n_vars
    sols: list[tuple[int, ...]] = []
    truncated = False
    for start in range(0, total, 1 << _CHUNK_BITS):
        stop = min(start + (1 << _CHUNK_BITS), total)
        arr = np.arange(start, stop, dtype=np.uint64)
        ok = np.ones(arr.shape, dtype=bool)
        for cl in f.clauses:
            sat = np.zeros(arr.shape, dtype=bool)
            for lit in cl.literals:
                bit = (arr >> np.uint64(lit.var)) & np.uint64(1)
                sat |= bit == np.uint64(0 if lit.negated else 1)
            ok &= sat
            if not ok.any():
                break
        for idx in arr[ok]:
            sols.append(assignment_of_index(int(idx), f.n_vars))
            if len(sols) >= cap:
                truncated = True
                break
        if truncated:
            break
    return SolveReport(
        satisfiable=bool(sols),
        solutions=tuple(sols),
        unique=len(sols) == 1,
        truncated=truncated,
    )


# ---------------------------------------------------------------------------
# random generators


def make_rng(seed: int | Sequence[int]) -> np.random.Generator:
    """Deterministic PCG64 stream.  ``seed`` may be a single non-negative int
    or a sequence (used for per-instance substreams like [master, index])."""
    entropy = [seed] if isinstance(seed, (int, np.integer)) else list(seed)
    if not entropy or any(int(e) < 0 for e in entropy):
        raise ValueError(f"seed entries must be non-negative ints, got {seed!r}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def critical_clause_count(n: int) -> int:
    """Clause count at the 3-SAT hardness threshold, round(4.24 * N)."""
    return round(4.24 * n)


def _random_clause(rng: np.random.Generator, n: int) -> Clause:
    vars_ = rng.choice(n, size=3, replace=False)
    negs = rng.random(3) < 0.5
    return Clause(tuple(Literal(int(v), bool(g)) for v, g in zip(vars_, negs)))


def gen_toughsat(
    n: int,
    m: int | None = None,
    seed: int | Sequence[int] = 0,
    require_unique: bool = False,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
) -> CnfFormula:
    """Random 3-SAT: m clauses (default round(4.24 n)), three distinct
    variables per clause, fair-coin negations.

    With ``require_unique`` whole instances are redrawn until brute force
    certifies exactly one satisfying assignment; exceeding ``max_attempts``
    raises GenerationError.
    """
    if n < 3:
        raise ValueError("gen_toughsat needs n >= 3")
    if m is None:
        m = critical_clause_count(n)
    if m < 0:
        raise ValueError("clause count must be >= 0")
    if require_unique and n > BRUTE_FORCE_MAX_VARS:
        raise SizeLimitError(
            f"require_unique needs brute force, limited to {BRUTE_FORCE_MAX_VARS} vars"
        )
    rng = make_rng(seed)
    for _ in range(max_attempts):
        f = CnfFormula(n, tuple(_random_clause(rng, n) for _ in range(m)))
        if not require_unique:
            return f
        report = brute_force_solve(f, cap=2)
        if report.satisfiable and report.unique:
            return f
    raise GenerationError(
        f"no unique-solution instance found in {max_attempts} attempts "
        f"(n={n}, m={m}, seed={seed!r})"
    )


def gen_unique_pt1(n: int, seed: int | Sequence[int] = 0) -> CnfFormula:
    """Planted unique-solution instance with N + 6 clauses.

    Seven clauses exclude every non-planted pattern of a random 3-variable
    core; each remaining variable then gets one forcing clause whose literal
    on it is satisfied by the planted assignment while the two literals on
    already-fixed variables are falsified by it; two extra random
    planted-satisfied clauses are appended.
    """
    if n < 4:
        raise ValueError("gen_unique_pt1 needs n >= 4")
    rng = make_rng(seed)
    planted = tuple(int(b) for b in rng.integers(0, 2, size=n))
    core = [int(v) for v in rng.choice(n, size=3, replace=False)]

    clauses: list[Clause] = []
    planted_core = tuple(planted[v] for v in core)
    for pattern in range(8):
        bits = ((pattern >> 0) & 1, (pattern >> 1) & 1, (pattern >> 2) & 1)
        if bits == planted_core:
            continue
        # clause violated exactly by this core pattern: literal on v is
        # false when x_v == bits -> positive literal iff bits == 0
        clauses.append(Clause(tuple(
            Literal(v, negated=bool(b)) for v, b in zip(core, bits)
        )))

    fixed = list(core)
    rest = [v for v in rng.permutation(n) if int(v) not in core]
    for v in rest:
        v = int(v)
        support = rng.choice(len(fixed), size=2, replace=False)
        u, w = fixed[int(support[0])], fixed[int(support[1])]
        clauses.append(Clause((
            Literal(v, negated=(planted[v] == 0)),    # satisfied by planted
            Literal(u, negated=bool(planted[u])),     # falsified by planted
            Literal(w, negated=bool(planted[w])),
        )))
        fixed.append(v)

    extras = 0
    while extras < 2:
        cl = _random_clause(rng, n)
        if cl.satisfied_by(planted):
            clauses.append(cl)
            extras += 1

    return CnfFormula(n, tuple(clauses), planted=planted)


def gen_unique_pt4(n: int, seed: int | Sequence[int] = 0) -> CnfFormula:
    """Planted unique-solution instance with 4N clauses and a purely local
    violation polynomial.

    For variable i the partners are j = (i+1) mod n and k = (i+2) mod n; the
    four clauses fix the literal on i to agree with the planted assignment
    and run through all four sign patterns on (j, k).  Summing the four
    clause penalties marginalizes the partners away, so cubic and quadratic
    terms cancel exactly and each variable keeps a local field.
    """
    if n < 3:
        raise ValueError("gen_unique_pt4 needs n >= 3")
    rng = make_rng(seed)
    planted = tuple(int(b) for b in rng.integers(0, 2, size=n))
    clauses = []
    for i in range(n):
        j, k = (i + 1) % n, (i + 2) % n
        lit_i = Literal(i, negated=(planted[i] == 0))
        for nj in (False, True):
            for nk in (False, True):
                clauses.append(Clause((lit_i, Literal(j, nj), Literal(k, nk))))
    return CnfFormula(n, tuple(clauses), planted=planted)


# ---------------------------------------------------------------------------
# DIMACS I/O


def write_dimacs(f: CnfFormula, comments: Iterable[str] = ()) -> str:
    """Canonical DIMACS CNF text: optional comment lines, ``p cnf N M``
    header, one zero-terminated clause per line with 1-based signed vars."""
    lines = [f"c {c}" for c in comments]
    lines.append(f"p cnf {f.n_vars} {f.n_clauses}")
    for cl in f.clauses:
        lits = " ".join(
            str(-(lit.var + 1) if lit.negated else lit.var + 1)
            for lit in cl.literals
        )
        lines.append(f"{lits} 0")
    return "\n".join(lines) + "\n"


def read_dimacs(text: str) -> CnfFormula:
    """Parse DIMACS CNF.  Clauses must be 3-literal with distinct variables;
    any deviation from the header counts or literal ranges raises
    FormatError."""
    n_vars = n_clauses = None
    tokens: list[int] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if n_vars is not None:
                raise FormatError(f"line {lineno}: duplicate problem line")
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise FormatError(f"line {lineno}: malformed problem line {line!r}")
            try:
                n_vars, n_clauses = int(parts[2]), int(parts[3])
            except ValueError as exc:
                raise FormatError(f"line {lineno}: {exc}") from exc
            continue
        if n_vars is None:
            raise FormatError(f"line {lineno}: clause before problem line")
        try:
            tokens.extend(int(tok) for tok in line.split())
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from exc
    if n_vars is None or n_clauses is None:
        raise FormatError("missing problem line")

    clauses = []
    current: list[int] = []
    for tok in tokens:
        if tok == 0:
            if len(current) != 3:
                raise FormatError(
                    f"clause {len(clauses) + 1} has {len(current)} literals, expected 3"
                )
            for lit in current:
                if not 1 <= abs(lit) <= n_vars:
                    raise FormatError(f"literal {lit} out of range 1..{n_vars}")
            try:
                clauses.append(clause(*current))
            except ValueError as exc:
                raise FormatError(f"clause {len(clauses) + 1}: {exc}") from exc
            current = []
        else:
            current.append(tok)
    if current:
        raise FormatError("trailing literals without clause terminator")
    if len(clauses) != n_clauses:
        raise FormatError(
            f"header declares {n_clauses} clauses, found {len(clauses)}"
        )
    return CnfFormula(n_vars, tuple(clauses))


def planted_sidecar(f: CnfFormula) -> str:
    """JSON sidecar recording the planted assignment (requires one)."""
    import json

    if f.planted is None:
        raise ValueError("formula has no planted assignment")
    return json.dumps({"planted": list(f.planted)}, sort_keys=True) + "\n"


def read_planted_sidecar(text: str) -> tuple[int, ...]:
    import json

    try:
        data = json.loads(text)
        planted = data["planted"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise FormatError(f"malformed planted sidecar: {exc}") from exc
    if not isinstance(planted, list) or any(v not in (0, 1) for v in planted):
        raise FormatError("planted sidecar must hold a 0/1 list")
    return tuple(int(v) for v in planted)


def with_planted(f: CnfFormula, planted: Sequence[int]) -> CnfFormula:
    """Attach a planted assignment (validated against the clauses)."""
    return CnfFormula(f.n_vars, f.clauses, planted=tuple(int(v) for v in planted))
