"""Annealing-sweep spectra of spin Hamiltonians.

The interpolated Hamiltonian is H(s) = (1-s) H_drive + s H_cost with the
transverse-field drive H_drive = -h^x sum_i s^x_i and a diagonal cost in the
computational basis (s^z eigenvalues +-1/2, bit i of the basis index is
Boolean variable i, bit 0 -> spin +1/2).  A sweep scans s over a coarse
uniform grid, refines the minimum gap DeltaE10(s) by golden-section search,
and extracts the driving matrix element

    V = max_s max_{|1> in first-excited manifold} |<1| dH/ds |0>|,
    dH/ds = H_cost - H_drive,

giving the adiabaticity-time estimate T = V / DeltaE^2 (hbar = 1, energies
in units of the cost normalization J).

Solvers: full/partial dense Hermitian diagonalization for small dimensions;
above that, Chebyshev-filtered subspace iteration on eigenvector blocks
carried across neighbouring s points as warm starts, with preconditioned
LOBPCG and ARPACK Lanczos as fallbacks.  Every accepted eigenpair is checked
against the residual contract.  The two endpoints s = 0, 1 have closed forms
(product state / diagonal) and are handled analytically on the iterative
path, which also sidesteps the n-fold degenerate first-excited manifold at
s = 0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sparse
import scipy.sparse.linalg as spla

try:  # accumulating CSR block kernel; generic fallback works without it
    from scipy.sparse._sparsetools import csr_matvecs as _csr_matvecs
except ImportError:  # pragma: no cover
    _csr_matvecs = None

from .errors import ConvergenceError, SizeLimitError
from .polynomial import SpinHamiltonian
from .quadratize import QuadratizationResult, assemble_cost

DEFAULT_MAX_QUBITS = 24
DENSE_CUTOFF = 9          # auto solver: dense path up to this many spins
DEG_TOL_REL = 1e-8        # degeneracy tolerance = DEG_TOL_REL * max(1, |e1|)
RESIDUAL_REL = 1e-9       # eigenpair residual contract, relative to ||H||
_TAIL_RESIDUAL_REL = 1e-6  # looser bound for block vectors beyond the lowest two
_K_INTERIOR = 4           # eigenpairs per interior iterative solve
_K_CAP = 40               # escalation ceiling for degenerate manifolds
_DENSE_SUBSET = 8         # partial dense solves return this many levels
_CHEB_DEG0 = 24           # initial Chebyshev filter degree
_CHEB_DEG_MAX = 160
_CHEB_MAX_APPS = 8        # filter applications before falling back
_CHEB_EXTRA = 2           # buffer columns beyond the k requested pairs
_CHEB_EXTRAPOLATE = True  # extrapolate the warm block along the schedule


# ---------------------------------------------------------------------------
# operator construction


@lru_cache(maxsize=2)
def _sx_sum_csr(n: int) -> sparse.csr_matrix:
    """sum_i s^x_i: amplitude 1/2 between basis states differing in one bit."""
    dim = 1 << n
    rows = np.repeat(np.arange(dim, dtype=np.int64), n)
    flips = np.tile(np.left_shift(1, np.arange(n, dtype=np.int64)), dim)
    cols = rows ^ flips
    data = np.full(rows.shape, 0.5)
    return sparse.csr_matrix((data, (rows, cols)), shape=(dim, dim))


@lru_cache(maxsize=2)
def _combo_structure(n: int):
    """CSR skeleton of diag + sum s^x with per-entry templates, shared across
    Hamiltonians on n spins."""
    dim = 1 << n
    combo = (_sx_sum_csr(n) + sparse.eye(dim, format="csr")).tocsr()
    combo.sort_indices()
    rows = np.repeat(np.arange(dim, dtype=np.int64), np.diff(combo.indptr))
    is_diag = combo.indices == rows
    off_template = np.where(is_diag, 0.0, 0.5)
    return combo.indices, combo.indptr, is_diag, off_template


def build_matrices(cost: SpinHamiltonian, hx: float = 1.0,
                   max_qubits: int = DEFAULT_MAX_QUBITS
                   ) -> tuple[np.ndarray, sparse.csr_matrix]:
    """Diagonal of H_cost (length 2^n) and sparse H_drive = -hx sum s^x.

    H(s) = (1-s) * drive + s * diag(cost).
    """
    n = cost.n_spins
    if n > max_qubits:
        raise SizeLimitError(f"{n} spins exceeds the {max_qubits}-qubit limit")
    diag = cost.diagonal()
    drive = _sx_sum_csr(n) * (-float(hx))
    return diag, drive


# ---------------------------------------------------------------------------
# low-level eigensolves


@dataclass
class LowestLevels:
    """Two lowest levels of a Hermitian operator.  ``excited`` holds the
    (possibly degenerate) first-excited manifold as columns; ``degeneracy``
    counts its size within the degeneracy tolerance."""

    e0: float
    e1: float
    ground: np.ndarray
    excited: np.ndarray
    degeneracy: int
    truncated: bool = False  # manifold may extend beyond the escalation cap


def _deg_tol(e1: float, rel: float = DEG_TOL_REL) -> float:
    return rel * max(1.0, abs(e1))


def _split_levels(vals: np.ndarray, vecs: np.ndarray | None,
                  deg_tol: float | None, complete: bool) -> LowestLevels:
    """Package sorted eigenvalues/vectors into LowestLevels."""
    e0 = float(vals[0])
    e1 = float(vals[1])
    tol = _deg_tol(e1) if deg_tol is None else deg_tol
    upper = np.nonzero(vals[1:] - e1 > tol)[0]
    last = (1 + upper[0]) if upper.size else len(vals)
    degeneracy = last - 1
    truncated = not upper.size and not complete
    if vecs is None:
        ground = excited = np.empty((0, 0))
    else:
        ground = vecs[:, 0].copy()
        excited = vecs[:, 1:last].copy()
    return LowestLevels(e0, e1, ground, excited, degeneracy, truncated)


def _check_residuals(matvec: Callable[[np.ndarray], np.ndarray],
                     vals: Sequence[float], vecs: np.ndarray,
                     norm_scale: float) -> bool:
    # contract precision on the two lowest pairs; the rest of the block only
    # feeds degeneracy counting and may be held to a looser bound
    strict = RESIDUAL_REL * max(norm_scale, 1e-300)
    loose = _TAIL_RESIDUAL_REL * max(norm_scale, 1e-300)
    for j, ev in enumerate(vals):
        v = vecs[:, j]
        r = matvec(v) - ev * v
        if float(np.linalg.norm(r)) > (strict if j < 2 else loose):
            return False
    return True


def lowest_two(H, deg_tol: float | None = None, method: str = "auto"
               ) -> LowestLevels:
    """Two lowest eigenpairs of a real-symmetric matrix/operator with the
    first-excited degeneracy counted within ``deg_tol`` (default
    1e-8 * max(1, |e1|)).

    Residuals are held to 1e-9 * ||H||; the iterative path raises
    ConvergenceError with diagnostics if it cannot reach that.
    """
    if method not in ("auto", "dense", "iterative"):
        raise ValueError(f"unknown method {method!r}")
    if isinstance(H, np.ndarray):
        dense_ok = True
        dim = H.shape[0]
    else:
        dim = H.shape[0]
        dense_ok = sparse.issparse(H)
    if method == "dense" and not dense_ok:
        raise ValueError("dense method needs an explicit matrix")
    use_dense = method == "dense" or (
        method == "auto" and dense_ok and dim <= (1 << DENSE_CUTOFF))
    if use_dense:
        A = H.toarray() if sparse.issparse(H) else np.asarray(H, dtype=np.float64)
        vals, vecs = scipy.linalg.eigh(A)
        return _split_levels(vals, vecs, deg_tol, complete=True)
    if dim < 16:
        raise ValueError("iterative solver needs dimension >= 16")
    norm_scale = _operator_norm_scale(H)
    matvec = (lambda v: H @ v)
    k = _K_INTERIOR
    k_cap = min(_K_CAP, dim - 1)
    while True:
        vals, vecs = _eigsh_smallest(H, k, v0=None, norm_scale=norm_scale,
                                     matvec=matvec)
        tol = _deg_tol(float(vals[1])) if deg_tol is None else deg_tol
        if vals[-1] - vals[1] > tol or k >= k_cap:
            return _split_levels(vals, vecs, deg_tol, complete=k < k_cap)
        k = min(2 * k, k_cap)


def _operator_norm_scale(H) -> float:
    """Upper bound (or power-method estimate) of ||H||_2 for symmetric H."""
    if sparse.issparse(H):
        return float(np.abs(H).sum(axis=0).max())
    if isinstance(H, np.ndarray):
        return float(np.abs(H).sum(axis=0).max())
    # LinearOperator: deterministic power iteration on |lambda|_max
    dim = H.shape[0]
    v = np.full(dim, 1.0 / math.sqrt(dim))
    v[::2] += 1e-3  # break symmetry with uniform eigenvectors
    v /= np.linalg.norm(v)
    est = 1.0
    for _ in range(30):
        w = H @ v
        est = float(np.linalg.norm(w))
        if est == 0.0:
            return 1.0
        v = w / est
    return 2.0 * est  # generous headroom over the Rayleigh estimate


def _eigsh_smallest(H, k: int, v0: np.ndarray | None, norm_scale: float,
                    matvec: Callable[[np.ndarray], np.ndarray],
                    context: str = "") -> tuple[np.ndarray, np.ndarray]:
    """ARPACK smallest-algebraic eigenpairs with deterministic start vector
    and an explicit residual check."""
    dim = H.shape[0]
    if v0 is None:
        v0 = np.full(dim, 1.0 / math.sqrt(dim))
    ncv = min(dim, max(2 * k + 1, 20))
    last_exc: Exception | None = None
    for tol, ncv_a in [(RESIDUAL_REL / 10, ncv), (0, min(dim, 2 * ncv))]:
        try:
            vals, vecs = spla.eigsh(H, k=k, which="SA", v0=v0, tol=tol,
                                    ncv=ncv_a)
        except spla.ArpackNoConvergence as exc:
            last_exc = exc
            continue
        order = np.argsort(vals, kind="stable")
        vals, vecs = vals[order], vecs[:, order]
        if _check_residuals(matvec, vals, vecs, norm_scale):
            return vals, vecs
        last_exc = None
    raise ConvergenceError(
        f"eigensolver failed residual contract {RESIDUAL_REL:g}*||H|| "
        f"(dim={dim}, k={k}, ncv={ncv}{', ' + context if context else ''})"
        + (f": {last_exc}" if last_exc else "")
    )


def _cheb_filter(H, X: np.ndarray, m: int, a: float, b: float,
                 chunk: int | None = None) -> np.ndarray:
    """Apply a degree-m Chebyshev filter for [a, b] to the block X.

    Components of X with eigenvalue below a are amplified exponentially in m
    relative to those in [a, b]; b must upper-bound the spectrum.  Long
    filters run in chunks with a QR between them: a high single polynomial
    makes the block numerically rank-deficient (every column collapses onto
    the lowest eigenvector).  Chunking costs a factor ~2 of separation per
    extra chunk, so the caller sizes chunks to what conditioning allows.
    """
    c = 0.5 * (b + a)
    e = 0.5 * (b - a)
    left = m
    while left > 0:
        step = min(chunk, left) if chunk else left
        z_prev = X
        z = (H @ X - c * X) / e
        for _ in range(step - 1):
            z_next = (2.0 / e) * (H @ z - c * z) - z_prev
            z_prev, z = z, z_next
        left -= step
        X = np.linalg.qr(z)[0] if left > 0 else z
    return X


# ---------------------------------------------------------------------------
# sweep machinery


@dataclass(frozen=True)
class AnnealSpec:
    """Protocol for one annealing sweep of a (normalized) cost Hamiltonian.

    ``hx_over_j`` is the driving strength in units of the cost scale J; the
    schedule is linear in s on [0, 1] with ``grid`` coarse points and
    golden-section refinement of the gap minimum to ``refine_tol`` in s.
    """

    cost: SpinHamiltonian
    hx_over_j: float = 1.0
    grid: int = 101
    refine_tol: float = 1e-6
    deg_tol_rel: float = DEG_TOL_REL
    solver: str = "auto"  # auto | dense | iterative
    max_qubits: int = DEFAULT_MAX_QUBITS

    def __post_init__(self) -> None:
        if self.grid < 3:
            raise ValueError("grid must have >= 3 points")
        if self.refine_tol <= 0:
            raise ValueError("refine_tol must be > 0")
        if self.hx_over_j <= 0:
            raise ValueError("hx_over_j must be > 0")
        if self.solver not in ("auto", "dense", "iterative"):
            raise ValueError(f"unknown solver {self.solver!r}")


@dataclass(frozen=True)
class SpectrumPoint:
    """Lowest two levels at one value of s (energies in units of J)."""

    s: float
    e0: float
    e1: float
    degeneracy_1: int
    v_element: float | None = None

    @property
    def gap(self) -> float:
        return self.e1 - self.e0


@dataclass(frozen=True)
class SweepResult:
    points: tuple[SpectrumPoint, ...]
    min_gap: float
    s_min: float
    v_over_j: float
    t_times_j: float
    n_spins: int
    scale_j: Fraction
    solver: str
    warnings: tuple[str, ...] = ()

    def to_csv(self, header_comments: Sequence[str] = ()) -> str:
        lines = [f"# {c}" for c in header_comments]
        lines.append("s,e0,e1,gap")
        for p in self.points:
            lines.append(f"{p.s!r},{p.e0!r},{p.e1!r},{p.gap!r}")
        return "\n".join(lines) + "\n"

    def summary_dict(self) -> dict:
        return {
            "min_gap": self.min_gap,
            "s_min": self.s_min,
            "V": self.v_over_j,
            "T": self.t_times_j,
            "n_spins": self.n_spins,
            "scale_J": str(self.scale_j),
        }


class _SweepEngine:
    """Repeated lowest-level solves of H = alpha * diag(cost) - beta * Sx.

    The sweep parametrization is alpha = s, beta = (1-s) * hx.  Eigenvector
    blocks are carried between calls as warm starts for LOBPCG, with ARPACK
    (and escalated k for degenerate manifolds) as the verified fallback;
    every accepted eigenpair satisfies the residual contract.
    """

    def __init__(self, cost: SpinHamiltonian, hx: float, solver: str = "auto",
                 max_qubits: int = DEFAULT_MAX_QUBITS,
                 deg_tol_rel: float = DEG_TOL_REL):
        n = cost.n_spins
        if n > max_qubits:
            raise SizeLimitError(f"{n} spins exceeds the {max_qubits}-qubit limit")
        self.n = n
        self.dim = 1 << n
        self.hx = float(hx)
        self.deg_tol_rel = deg_tol_rel
        self.diag = cost.diagonal()
        self.abs_diag_max = float(np.max(np.abs(self.diag))) if self.dim else 0.0
        if solver == "iterative" and n < 4:
            raise ValueError("iterative solver needs at least 4 spins")
        self.dense = solver == "dense" or (solver == "auto" and n <= DENSE_CUTOFF)
        if self.dense:
            self.sx_dense = _sx_sum_csr(n).toarray()
        else:
            indices, indptr, is_diag, off_template = _combo_structure(n)
            self._indices, self._indptr = indices, indptr
            self._is_diag = is_diag
            diag_template = np.zeros(len(indices))
            diag_template[is_diag] = self.diag
            self._diag_template = diag_template
            self._off_template = off_template
        self._warm_block: np.ndarray | None = None
        self._warm_prev: np.ndarray | None = None
        self._warm_alpha = 0.0
        self._warm_prev_alpha = 0.0
        self._warm_e0: float | None = None
        self.warnings: list[str] = []

    # -- operator assembly -------------------------------------------------

    def norm_scale(self, alpha: float, beta: float) -> float:
        return abs(alpha) * self.abs_diag_max + abs(beta) * self.n / 2.0

    def _matrix(self, alpha: float, beta: float) -> sparse.csr_matrix:
        data = alpha * self._diag_template - beta * self._off_template
        return sparse.csr_matrix((data, self._indices, self._indptr),
                                 shape=(self.dim, self.dim))

    def _dense_matrix(self, alpha: float, beta: float) -> np.ndarray:
        H = self.sx_dense * (-beta)
        H[np.diag_indices(self.dim)] += alpha * self.diag
        return H

    # -- solves ------------------------------------------------------------

    def solve(self, alpha: float, beta: float, want_vectors: bool = True,
              k_min: int = _K_INTERIOR) -> LowestLevels:
        """Lowest levels of alpha * diag - beta * Sx."""
        if self.dense:
            return self._solve_dense(alpha, beta, want_vectors, k_min)
        if beta == 0.0:
            return self._solve_diagonal(alpha, want_vectors)
        return self._solve_iterative(alpha, beta, want_vectors, k_min)

    def _solve_dense(self, alpha: float, beta: float, want_vectors: bool,
                     k_min: int) -> LowestLevels:
        H = self._dense_matrix(alpha, beta)
        top = max(k_min, _DENSE_SUBSET)
        while True:
            hi = min(top, self.dim - 1)
            vals, vecs = scipy.linalg.eigh(
                H, subset_by_index=[0, hi], driver="evr")
            tol = _deg_tol(float(vals[1]), self.deg_tol_rel)
            if hi == self.dim - 1 or vals[-1] - vals[1] > tol:
                return _split_levels(vals, vecs if want_vectors else None,
                                     None, complete=True)
            top *= 2

    def _solve_diagonal(self, alpha: float, want_vectors: bool,
                        max_vectors: int = 64) -> LowestLevels:
        """beta = 0: H is diagonal; eigenvectors are basis states.  At most
        ``max_vectors`` excited basis vectors are materialized (the manifold
        can be huge); the degeneracy count is always exact."""
        d = alpha * self.diag
        order = np.argsort(d, kind="stable")
        e0 = float(d[order[0]])
        e1 = float(d[order[1]])
        tol = _deg_tol(e1, self.deg_tol_rel)
        members = order[1:][d[order[1:]] - e1 <= tol]
        if not want_vectors:
            return LowestLevels(e0, e1, np.empty(0), np.empty((0, 0)),
                                len(members))
        ground = np.zeros(self.dim)
        ground[order[0]] = 1.0
        kept = members[:max_vectors]
        excited = np.zeros((self.dim, len(kept)))
        for j, b in enumerate(kept):
            excited[int(b), j] = 1.0
        return LowestLevels(e0, e1, ground, excited, len(members))

    def _product_ground(self) -> np.ndarray:
        return np.full(self.dim, 1.0 / math.sqrt(self.dim))

    def _solve_drive_only(self, beta: float, want_vectors: bool) -> LowestLevels:
        """alpha = 0: pure transverse field; |+>^n ground, n-fold degenerate
        first-excited manifold of single-bit flips in the x basis."""
        e0 = -beta * self.n / 2.0
        e1 = e0 + beta
        ground = self._product_ground()
        if not want_vectors:
            return LowestLevels(e0, e1, np.empty(0), np.empty((0, 0)), self.n)
        idx = np.arange(self.dim, dtype=np.int64)
        excited = np.empty((self.dim, self.n))
        for a in range(self.n):
            signs = 1.0 - 2.0 * ((idx >> a) & 1)
            excited[:, a] = signs / math.sqrt(self.dim)
        if not self.dense:  # seed the warm block for the first interior point
            self._warm_block = np.column_stack([ground, excited[:, :11]])
            self._warm_prev = None
            self._warm_alpha = 0.0
            self._warm_e0 = e0
        return LowestLevels(e0, e1, ground, excited, self.n)

    def _solve_iterative(self, alpha: float, beta: float, want_vectors: bool,
                         k_min: int) -> LowestLevels:
        if alpha == 0.0:
            return self._solve_drive_only(beta, want_vectors)
        H = self._matrix(alpha, beta)
        scale = self.norm_scale(alpha, beta)
        matvec = lambda v: H @ v  # noqa: E731
        k = max(k_min, 2)
        k_cap = min(_K_CAP, self.dim - 1)
        while True:
            pair: tuple[np.ndarray, np.ndarray] | None = None
            from_fallback = False
            if 4 * k + 8 < self.dim:
                pair = self._chebfsi(H, k, scale, alpha)
            if (pair is None and self._warm_block is not None
                    and self._warm_block.shape[1] >= k and 5 * k < self.dim):
                pair = self._try_lobpcg(H, k, scale, matvec, alpha, beta)
                from_fallback = pair is not None
            if pair is None:
                v0 = (self._warm_block[:, 0]
                      if self._warm_block is not None else None)
                pair = _eigsh_smallest(
                    H, k, v0=v0, norm_scale=scale, matvec=matvec,
                    context=f"alpha={alpha:g}, beta={beta:g}")
                from_fallback = True
            vals, vecs = pair
            tol = _deg_tol(float(vals[1]), self.deg_tol_rel)
            if vals[-1] - vals[1] > tol or k >= k_cap:
                break
            k = min(2 * k, k_cap)
        complete = bool(vals[-1] - vals[1] > _deg_tol(float(vals[1]),
                                                      self.deg_tol_rel))
        if not complete and k >= k_cap:
            self.warnings.append(
                f"first-excited manifold not resolved within k={k_cap} "
                f"eigenpairs at alpha={alpha:g}, beta={beta:g}"
            )
        if from_fallback:  # the filtered path pushes its own (fuller) block
            self._push_warm(vecs[:, :max(_K_INTERIOR, min(k, 12))].copy(),
                            alpha)
        self._warm_e0 = float(vals[0])
        # vectors come along for free (the warm block needs them anyway)
        return _split_levels(vals, vecs, None, complete=complete or k < k_cap)

    def _push_warm(self, block: np.ndarray, alpha: float) -> None:
        if alpha != self._warm_alpha:
            self._warm_prev = self._warm_block
            self._warm_prev_alpha = self._warm_alpha
        self._warm_block = block
        self._warm_alpha = alpha

    def _warm_start(self, alpha: float, B: int) -> np.ndarray:
        """Warm block for a new sweep point, linearly extrapolated along the
        schedule when two previous blocks are available."""
        X = np.array(self._warm_block[:, :B])
        prev = self._warm_prev
        if (prev is not None and prev.shape[1] >= X.shape[1]
                and self._warm_alpha != self._warm_prev_alpha):
            f = ((alpha - self._warm_alpha)
                 / (self._warm_alpha - self._warm_prev_alpha))
            if 0.0 < f <= 2.0:
                P = prev[:, :X.shape[1]]
                signs = np.sign(np.einsum("ij,ij->j", X, P))
                signs[signs == 0.0] = 1.0
                X = X + f * (X - P * signs)
        return X

    def _chebfsi(self, H, k: int, scale: float, alpha: float
                 ) -> tuple[np.ndarray, np.ndarray] | None:
        """Chebyshev-filtered subspace iteration for the k lowest pairs.

        Filters the warm block (random on the first call) against the upper
        spectrum, Rayleigh-Ritz projects, and repeats with adaptive degree
        until the residual contract holds; returns None to trigger fallback.
        """
        dim = self.dim
        B = min(max(k + _CHEB_EXTRA, 6), dim - 2)
        if self._warm_block is not None:
            X = self._warm_start(alpha, B) if _CHEB_EXTRAPOLATE \
                else np.array(self._warm_block[:, :B])
        else:
            X = np.empty((dim, 0))
        if X.shape[1] < B:
            rng = np.random.default_rng(0x5EED ^ self.n)
            X = np.hstack([X, rng.standard_normal((dim, B - X.shape[1]))])
        b = scale * (1.0 + 1e-12) + 1e-300
        strict = RESIDUAL_REL * scale * 0.9
        loose = _TAIL_RESIDUAL_REL * scale * 0.9
        m = _CHEB_DEG0
        for app in range(_CHEB_MAX_APPS + 1):
            X, _ = np.linalg.qr(X)
            Y = H @ X
            G = X.T @ Y
            theta, W = np.linalg.eigh(0.5 * (G + G.T))
            X = X @ W
            Y = Y @ W
            errs = np.linalg.norm(Y - X * theta, axis=0)
            err = float(errs[:2].max())
            # tail columns only certify level separations for degeneracy
            # counting: a residual well under the separation itself keeps
            # the certificate valid (lambda_j >= theta_j - ||r_j||), so far
            # separated columns need less polishing -- but cap the slack, or
            # inflated tail Ritz values would wreck the filter interval
            tol_deg = _deg_tol(float(theta[1]), self.deg_tol_rel)
            slack_cap = 1e-3 * scale
            tail_bad = [
                j for j in range(2, k)
                if errs[j] > max(loose,
                                 min(slack_cap,
                                     0.25 * (float(theta[j]) - float(theta[1])
                                             - tol_deg)))
            ]
            if err <= strict and not tail_bad:
                self._push_warm(X.copy(), alpha)
                return theta[:k].copy(), X[:, :k].copy()
            if app == _CHEB_MAX_APPS:
                return None
            # honest damping interval: theta[-1] may overestimate its
            # eigenvalue by up to the column residual
            cut = float(theta[-1] - errs[-1])
            if not (float(theta[1]) < cut < b):
                cut = float(theta[-1])
            if not cut < b:
                return None
            # degree needed to push the slow columns below target, from the
            # Chebyshev growth rate at their mapped Ritz values; one
            # well-chosen application beats several short ones
            c, e = 0.5 * (b + cut), 0.5 * (b - cut)

            def _gain(t: float) -> float:
                mapped = (t - c) / e
                return math.acosh(-mapped) if mapped < -1.0 else 0.0

            g1 = _gain(float(theta[min(1, B - 1)]))
            if g1 > 1e-3:
                need = math.log(max(err / strict, 10.0)) / g1
                if tail_bad:
                    gk = _gain(float(theta[tail_bad[-1]]))
                    if gk > 1e-3:
                        need = max(need,
                                   math.log(max(float(errs[tail_bad[-1]])
                                                / loose, 10.0)) / gk)
                m = int(min(_CHEB_DEG_MAX, max(12, math.ceil(need) + 4)))
            else:
                m = min(2 * m, _CHEB_DEG_MAX)
            # chunk length bounded by conditioning: the deepest column grows
            # as exp(chunk * g0) relative to the shallowest, and each extra
            # chunk trades away a factor ~2 of separation
            g0 = _gain(float(theta[0]))
            chunk = int(max(10, min(m, 25.0 / max(g0, 1e-2))))
            X = self._filter_block(H, X, m, cut, b, chunk)
        return None

    def _filter_block(self, H, X: np.ndarray, m: int, a: float, b: float,
                      chunk: int) -> np.ndarray:
        """Chebyshev filter with the shift and scale folded into the CSR
        data, so each degree is a single accumulating kernel pass."""
        if _csr_matvecs is None:
            return _cheb_filter(H, X, m, a, b, chunk)
        c = 0.5 * (b + a)
        e = 0.5 * (b - a)
        # A2 = 2 (H - c I) / e; recurrence z+ = A2 z - z-
        data2 = H.data * (2.0 / e)
        data2[self._is_diag] -= 2.0 * c / e
        dim, B = X.shape
        indptr, indices = self._indptr, self._indices
        left = m
        while left > 0:
            step = min(chunk, left)
            X = np.ascontiguousarray(X)
            prev = X
            z = np.zeros_like(X)
            _csr_matvecs(dim, dim, B, indptr, indices, data2,
                         X.ravel(), z.ravel())
            z *= 0.5
            for _ in range(step - 1):
                nxt = -prev
                _csr_matvecs(dim, dim, B, indptr, indices, data2,
                             z.ravel(), nxt.ravel())
                prev, z = z, nxt
            left -= step
            X = np.linalg.qr(z)[0] if left > 0 else z
        return X

    def _try_lobpcg(self, H, k: int, scale: float, matvec,
                    alpha: float, beta: float
                    ) -> tuple[np.ndarray, np.ndarray] | None:
        X = self._warm_block[:, :k]
        # Jacobi preconditioner about the last ground energy; effective in
        # the diagonally dominant regime (s near 1) where gaps are smallest
        M = None
        if self._warm_e0 is not None:
            denom = np.abs(alpha * self.diag - self._warm_e0)
            denom += max(abs(beta), 1e-3 * scale)
            M = sparse.diags(1.0 / denom)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                vals, vecs = spla.lobpcg(
                    H, X.copy(), M=M, tol=RESIDUAL_REL * scale * 0.5,
                    maxiter=80, largest=False)
        except (np.linalg.LinAlgError, ValueError):
            return None
        order = np.argsort(vals, kind="stable")
        vals, vecs = np.asarray(vals)[order], vecs[:, order]
        if not np.all(np.isfinite(vals)):
            return None
        if _check_residuals(matvec, vals, vecs, scale):
            return vals, vecs
        return None

    # -- sweep-specific pieces --------------------------------------------

    def levels_at(self, s: float, want_vectors: bool = True,
                  k_min: int = _K_INTERIOR) -> LowestLevels:
        return self.solve(s, (1.0 - s) * self.hx, want_vectors, k_min)

    def gap_at(self, s: float) -> float:
        lv = self.levels_at(s, want_vectors=False, k_min=2)
        return lv.e1 - lv.e0

    def v_element(self, s: float, lv: LowestLevels) -> float:
        """max_{|1>} |<1| H_cost - H_drive |0>| at this sweep point."""
        if s == 1.0:
            # exact: H_cost is diagonal (zero element), and -H_drive couples
            # the ground basis state only to Hamming-distance-1 states
            return self._v_element_end(lv)
        if lv.ground.size == 0 or lv.excited.size == 0:
            raise RuntimeError("v_element needs eigenvectors away from s=1")
        w = self.diag * lv.ground
        w += self.hx * (self._sx_apply(lv.ground))
        return float(np.max(np.abs(lv.excited.T @ w)))

    def _sx_apply(self, v: np.ndarray) -> np.ndarray:
        if self.dense:
            return self.sx_dense @ v
        return _sx_sum_csr(self.n) @ v

    def _v_element_end(self, lv: LowestLevels) -> float:
        """V at s=1 over the full first-excited manifold of the diagonal."""
        d = self.diag
        order = np.argsort(d, kind="stable")
        g = int(order[0])
        tol = _deg_tol(lv.e1, self.deg_tol_rel)
        members = order[1:][d[order[1:]] - lv.e1 <= tol]
        xor = np.bitwise_xor(members.astype(np.int64), g)
        if hasattr(np, "bitwise_count"):
            flips = np.bitwise_count(xor)
        else:
            flips = np.array([bin(int(b)).count("1") for b in xor])
        return self.hx / 2.0 if np.any(flips == 1) else 0.0


def _golden_min(f: Callable[[float], float], a: float, b: float,
                tol: float) -> tuple[float, float]:
    """Golden-section minimization on [a, b]; returns (x, f(x))."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def sweep(spec: AnnealSpec) -> SweepResult:
    """Scan the annealing schedule, refine the minimum gap, and estimate V
    and T.  Flags a warning when the ground state at s=1 is degenerate
    (encoded solution not unique)."""
    eng = _SweepEngine(spec.cost, spec.hx_over_j, spec.solver,
                       spec.max_qubits, spec.deg_tol_rel)
    grid = np.linspace(0.0, 1.0, spec.grid)
    points: list[SpectrumPoint] = []
    v_best = 0.0
    end_degenerate = False
    for s in grid:
        s = float(s)
        lv = eng.levels_at(s, want_vectors=(s != 1.0))
        v_here = eng.v_element(s, lv)
        points.append(SpectrumPoint(s, lv.e0, lv.e1, lv.degeneracy, v_here))
        v_best = max(v_best, v_here)
        if s == 1.0:
            # degenerate ground at the end means the encoded optimum is not
            # unique
            tol = _deg_tol(lv.e0, spec.deg_tol_rel)
            if lv.e1 - lv.e0 <= tol:
                end_degenerate = True

    gaps = [p.gap for p in points]
    i_min = int(np.argmin(gaps))
    a = grid[max(0, i_min - 1)]
    b = grid[min(len(grid) - 1, i_min + 1)]
    s_ref, gap_ref = _golden_min(eng.gap_at, float(a), float(b),
                                 spec.refine_tol)
    if gap_ref <= gaps[i_min]:
        s_min, min_gap = s_ref, gap_ref
    else:
        s_min, min_gap = float(grid[i_min]), gaps[i_min]

    lv_ref = eng.levels_at(s_min, want_vectors=(s_min != 1.0))
    v_best = max(v_best, eng.v_element(s_min, lv_ref))

    warns = list(eng.warnings)
    if end_degenerate:
        warns.append("degenerate ground state at s=1: encoded solution "
                     "is not unique")
    t = v_best / min_gap**2 if min_gap > 0 else math.inf
    return SweepResult(
        points=tuple(points),
        min_gap=float(min_gap),
        s_min=float(s_min),
        v_over_j=float(v_best),
        t_times_j=float(t),
        n_spins=spec.cost.n_spins,
        scale_j=spec.cost.scale_j,
        solver="dense" if eng.dense else "iterative",
        warnings=tuple(warns),
    )


# ---------------------------------------------------------------------------
# lambda scan


@dataclass(frozen=True)
class LambdaPoint:
    """One penalty strength: sweep minimum gap (units of J(lambda)) plus the
    constraint classification of the low diagonal spectrum."""

    lam: float
    min_gap: float | None
    s_min: float | None
    ground_feasible: bool
    levels: tuple[tuple[float, bool], ...]
    n_spins: int
    scale_j: Fraction


def _feasibility_mask(q: QuadratizationResult) -> np.ndarray:
    dim = 1 << q.n_vars
    idx = np.arange(dim, dtype=np.int64)
    ok = np.ones(dim, dtype=bool)
    for a, (i, j) in q.ancillas:
        bit_a = (idx >> a) & 1
        bit_i = (idx >> i) & 1
        bit_j = (idx >> j) & 1
        ok &= bit_a == (bit_i & bit_j)
    return ok


def lambda_scan(q: QuadratizationResult, lambdas: Sequence[float],
                hx_over_j: float = 1.0, include_sweep: bool = True,
                n_levels: int = 32, grid: int = 101,
                refine_tol: float = 1e-6, solver: str = "auto",
                max_qubits: int = DEFAULT_MAX_QUBITS) -> list[LambdaPoint]:
    """Assemble the QUBO cost at each lambda >= 0, sweep it (optionally), and
    label its low-lying basis states by ancilla-constraint satisfaction."""
    feasible = _feasibility_mask(q)
    out: list[LambdaPoint] = []
    for lam in lambdas:
        lam = float(lam)
        if lam < 0:
            raise ValueError("lambda must be >= 0")
        cost = assemble_cost(q, Fraction(lam))
        diag = cost.diagonal()
        order = np.argsort(diag, kind="stable")
        low = order[:min(n_levels, diag.size)]
        levels = tuple((float(diag[b]), bool(feasible[b])) for b in low)
        e0 = float(diag[order[0]])
        tol = _deg_tol(e0)
        ground_states = order[diag[order] - e0 <= tol]
        ground_feasible = bool(np.all(feasible[ground_states]))
        if include_sweep:
            res = sweep(AnnealSpec(cost=cost, hx_over_j=hx_over_j, grid=grid,
                                   refine_tol=refine_tol, solver=solver,
                                   max_qubits=max_qubits))
            min_gap, s_min = res.min_gap, res.s_min
        else:
            min_gap = s_min = None
        out.append(LambdaPoint(lam, min_gap, s_min, ground_feasible, levels,
                               cost.n_spins, cost.scale_j))
    return out


# ---------------------------------------------------------------------------
# driving-strength scan


@dataclass(frozen=True)
class DrivingPoint:
    """Sweep at one driving strength plus the dimensionless-family check:
    with g(s) = (1-s) hx / (s J) the identity H(s) = s J H'(g(s)) gives
    DeltaE/J = (hx/J) / (g_c + hx/J) * DeltaE'_c, where g_c = g(s_min) and
    DeltaE'_c is the gap of H' = H'_cost + g_c H'_drive."""

    hx_over_j: float
    min_gap: float
    s_min: float
    v_over_j: float
    t_times_j: float
    g_c: float
    delta_c: float
    predicted_gap: float


def driving_scan(cost: SpinHamiltonian, hx_values: Sequence[float],
                 grid: int = 101, refine_tol: float = 1e-6,
                 solver: str = "auto",
                 max_qubits: int = DEFAULT_MAX_QUBITS) -> list[DrivingPoint]:
    """Sweep per driving strength and verify the driving-strength law
    against an independent diagonalization of the dimensionless family."""
    out: list[DrivingPoint] = []
    for hx in hx_values:
        hx = float(hx)
        if hx <= 0:
            raise ValueError("hx must be > 0")
        res = sweep(AnnealSpec(cost=cost, hx_over_j=hx, grid=grid,
                               refine_tol=refine_tol, solver=solver,
                               max_qubits=max_qubits))
        s_min = res.s_min
        if s_min <= 0.0:
            g_c = math.inf
            delta_c = predicted = math.nan
        else:
            g_c = (1.0 - s_min) * hx / s_min
            eng = _SweepEngine(cost, hx, solver, max_qubits)
            lv = eng.solve(1.0, g_c, want_vectors=True, k_min=2)
            delta_c = lv.e1 - lv.e0
            predicted = hx / (g_c + hx) * delta_c
        out.append(DrivingPoint(hx, res.min_gap, s_min, res.v_over_j,
                                res.t_times_j, g_c, delta_c, predicted))
    return out
