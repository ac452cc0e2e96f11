"""Ensemble studies: gap statistics, scaling fits, and the speedup estimate.

An ensemble draws random formulas from one generator at fixed N, runs the
full pipeline per instance (generate -> encode -> optionally quadratize ->
normalize -> annealing sweep) and aggregates the per-J minimum gap and
driving element Ṽ into mean/sem.  Exponential fits ln<ΔE> = ln ε − αN over
several N feed the adiabaticity-time ratio

    T_Q/T_P = (J³/J²)(ε_P/ε_Q)² (Ṽ_Q/Ṽ_P) e^{2(α_Q−α_P) N},

whose prefactor and rate are computed exactly from the fitted constants.

Instances use independent, order-insensitive random substreams, so results
do not depend on execution order or worker count.
"""

from __future__ import annotations

import csv
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Mapping, Sequence

import numpy as np

from .encodings import encode_sat
from .errors import ToolkitError
from .polynomial import (NormKind, SpinHamiltonian, bool_to_spin, normalize)
from .quadratize import quadratize
from .sat import (CnfFormula, gen_toughsat, gen_unique_pt1, gen_unique_pt4,
                  make_rng)
from .spectral import AnnealSpec, sweep

PUBO = "pubo"
QUBO = "qubo"
GENERATORS = ("toughsat", "uniquept1", "uniquept4")
DEFAULT_COUNT = 200
PUBO_N_RANGE = tuple(range(4, 11))   # desk-scale reproduction ranges
QUBO_N_RANGE = tuple(range(4, 9))


def generate_instance(generator: str, n: int, seed, m: int | None = None,
                      require_unique: bool = True) -> CnfFormula:
    """Draw one formula; ``seed`` may be an int or a substream sequence."""
    if generator == "toughsat":
        return gen_toughsat(n, m=m, seed=seed, require_unique=require_unique)
    if m is not None:
        raise ValueError(f"the clause count of {generator} is fixed "
                         f"by construction")
    if generator == "uniquept1":
        return gen_unique_pt1(n, seed=seed)
    if generator == "uniquept4":
        return gen_unique_pt4(n, seed=seed)
    raise ValueError(f"unknown generator {generator!r}; "
                     f"expected one of {GENERATORS}")


def _normalize_chain(h: SpinHamiltonian, kinds: Sequence[NormKind]
                     ) -> tuple[SpinHamiltonian, NormKind]:
    """Normalize by the first nonempty coefficient class in ``kinds``.

    Generators like uniquePT4 produce purely local Hamiltonians whose
    three- and two-body classes are empty; the fallback keeps the ensemble
    meaningful and the chosen unit is recorded per instance.
    """
    last: Exception | None = None
    for kind in kinds:
        try:
            return normalize(h, kind), kind
        except ToolkitError as exc:
            last = exc
    raise last


@dataclass(frozen=True)
class InstanceRecord:
    """One ensemble member: seed, sizes, and sweep observables (per J)."""

    index: int
    instance_seed: tuple[int, ...]
    n_spins: int
    n_ancillas: int
    min_gap: float
    s_min: float
    v_over_j: float
    t_times_j: float
    norm_kind: str
    error: str | None = None
    warnings: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class EnsembleStats:
    """Aggregated sweep observables for one (generator, N, formulation)."""

    generator: str
    n: int
    formulation: str
    count: int  # successful instances entering the statistics
    gaps: tuple[float, ...]
    vs: tuple[float, ...]
    records: tuple[InstanceRecord, ...]
    mean_gap: float
    sem_gap: float
    mean_v: float
    sem_v: float

    @property
    def failures(self) -> tuple[InstanceRecord, ...]:
        return tuple(r for r in self.records if not r.ok)


def _mean_sem(values: Sequence[float]) -> tuple[float, float]:
    if not values:
        return math.nan, math.nan
    mean = math.fsum(values) / len(values)
    if len(values) < 2:
        return mean, math.nan
    return mean, statistics.stdev(values) / math.sqrt(len(values))


def _run_instance(args: tuple) -> InstanceRecord:
    (generator, n, index, master_seed, formulation, lam, hx_over_j, m,
     require_unique, grid, solver, max_qubits) = args
    entropy = (master_seed, index)
    try:
        f = generate_instance(generator, n, seed=entropy, m=m,
                              require_unique=require_unique)
        enc = encode_sat(f)
        if formulation == PUBO:
            n_ancillas = 0
            h = bool_to_spin(enc.polynomial)
            kinds = (NormKind.PUBO, NormKind.QUBO, NormKind.LOCAL_ONLY)
        elif formulation == QUBO:
            q = quadratize(enc.polynomial)
            n_ancillas = q.n_ancillas
            h = bool_to_spin(q.problem_part + q.constraint_part * lam)
            kinds = (NormKind.QUBO, NormKind.LOCAL_ONLY)
        else:
            raise ValueError(f"unknown formulation {formulation!r}")
        cost, kind = _normalize_chain(h, kinds)
        res = sweep(AnnealSpec(cost=cost, hx_over_j=hx_over_j, grid=grid,
                               solver=solver, max_qubits=max_qubits))
        return InstanceRecord(
            index=index, instance_seed=entropy, n_spins=cost.n_spins,
            n_ancillas=n_ancillas, min_gap=res.min_gap, s_min=res.s_min,
            v_over_j=res.v_over_j, t_times_j=res.t_times_j,
            norm_kind=kind.value, warnings=tuple(res.warnings))
    except (ToolkitError, ValueError, ArithmeticError) as exc:
        return InstanceRecord(
            index=index, instance_seed=entropy, n_spins=0, n_ancillas=0,
            min_gap=math.nan, s_min=math.nan, v_over_j=math.nan,
            t_times_j=math.nan, norm_kind="",
            error=f"{type(exc).__name__}: {exc}")


def run_ensemble(generator: str, n: int, count: int = DEFAULT_COUNT,
                 formulation: str = PUBO, lam=1, hx_over_j: float = 1.0,
                 seed: int = 0, m: int | None = None,
                 require_unique: bool = True, grid: int = 101,
                 solver: str = "auto", max_qubits: int = 24,
                 jobs: int = 1) -> EnsembleStats:
    """Sweep ``count`` random instances and aggregate gap and Ṽ statistics.

    Instance i draws from substream (seed, i), so statistics are identical
    for any ``jobs`` and any execution order.  Failed instances are kept in
    ``records`` with their error string and excluded from the statistics.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    work = [(generator, n, i, seed, formulation, lam, hx_over_j, m,
             require_unique, grid, solver, max_qubits) for i in range(count)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_instance, work))
    else:
        records = [_run_instance(w) for w in work]
    records.sort(key=lambda r: r.index)
    good = [r for r in records if r.ok]
    gaps = tuple(r.min_gap for r in good)
    vs = tuple(r.v_over_j for r in good)
    mean_gap, sem_gap = _mean_sem(gaps)
    mean_v, sem_v = _mean_sem(vs)
    return EnsembleStats(generator=generator, n=n, formulation=formulation,
                         count=len(good), gaps=gaps, vs=vs,
                         records=tuple(records), mean_gap=mean_gap,
                         sem_gap=sem_gap, mean_v=mean_v, sem_v=sem_v)


def stats_from_samples(generator: str, n: int, formulation: str,
                       gaps: Sequence[float], vs: Sequence[float]
                       ) -> EnsembleStats:
    """Rebuild aggregate statistics from stored per-instance samples."""
    gaps = tuple(float(g) for g in gaps)
    vs = tuple(float(v) for v in vs)
    if len(gaps) != len(vs):
        raise ValueError("gap and V sample lists differ in length")
    mean_gap, sem_gap = _mean_sem(gaps)
    mean_v, sem_v = _mean_sem(vs)
    return EnsembleStats(generator=generator, n=n, formulation=formulation,
                         count=len(gaps), gaps=gaps, vs=vs, records=(),
                         mean_gap=mean_gap, sem_gap=sem_gap, mean_v=mean_v,
                         sem_v=sem_v)


def write_ensemble_csv(stats: Sequence[EnsembleStats], fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["generator", "N", "formulation", "instance_seed",
                     "min_gap", "V", "T", "n_ancillas"])
    for st in stats:
        for r in st.records:
            writer.writerow([
                st.generator, st.n, st.formulation,
                ":".join(str(x) for x in r.instance_seed),
                repr(r.min_gap), repr(r.v_over_j), repr(r.t_times_j),
                r.n_ancillas])


@dataclass(frozen=True)
class FitResult:
    """ln<ΔE/J> = ln ε − αN least squares with bootstrap uncertainties.

    ``alpha_samples``/``epsilon_samples`` keep the bootstrap draws so joint
    quantities (e.g. the distribution of α_Q − α_P) can be formed later.
    """

    epsilon_over_j: float
    alpha: float
    epsilon_err: float
    alpha_err: float
    n_values: tuple[int, ...]
    mean_v: float  # pooled Ṽ mean over the included ensembles
    alpha_samples: tuple[float, ...] = field(repr=False, default=())
    epsilon_samples: tuple[float, ...] = field(repr=False, default=())


def _loglinear_fit(ns: np.ndarray, means: np.ndarray) -> tuple[float, float]:
    """Return (epsilon, alpha) of the unweighted fit ln y = ln ε − αN."""
    slope, intercept = np.polyfit(ns, np.log(means), 1)
    return float(math.exp(intercept)), float(-slope)


def fit_exponential(stats: Sequence[EnsembleStats],
                    exclude: Sequence[int] = (),
                    n_boot: int = 1000, boot_seed: int = 0) -> FitResult:
    """Exponential gap fit over ensembles at several N.

    Bootstrap resamples instances within each ensemble (``n_boot`` draws,
    default 1000) to propagate sampling noise into ε and α.
    """
    included = sorted((s for s in stats if s.n not in set(exclude)),
                      key=lambda s: s.n)
    ns = np.array([s.n for s in included], dtype=float)
    if len(set(ns.tolist())) < 3:
        raise ValueError("fit needs >= 3 distinct N values after exclusion")
    means = np.array([s.mean_gap for s in included])
    if not np.all(means > 0):
        raise ValueError("ensemble mean gaps must be positive to fit")
    eps, alpha = _loglinear_fit(ns, means)
    rng = make_rng(boot_seed)
    samples = [np.asarray(s.gaps) for s in included]
    alpha_bs: list[float] = []
    eps_bs: list[float] = []
    for _ in range(n_boot):
        boot_means = np.array([
            float(np.mean(rng.choice(g, size=len(g), replace=True)))
            for g in samples])
        if not np.all(boot_means > 0):
            continue
        e_b, a_b = _loglinear_fit(ns, boot_means)
        eps_bs.append(e_b)
        alpha_bs.append(a_b)
    if len(alpha_bs) >= 2:
        alpha_err = statistics.stdev(alpha_bs)
        eps_err = statistics.stdev(eps_bs)
    else:
        alpha_err = eps_err = math.nan
    all_vs = [v for s in included for v in s.vs]
    return FitResult(epsilon_over_j=eps, alpha=alpha, epsilon_err=eps_err,
                     alpha_err=alpha_err,
                     n_values=tuple(int(x) for x in ns),
                     mean_v=(math.fsum(all_vs) / len(all_vs)
                             if all_vs else math.nan),
                     alpha_samples=tuple(alpha_bs),
                     epsilon_samples=tuple(eps_bs))


@dataclass(frozen=True)
class SpeedupEstimate:
    """Adiabaticity-time ratio T_Q/T_P split into prefactor and rate."""

    j3_over_j2: float
    vq_over_vp: float
    prefactor: float          # (J³/J²) (ε_P/ε_Q)²
    rate: float               # 2 (α_Q − α_P)
    n: int
    ratio_at_n: float         # prefactor · (Ṽ_Q/Ṽ_P) · e^{rate·N}

    def to_json_dict(self) -> Mapping:
        return {"j3_over_j2": self.j3_over_j2,
                "vq_over_vp": self.vq_over_vp,
                "prefactor": self.prefactor,
                "rate": self.rate,
                "n": self.n,
                "ratio_at_n": self.ratio_at_n}


def speedup(fit_p: FitResult, fit_q: FitResult, vq_over_vp: float,
            j3_over_j2: float, n: int) -> SpeedupEstimate:
    """Exact arithmetic of the adiabaticity-time ratio from two fits."""
    if fit_p.epsilon_over_j <= 0 or fit_q.epsilon_over_j <= 0:
        raise ValueError("fit epsilons must be positive")
    if vq_over_vp <= 0 or j3_over_j2 <= 0:
        raise ValueError("ratios must be positive")
    prefactor = j3_over_j2 * (fit_p.epsilon_over_j / fit_q.epsilon_over_j) ** 2
    rate = 2.0 * (fit_q.alpha - fit_p.alpha)
    ratio = prefactor * vq_over_vp * math.exp(rate * n)
    return SpeedupEstimate(j3_over_j2=j3_over_j2, vq_over_vp=vq_over_vp,
                           prefactor=prefactor, rate=rate, n=n,
                           ratio_at_n=ratio)


def pearson_r(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pearson correlation coefficient of two equal-length samples."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValueError("need two equal-length 1-D samples with size >= 2")
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        raise ValueError("correlation undefined for a constant sample")
    return float(np.corrcoef(x, y)[0, 1])


@dataclass(frozen=True)
class CorrelationResult:
    """Joint statistics of PUBO minimum gap vs cubic-coupling count."""

    n: int
    m: int
    count: int
    term_counts: tuple[int, ...]
    gaps: tuple[float, ...]
    pearson_r: float
    r_samples: tuple[float, ...] = field(repr=False)
    hist2d: tuple[tuple[int, ...], ...] = field(repr=False)
    term_edges: tuple[float, ...] = field(repr=False)
    gap_edges: tuple[float, ...] = field(repr=False)

    def r_interval(self, level: float = 0.95) -> tuple[float, float]:
        """Bootstrap percentile interval of |r|."""
        lo = (1.0 - level) / 2.0
        arr = np.abs(np.asarray(self.r_samples))
        return (float(np.quantile(arr, lo)),
                float(np.quantile(arr, 1.0 - lo)))


def correlation_study(n: int, m: int, count: int, seed: int = 0,
                      hx_over_j: float = 1.0, n_boot: int = 1000,
                      gap_bins: int = 24, jobs: int = 1
                      ) -> CorrelationResult:
    """Gap-vs-cubic-count correlation over a toughSAT ensemble (PUBO).

    Instances are postselected for unique solutions so the minimum gap is
    well defined at the end of the sweep.  The cubic count is the number of
    nonzero three-body couplings of the encoded spin Hamiltonian; the study
    reports Pearson r with a bootstrap resample distribution and a 2D
    histogram for display.
    """
    if count < 100:
        raise ValueError("correlation study needs count >= 100")
    stats = run_ensemble("toughsat", n, count=count, formulation=PUBO,
                         hx_over_j=hx_over_j, seed=seed, m=m,
                         require_unique=True, jobs=jobs)
    gaps: list[float] = []
    counts: list[int] = []
    for rec in stats.records:
        if not rec.ok:
            raise ToolkitError(f"instance {rec.index} failed: {rec.error}")
        f = generate_instance("toughsat", n, seed=rec.instance_seed, m=m,
                              require_unique=True)
        h = bool_to_spin(encode_sat(f).polynomial)
        counts.append(len(h.j3))
        gaps.append(rec.min_gap)
    term_arr = np.asarray(counts, dtype=float)
    gap_arr = np.asarray(gaps)
    r = pearson_r(term_arr, gap_arr)
    rng = make_rng([seed, count])  # distinct from every instance substream
    r_samples: list[float] = []
    idx = np.arange(count)
    for _ in range(n_boot):
        pick = rng.choice(idx, size=count, replace=True)
        t, g = term_arr[pick], gap_arr[pick]
        if np.ptp(t) == 0 or np.ptp(g) == 0:
            continue
        r_samples.append(pearson_r(t, g))
    t_lo, t_hi = int(term_arr.min()), int(term_arr.max())
    t_edges = np.arange(t_lo - 0.5, t_hi + 1.5)
    hist, t_e, g_e = np.histogram2d(term_arr, gap_arr,
                                    bins=[t_edges, gap_bins])
    return CorrelationResult(
        n=n, m=m, count=count,
        term_counts=tuple(int(c) for c in counts), gaps=tuple(gaps),
        pearson_r=r, r_samples=tuple(r_samples),
        hist2d=tuple(tuple(int(v) for v in row) for row in hist),
        term_edges=tuple(float(x) for x in t_e),
        gap_edges=tuple(float(x) for x in g_e))
