"""Finite-depth topological pressure, singularity dimension, derivatives.

The rigorous deliverable at any finite depth n is the upper bound

    P_n(t) = (1/n) log sum over K_n of phi^t(A_w)  >=  P_K(t),

since the pressure is the infimum of the subadditive sequence P_n.  Lower
bounds exist only under quasi-multiplicativity, which a finite probe cannot
certify, so every lower bound carries an explicit assumption record.

Three exact evaluation routes for P_n are provided.  Enumeration (the
default) walks K_n once and caches per-word spectra, so a root-find pays
for one enumeration and many cheap log-sum-exp reductions.  For two
diagonal 2x2 maps on the full shift, grouping words by their letter counts
gives the same sum in O(n) (binomial regrouping); for equal maps the sum
collapses to #K_n times a single matrix power.  The fast routes make large
depths reachable where enumeration cannot go.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln, logsumexp

from ._engine import DEFAULT_MAX_WORDS, WordTable, word_table
from .errors import (
    IntegerCrossing,
    NonContractive,
    NotDiagonal,
    TOutOfRange,
    ValidationError,
)
from .linalg import (
    ScaledMatrix,
    alpha_bounds,
    log_phi,
    log_phi_from_log_alphas,
    probe_quasimultiplicativity,
    singular_spectrum,
    validate_matrices,
)


@dataclass(frozen=True)
class PartitionSum:
    t: float
    n: int
    log_Z: float


@dataclass(frozen=True)
class QuasiAssumption:
    """Record that a lower bound assumed phi^t(A_i) phi^t(A_j) <= D phi^t(A_ij)
    for all word pairs, with D taken from a depth-limited probe."""
    D: float
    m: int

    def to_json(self) -> dict:
        return {"type": "quasimultiplicative", "D": self.D, "m": self.m}


@dataclass(frozen=True)
class PressureEstimate:
    t: float
    upper: float
    n_used: int
    lower: float | None = None
    lower_assumption: QuasiAssumption | None = None


@dataclass(frozen=True)
class DimensionBracket:
    s_upper: float
    n_used: int
    tolerance: float
    s_lower: float | None = None
    lower_assumption: QuasiAssumption | None = None


@dataclass(frozen=True)
class Kink:
    t_star: float
    jump: float


def _all_equal(matrices) -> bool:
    first = np.asarray(matrices[0])
    return all(np.array_equal(first, np.asarray(m)) for m in matrices[1:])


def _diagonal_pair(automaton, matrices) -> bool:
    if automaton.spec.forbidden_words or automaton.kappa != 2:
        return False
    mats = [np.asarray(m) for m in matrices]
    return (len(mats) == 2 and mats[0].shape == (2, 2)
            and all(m[0, 1] == 0.0 and m[1, 0] == 0.0 for m in mats))


def _diagonal_class_table(matrices, n: int):
    """Letter-count classes for two diagonal 2x2 maps on the full shift.

    Class k holds the C(n, k) words with k letters 0; all of them share the
    same diagonal product, so the class carries (log C, log alphas, log det).
    """
    m0, m1 = (np.abs(np.diag(np.asarray(m))) for m in matrices)
    k = np.arange(n + 1, dtype=float)
    s1 = k * math.log(m0[0]) + (n - k) * math.log(m1[0])
    s2 = k * math.log(m0[1]) + (n - k) * math.log(m1[1])
    log_alphas = np.stack([np.maximum(s1, s2), np.minimum(s1, s2)], axis=1)
    log_counts = gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)
    return log_counts, log_alphas, s1 + s2


def _matrix_power(matrix: np.ndarray, n: int) -> ScaledMatrix:
    result = None
    square = ScaledMatrix.from_matrix(np.asarray(matrix))
    e = n
    while e:
        if e & 1:
            result = square if result is None else result @ square
        e >>= 1
        if e:
            square = square @ square
    return result


class DepthPressure:
    """Callable t -> P_n(t) at a fixed depth, word data cached across t.

    method "enumerate" builds the word table once; "diagonal" and "equal"
    are exact regroupings of the same finite sum (no approximation), valid
    when the system has the required structure; "auto" picks the cheapest
    valid route.
    """

    def __init__(self, automaton, matrices, n: int, *, method: str = "auto",
                 max_words: int = DEFAULT_MAX_WORDS):
        if n < 1:
            raise ValidationError("depth must be >= 1")
        self.n = n
        if method == "auto":
            if _all_equal(matrices):
                method = "equal"
            elif _diagonal_pair(automaton, matrices):
                method = "diagonal"
            else:
                method = "enumerate"
        self.method = method
        if method == "equal":
            if not _all_equal(matrices):
                raise ValidationError("matrices are not all equal")
            self._log_count = math.log(automaton.count(n))
            self._power_spectrum = singular_spectrum(
                _matrix_power(matrices[0], n))
        elif method == "diagonal":
            if not _diagonal_pair(automaton, matrices):
                raise NotDiagonal(
                    "diagonal route needs two diagonal 2x2 maps, full shift")
            (self._log_counts, self._class_alphas,
             self._class_dets) = _diagonal_class_table(matrices, n)
        elif method == "enumerate":
            self.table: WordTable = word_table(
                automaton, matrices, n, max_words=max_words)
        else:
            raise ValidationError(f"unknown method {method!r}")

    def log_partition(self, t: float) -> float:
        if self.method == "equal":
            return self._log_count + log_phi(t, self._power_spectrum)
        if self.method == "diagonal":
            phis = log_phi_from_log_alphas(
                t, self._class_alphas, self._class_dets)
            return float(logsumexp(self._log_counts + phis))
        return float(logsumexp(self.table.log_phis(t)))

    def __call__(self, t: float) -> float:
        return self.log_partition(t) / self.n


def log_partition_sum(t: float, n: int, automaton, matrices, *,
                      table: WordTable | None = None,
                      max_words: int = DEFAULT_MAX_WORDS) -> PartitionSum:
    """log of sum over K_n of phi^t(A_w), by enumeration of K_n.

    Accepts a precomputed word table to amortize the enumeration across
    many values of t.
    """
    if table is None:
        table = word_table(automaton, matrices, n, max_words=max_words)
    return PartitionSum(t, n, float(logsumexp(table.log_phis(t))))


def diagonal_log_partition_sum(t: float, n: int, matrices) -> PartitionSum:
    """Same finite sum as log_partition_sum on the full shift, computed in
    O(n) by binomial regrouping (two diagonal 2x2 maps only)."""
    mats = [np.asarray(m) for m in matrices]
    if len(mats) != 2 or any(m.shape != (2, 2) for m in mats) \
            or any(m[0, 1] != 0.0 or m[1, 0] != 0.0 for m in mats):
        raise NotDiagonal("need exactly two diagonal 2x2 matrices")
    log_counts, class_alphas, class_dets = _diagonal_class_table(mats, n)
    phis = log_phi_from_log_alphas(t, class_alphas, class_dets)
    return PartitionSum(t, n, float(logsumexp(log_counts + phis)))


def pressure_upper(t: float, depths: Sequence[int], automaton, matrices, *,
                   max_words: int = DEFAULT_MAX_WORDS) -> PressureEstimate:
    """Rigorous upper bound: min over the given depths of P_n(t)."""
    if not depths:
        raise ValidationError("need at least one depth")
    best, best_n = math.inf, 0
    for n in depths:
        value = log_partition_sum(t, n, automaton, matrices,
                                  max_words=max_words).log_Z / n
        if value < best:
            best, best_n = value, n
    return PressureEstimate(t, best, best_n)


def pressure_lower(t: float, block: int, automaton, matrices, *,
                   D: float | None = None, probe_depth: int | None = None,
                   max_words: int = DEFAULT_MAX_WORDS) -> PressureEstimate:
    """Assumption-flagged lower bound (1/m)(log Z_m - log D).

    Valid only if D bounds phi^t(A_i) phi^t(A_j) / phi^t(A_ij) for *all*
    word pairs; when D is not supplied it is probed at a finite depth,
    which cannot certify that, hence the attached assumption record.
    """
    if D is None:
        D = probe_quasimultiplicativity(
            t, probe_depth or min(block, 5), automaton, matrices)
    if D < 1.0:
        raise ValidationError("quasi-multiplicativity constant must be >= 1")
    ps = log_partition_sum(t, block, automaton, matrices,
                           max_words=max_words)
    upper = ps.log_Z / block
    return PressureEstimate(t, upper, block,
                            lower=(ps.log_Z - math.log(D)) / block,
                            lower_assumption=QuasiAssumption(D, block))


def pressure_curve(ts: Sequence[float], depths: Sequence[int], automaton,
                   matrices, *, max_words: int = DEFAULT_MAX_WORDS
                   ) -> list[PressureEstimate]:
    """Upper bounds on a grid of t values, sharing one table per depth."""
    tables = [word_table(automaton, matrices, n, max_words=max_words)
              for n in depths]
    out = []
    for t in ts:
        best, best_n = math.inf, 0
        for tab in tables:
            value = float(logsumexp(tab.log_phis(t))) / tab.n
            if value < best:
                best, best_n = value, tab.n
        out.append(PressureEstimate(float(t), best, best_n))
    return out


def _bisect_root(f, lo: float, hi: float, tol: float) -> float:
    flo = f(lo)
    if flo <= 0.0:
        return lo
    while f(hi) >= 0.0:
        hi *= 2.0
        if hi > 1e6:
            raise ValidationError("could not bracket the pressure zero")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def singularity_dimension(n: int, automaton, matrices, *, tol: float = 1e-6,
                          method: str = "enumerate",
                          lower_block: int | None = None,
                          D: float | None = None,
                          probe_depth: int | None = None,
                          max_words: int = DEFAULT_MAX_WORDS
                          ) -> DimensionBracket:
    """Bracket the singularity dimension from the depth-n pressure.

    s_upper is the unique zero of the strictly decreasing map
    t -> P_n(t), found by bisection to tolerance tol; it bounds the true
    dimension from above at every finite depth.  When lower_block is given,
    s_lower is the zero of the assumption-flagged lower bound at that block
    depth.
    """
    if tol <= 0.0:
        raise ValidationError("tolerance must be positive")
    validate_matrices(matrices, require_contractive=True)
    _, abar = alpha_bounds(matrices)
    if abar >= 1.0:
        raise NonContractive("system is not contractive")
    d = np.asarray(matrices[0]).shape[0]
    t_hi = math.log(max(automaton.count(1), 2)) / math.log(1.0 / abar) + d

    evaluator = DepthPressure(automaton, matrices, n, method=method,
                              max_words=max_words)
    s_upper = _bisect_root(evaluator, 0.0, t_hi, tol)

    s_lower = None
    assumption = None
    if lower_block is not None:
        m = lower_block
        block_eval = DepthPressure(automaton, matrices, m, method=method,
                                   max_words=max_words)
        d_used = 1.0

        def lower_fn(t: float) -> float:
            nonlocal d_used
            dd = D if D is not None else probe_quasimultiplicativity(
                t, probe_depth or min(m, 5), automaton, matrices)
            d_used = max(d_used, dd)
            return block_eval(t) - math.log(dd) / m

        s_lower = _bisect_root(lower_fn, 0.0, t_hi, tol)
        assumption = QuasiAssumption(d_used, m)
    return DimensionBracket(s_upper, n, tol, s_lower, assumption)


def diagonal_pressure(t: float, matrices) -> float:
    """Exact full-shift pressure for diagonal 2x2 maps, 0 <= t <= 1.

    Equals the larger of the per-coordinate log sums of the t-th powers of
    the diagonal entries.
    """
    if t < 0.0 or t > 1.0:
        raise TOutOfRange(f"closed form is valid for 0 <= t <= 1, got {t}")
    mats = [np.asarray(m, dtype=float) for m in matrices]
    if any(m.shape != (2, 2) for m in mats) \
            or any(m[0, 1] != 0.0 or m[1, 0] != 0.0 for m in mats):
        raise NotDiagonal("diagonal closed form needs diagonal 2x2 maps")
    entries = np.abs(np.stack([np.diag(m) for m in mats]))  # (kappa, 2)
    return float(np.max(np.log(np.sum(entries ** t, axis=0))))


def _integer_guard(t: float, h: float, d: int):
    for k in range(1, d + 1):
        if abs(t - k) < 2.0 * h:
            raise IntegerCrossing(
                f"step {h} too close to the integer kink at t = {k}")


def pressure_derivative(t: float, side: str, n: int, automaton, matrices, *,
                        h: float = 1e-3, method: str = "auto",
                        evaluator: DepthPressure | None = None,
                        max_words: int = DEFAULT_MAX_WORDS) -> float:
    """One-sided finite difference of the depth-n pressure.

    Richardson-extrapolated over steps h and h/2.  Refuses steps that come
    within 2h of an integer, where the singular value function kinks.
    """
    if t <= 0.0:
        raise ValidationError("derivative is defined for t > 0")
    if side not in ("left", "right"):
        raise ValidationError("side must be 'left' or 'right'")
    if evaluator is None:
        evaluator = DepthPressure(automaton, matrices, n, method=method,
                                  max_words=max_words)
    d = np.asarray(matrices[0]).shape[0]
    _integer_guard(t, h, d)
    sgn = 1.0 if side == "right" else -1.0
    if side == "left" and t - h < 0.0:
        raise ValidationError("left step would leave t >= 0")
    p0 = evaluator(t)
    d1 = sgn * (evaluator(t + sgn * h) - p0) / h
    d2 = sgn * (evaluator(t + sgn * h / 2) - p0) / (h / 2)
    return 2.0 * d2 - d1


def detect_kink(automaton, matrices, t_range: tuple[float, float], *,
                grid: int = 64, jump_threshold: float = 0.25,
                n: int | None = None, h: float = 1e-3,
                method: str = "auto",
                max_words: int = DEFAULT_MAX_WORDS) -> list[Kink]:
    """Locate nondifferentiability points of the depth-n pressure.

    Scans chord slopes on a grid, then shrinks each candidate bracket by
    bisection on where the curvature mass sits (the depth-n pressure is
    convex between integers, so the slope increase concentrates at the
    kink).  The jump is the difference of chord slopes taken clear of the
    kink.  A numerical heuristic with a threshold, not a decision
    procedure.
    """
    if grid < 16:
        raise ValidationError("need a grid of at least 16 points")
    lo, hi = t_range
    if not lo < hi:
        raise ValidationError("empty t range")
    if n is None:
        probe = DepthPressure(automaton, matrices, 1, method=method)
        n = 65536 if probe.method in ("diagonal", "equal") else 12
    evaluator = DepthPressure(automaton, matrices, n, method=method,
                              max_words=max_words)
    cache: dict[float, float] = {}

    def f(t: float) -> float:
        if t not in cache:
            cache[t] = evaluator(t)
        return cache[t]

    ts = np.linspace(lo, hi, grid)
    delta = ts[1] - ts[0]
    values = np.array([f(t) for t in ts])
    slopes = np.diff(values) / delta
    gaps = np.diff(slopes)
    hot = np.nonzero(gaps > 0.5 * jump_threshold)[0]
    if hot.size == 0:
        return []

    groups = [[hot[0]]]
    for i in hot[1:]:
        if i - groups[-1][-1] <= 2:
            groups[-1].append(i)
        else:
            groups.append([i])

    kinks = []
    for g in groups:
        a = ts[max(g[0], 0)]
        b = ts[min(g[-1] + 2, grid - 1)]
        while b - a > max(4.0 * h, 1e-5):
            mid = 0.5 * (a + b)
            q = 0.25 * (b - a)
            mass_lo = f(mid - 2 * q) + f(mid) - 2.0 * f(mid - q)
            mass_hi = f(mid) + f(mid + 2 * q) - 2.0 * f(mid + q)
            if mass_lo >= mass_hi:
                b = mid
            else:
                a = mid
        t_star = 0.5 * (a + b)
        slope_right = (f(t_star + 6 * h) - f(t_star + 2 * h)) / (4 * h)
        slope_left = (f(t_star - 2 * h) - f(t_star - 6 * h)) / (4 * h)
        jump = slope_right - slope_left
        if jump >= jump_threshold and lo < t_star < hi:
            kinks.append(Kink(t_star, jump))
    return kinks
