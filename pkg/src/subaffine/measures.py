"""Invariant measures on the subshift and their thermodynamic diagnostics.

Entropy, t-energy and Lyapunov exponents are finite-depth sums over K_n
with the cylinder weights of a measure; they converge to the corresponding
limits but are always reported at their depth.  The equilibrium gap is the
finite-depth defect in the variational inequality

    P_n(t) >= (1/n) sum mu([w]) (-log mu([w]) + log phi^t(A_w)),

which is exact (nonnegative) at every depth once the cylinder weights are
conditioned on K_n; it vanishes exactly when the weights are proportional
to phi^t.  Gibbs ratio profiles probe the two-sided semiconformality
bounds depth by depth.

Two fast routes mirror the pressure module: for two diagonal 2x2 maps on
the full shift with Bernoulli-type weights all sums collapse onto letter
count classes (O(n) per depth, reaching n = 10^4), and for equal maps the
singular value function is constant per depth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from ._engine import DEFAULT_MAX_WORDS, WordTable, word_table
from .errors import (
    DepthExceeded,
    NegativeT,
    ValidationError,
    WindowOverrun,
)
from .linalg import log_phi, log_phi_from_log_alphas, singular_spectrum
from .pressure import (
    _all_equal,
    _diagonal_class_table,
    _diagonal_pair,
    _matrix_power,
)
from .symbolic import SubshiftAutomaton, Word


# ---------------------------------------------------------------------------
# measure types

@dataclass(frozen=True)
class BernoulliMeasure:
    """Product measure from a strictly positive probability vector."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 1 or np.any(p <= 0.0):
            raise ValidationError("p must be a strictly positive vector")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValidationError(f"p sums to {p.sum()!r}, not 1")
        object.__setattr__(self, "p", p)

    @property
    def kappa(self) -> int:
        return self.p.shape[0]

    def log_cylinder_prob(self, w: Sequence[int]) -> float:
        return float(np.sum(np.log(self.p[np.asarray(w, dtype=int)]))) \
            if len(w) else 0.0

    def cylinder_prob(self, w: Sequence[int]) -> float:
        return math.exp(self.log_cylinder_prob(w))

    def entropy_closed(self) -> float:
        return float(-np.sum(self.p * np.log(self.p)))


def _stationary_of(transition: np.ndarray) -> np.ndarray:
    kappa = transition.shape[0]
    m = transition.T - np.eye(kappa)
    m[-1, :] = 1.0
    rhs = np.zeros(kappa)
    rhs[-1] = 1.0
    return np.linalg.solve(m, rhs)


@dataclass(frozen=True)
class MarkovMeasure:
    """Stationary Markov chain; memory-1 subshift compatibility only.

    Zero entries of the transition matrix carve the support; a chain
    compatible with a memory-1 SFT (zeros on the forbidden pairs) is
    supported on that subshift.
    """

    transition: np.ndarray
    stationary: np.ndarray | None = None

    def __post_init__(self):
        t = np.asarray(self.transition, dtype=float)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise ValidationError("transition must be square")
        if np.any(t < 0.0) or np.any(np.abs(t.sum(axis=1) - 1.0) > 1e-9):
            raise ValidationError("transition rows must be stochastic")
        pi = self.stationary
        pi = _stationary_of(t) if pi is None else np.asarray(pi, dtype=float)
        if np.any(pi < -1e-12) or abs(pi.sum() - 1.0) > 1e-9:
            raise ValidationError("stationary vector is not a distribution")
        if np.max(np.abs(pi @ t - pi)) > 1e-10:
            raise ValidationError("stationary vector is not invariant")
        object.__setattr__(self, "transition", t)
        object.__setattr__(self, "stationary", np.maximum(pi, 0.0))

    @property
    def kappa(self) -> int:
        return self.transition.shape[0]

    def check_support(self, automaton: SubshiftAutomaton) -> None:
        """Require zero mass on the forbidden transitions of a memory-1 SFT."""
        for fw in automaton.spec.forbidden_words:
            if len(fw) != 2:
                raise ValidationError(
                    "Markov compatibility is defined for memory-1 subshifts")
            if self.transition[fw[0], fw[1]] != 0.0:
                raise ValidationError(
                    f"transition {fw} is forbidden but has positive mass")

    def log_cylinder_prob(self, w: Sequence[int]) -> float:
        if len(w) == 0:
            return 0.0
        w = np.asarray(w, dtype=int)
        with np.errstate(divide="ignore"):
            out = np.log(self.stationary[w[0]])
            if len(w) > 1:
                out += np.sum(np.log(self.transition[w[:-1], w[1:]]))
        return float(out)

    def cylinder_prob(self, w: Sequence[int]) -> float:
        return math.exp(self.log_cylinder_prob(w))

    def entropy_closed(self) -> float:
        t = self.transition
        with np.errstate(divide="ignore", invalid="ignore"):
            plogp = np.where(t > 0.0, t * np.log(t), 0.0)
        return float(-np.sum(self.stationary[:, None] * plogp))


@dataclass(frozen=True)
class MixtureMeasure:
    """Convex combination of invariant measures (itself invariant)."""

    components: tuple
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(self.components) != w.shape[0] or np.any(w <= 0.0) \
                or abs(w.sum() - 1.0) > 1e-12:
            raise ValidationError("mixture weights must be positive, sum 1")
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "weights", w)

    def log_cylinder_prob(self, w: Sequence[int]) -> float:
        vals = [math.log(wt) + c.log_cylinder_prob(w)
                for wt, c in zip(self.weights, self.components)]
        return float(logsumexp(vals))

    def cylinder_prob(self, w: Sequence[int]) -> float:
        return math.exp(self.log_cylinder_prob(w))

    def entropy_closed(self) -> float:
        # entropy is affine over invariant measures
        return float(sum(wt * c.entropy_closed()
                         for wt, c in zip(self.weights, self.components)))


@dataclass(frozen=True, eq=False)
class CylinderDistribution:
    """Finite table of weights over K_k (depth-k cylinder marginals)."""

    depth: int
    weights: dict = field(repr=False)

    def __post_init__(self):
        w = {tuple(k): float(v) for k, v in self.weights.items()}
        if any(len(k) != self.depth for k in w):
            raise ValidationError("all words must have the table depth")
        if any(v < -1e-15 for v in w.values()):
            raise ValidationError("weights must be nonnegative")
        total = sum(w.values())
        if abs(total - 1.0) > 1e-9:
            raise ValidationError(f"weights sum to {total!r}, not 1")
        object.__setattr__(self, "weights", w)

    def cylinder_prob(self, w: Sequence[int]) -> float:
        w = tuple(int(a) for a in w)
        if len(w) > self.depth:
            raise DepthExceeded(
                f"query depth {len(w)} exceeds table depth {self.depth}")
        if len(w) == self.depth:
            return self.weights.get(w, 0.0)
        return sum(v for k, v in self.weights.items() if k[:len(w)] == w)

    def log_cylinder_prob(self, w: Sequence[int]) -> float:
        p = self.cylinder_prob(w)
        return math.log(p) if p > 0.0 else -math.inf


def cylinder_prob(measure, w: Sequence[int]) -> float:
    """Probability of the cylinder [w] under the measure."""
    return measure.cylinder_prob(w)


def entropy_closed(measure) -> float:
    """Closed-form entropy where one exists (Bernoulli, Markov, mixtures)."""
    return measure.entropy_closed()


# ---------------------------------------------------------------------------
# routing helpers

def _bernoulli_components(measure):
    """(log_weights, p_rows) if the measure is Bernoulli or a mixture of
    Bernoullis, else None."""
    if isinstance(measure, BernoulliMeasure):
        return np.zeros(1), measure.p[None, :]
    if isinstance(measure, MixtureMeasure) and all(
            isinstance(c, BernoulliMeasure) for c in measure.components):
        return (np.log(measure.weights),
                np.stack([c.p for c in measure.components]))
    return None


def _class_log_probs(measure, n: int) -> np.ndarray | None:
    """Log cylinder probability per letter-count class (kappa = 2)."""
    comps = _bernoulli_components(measure)
    if comps is None or comps[1].shape[1] != 2:
        return None
    log_w, ps = comps
    k = np.arange(n + 1, dtype=float)
    per = (log_w[:, None] + k[None, :] * np.log(ps[:, 0:1])
           + (n - k)[None, :] * np.log(ps[:, 1:2]))
    return logsumexp(per, axis=0)


def _table_log_probs(measure, table: WordTable) -> np.ndarray:
    """Per-word log cylinder probabilities from a tracked letter table."""
    letters = table.letters
    if letters is None:
        raise ValidationError("table was built without letters")
    idx = letters.astype(np.int64)
    if isinstance(measure, BernoulliMeasure):
        return np.log(measure.p)[idx].sum(axis=1)
    if isinstance(measure, MarkovMeasure):
        with np.errstate(divide="ignore"):
            out = np.log(measure.stationary)[idx[:, 0]]
            if idx.shape[1] > 1:
                out = out + np.log(
                    measure.transition)[idx[:, :-1], idx[:, 1:]].sum(axis=1)
        return out
    if isinstance(measure, MixtureMeasure):
        stack = np.stack([
            math.log(wt) + _table_log_probs(c, table)
            for wt, c in zip(measure.weights, measure.components)])
        return logsumexp(stack, axis=0)
    # generic fallback: per-word lookup
    return np.array([measure.log_cylinder_prob(tuple(w))
                     for w in letters.tolist()])


def _diag_classes(measure, automaton, matrices, n: int):
    """(log_counts, log_probs, log_alphas, log_dets) per letter-count class
    when the diagonal fast path applies, else None."""
    if not _diagonal_pair(automaton, matrices):
        return None
    log_probs = _class_log_probs(measure, n)
    if log_probs is None:
        return None
    log_counts, log_alphas, log_dets = _diagonal_class_table(matrices, n)
    return log_counts, log_probs, log_alphas, log_dets


# ---------------------------------------------------------------------------
# finite-depth functionals

def entropy_finite(measure, n: int, automaton: SubshiftAutomaton, *,
                   max_words: int = DEFAULT_MAX_WORDS) -> float:
    """(1/n) sum over K_n of H(mu([w])), H(x) = -x log x, H(0) = 0."""
    if n < 1:
        raise ValidationError("depth must be >= 1")
    if not automaton.spec.forbidden_words and automaton.kappa == 2:
        log_probs = _class_log_probs(measure, n)
        if log_probs is not None:
            k = np.arange(n + 1, dtype=float)
            from scipy.special import gammaln
            log_counts = (gammaln(n + 1.0) - gammaln(k + 1.0)
                          - gammaln(n - k + 1.0))
            mass = np.exp(log_counts + log_probs)
            return float(np.sum(-mass * log_probs)) / n
    total = 0.0
    for w in automaton.words(n):
        p = measure.cylinder_prob(w)
        if p > 0.0:
            total -= p * math.log(p)
    return total / n


def energy_finite(measure, t: float, n: int, automaton: SubshiftAutomaton,
                  matrices, *, max_words: int = DEFAULT_MAX_WORDS) -> float:
    """(1/n) sum over K_n of mu([w]) log phi^t(A_w), reported at depth n."""
    if t < 0.0:
        raise NegativeT(f"t must be >= 0, got {t}")
    if n < 1:
        raise ValidationError("depth must be >= 1")
    if t == 0.0:
        return 0.0
    classes = _diag_classes(measure, automaton, matrices, n)
    if classes is not None:
        log_counts, log_probs, log_alphas, log_dets = classes
        phis = log_phi_from_log_alphas(t, log_alphas, log_dets)
        return float(np.sum(np.exp(log_counts + log_probs) * phis)) / n
    if _all_equal(matrices) and not automaton.spec.forbidden_words:
        return log_phi(t, singular_spectrum(
            _matrix_power(matrices[0], n))) / n
    table = word_table(automaton, matrices, n, track_letters=True,
                       max_words=max_words)
    log_mu = _table_log_probs(measure, table)
    phis = table.log_phis(t)
    live = np.isfinite(log_mu)
    return float(np.sum(np.exp(log_mu[live]) * phis[live])) / n


def lyapunov(measure, n: int, automaton: SubshiftAutomaton, matrices, *,
             max_words: int = DEFAULT_MAX_WORDS) -> np.ndarray:
    """Finite-depth Lyapunov spectrum, the differences of consecutive
    integer energies; sorted nonincreasing by construction."""
    if n < 1:
        raise ValidationError("depth must be >= 1")
    classes = _diag_classes(measure, automaton, matrices, n)
    if classes is not None:
        log_counts, log_probs, log_alphas, _ = classes
        mass = np.exp(log_counts + log_probs)
        return np.array([float(np.sum(mass * log_alphas[:, l])) / n
                         for l in range(log_alphas.shape[1])])
    if _all_equal(matrices) and not automaton.spec.forbidden_words:
        spec = singular_spectrum(_matrix_power(matrices[0], n))
        return spec.log_alphas / n
    table = word_table(automaton, matrices, n, track_letters=True,
                       max_words=max_words)
    log_mu = _table_log_probs(measure, table)
    live = np.isfinite(log_mu)
    mass = np.exp(log_mu[live])
    return np.array([float(np.sum(mass * table.log_alphas[live, l])) / n
                     for l in range(table.d)])


def equilibrium_gap(measure, t: float, n: int, automaton: SubshiftAutomaton,
                    matrices, *, max_words: int = DEFAULT_MAX_WORDS) -> float:
    """Finite-depth defect P_n(t) - (entropy + energy sum) / n, >= 0.

    Cylinder weights are conditioned on K_n (renormalized over the allowed
    words) before the comparison; for measures supported on K this is a
    no-op, and it keeps the Jensen inequality exact for measures that put
    mass outside the subshift.  Zero exactly when the conditioned weights
    equal phi^t(A_w) / Z_n.
    """
    if t < 0.0:
        raise NegativeT(f"t must be >= 0, got {t}")
    classes = _diag_classes(measure, automaton, matrices, n)
    if classes is not None:
        log_counts, log_probs, log_alphas, log_dets = classes
        phis = log_phi_from_log_alphas(t, log_alphas, log_dets)
        log_mass = log_counts + log_probs
        log_total = float(logsumexp(log_mass))
        mass = np.exp(log_mass - log_total)
        log_z = float(logsumexp(log_counts + phis))
        s = float(np.sum(mass * (-(log_probs - log_total) + phis)))
        return (log_z - s) / n
    table = word_table(automaton, matrices, n, track_letters=True,
                       max_words=max_words)
    log_mu = _table_log_probs(measure, table)
    phis = table.log_phis(t)
    log_z = float(logsumexp(phis))
    live = np.isfinite(log_mu)
    if not np.any(live):
        raise ValidationError("measure puts no mass on K_n")
    log_total = float(logsumexp(log_mu[live]))
    cond = log_mu[live] - log_total
    s = float(np.sum(np.exp(cond) * (-cond + phis[live])))
    return (log_z - s) / n


# ---------------------------------------------------------------------------
# Gibbs / semiconformality diagnostics

@dataclass(frozen=True)
class GibbsProfile:
    depths: np.ndarray
    min_ratios: np.ndarray
    max_ratios: np.ndarray

    @property
    def min_ratio(self) -> float:
        return float(self.min_ratios.min())

    @property
    def max_ratio(self) -> float:
        return float(self.max_ratios.max())


def gibbs_ratio_profile(measure, t: float, pressure_value: float,
                        max_depth: int, automaton: SubshiftAutomaton,
                        matrices, *, max_words: int = DEFAULT_MAX_WORDS
                        ) -> GibbsProfile:
    """Per-depth extremes of mu([w]) / (e^{-n P} phi^t(A_w)) over K_n.

    A semiconformal measure keeps both extremes inside [1/c, c] with a
    depth-stable c; a decaying minimum is the standard failure mode.
    """
    if max_depth < 1:
        raise ValidationError("max_depth must be >= 1")
    mins, maxs = [], []
    equal_bernoulli = (_all_equal(matrices)
                       and not automaton.spec.forbidden_words
                       and isinstance(measure, BernoulliMeasure))
    for n in range(1, max_depth + 1):
        shift = n * pressure_value
        if equal_bernoulli:
            phi = log_phi(t, singular_spectrum(
                _matrix_power(matrices[0], n)))
            lo = n * float(np.log(measure.p).min()) - (phi - shift)
            hi = n * float(np.log(measure.p).max()) - (phi - shift)
            mins.append(math.exp(lo))
            maxs.append(math.exp(hi))
            continue
        classes = _diag_classes(measure, automaton, matrices, n)
        if classes is not None:
            log_counts, log_probs, log_alphas, log_dets = classes
            phis = log_phi_from_log_alphas(t, log_alphas, log_dets)
            ratios = log_probs - (phis - shift)
        else:
            table = word_table(automaton, matrices, n, track_letters=True,
                               max_words=max_words)
            log_mu = _table_log_probs(measure, table)
            ratios = log_mu - (table.log_phis(t) - shift)
        mins.append(float(np.exp(ratios.min())))
        maxs.append(float(np.exp(ratios.max())))
    depths = np.arange(1, max_depth + 1)
    return GibbsProfile(depths, np.array(mins), np.array(maxs))


def gibbs_ratios(measure, t: float, pressure_value: float, max_depth: int,
                 automaton: SubshiftAutomaton, matrices, *,
                 max_words: int = DEFAULT_MAX_WORDS) -> tuple[float, float]:
    """Extremes of the Gibbs ratio over all words of length <= max_depth."""
    prof = gibbs_ratio_profile(measure, t, pressure_value, max_depth,
                               automaton, matrices, max_words=max_words)
    return prof.min_ratio, prof.max_ratio


# ---------------------------------------------------------------------------
# empirical equilibrium construction

def empirical_equilibrium(t: float, n: int, k: int,
                          automaton: SubshiftAutomaton, matrices, *,
                          max_words: int = DEFAULT_MAX_WORDS
                          ) -> CylinderDistribution:
    """Depth-k marginal of the shift-averaged phi^t-weighted word measure.

    Words in K_n are weighted by phi^t(A_w)/Z_n, each extended by its
    lexicographically least infinite continuation, and the empirical
    measure is averaged over the n shifts; windows that overrun the word
    read into the canonical tail.  These are the finite-stage measures
    whose limit points realize equilibrium measures.
    """
    if k < 1:
        raise ValidationError("marginal depth k must be >= 1")
    if k > n:
        raise WindowOverrun(f"marginal depth {k} exceeds word depth {n}")
    table = word_table(automaton, matrices, n, track_letters=True,
                       max_words=max_words)
    phis = table.log_phis(t)
    beta = np.exp(phis - logsumexp(phis))
    letters = table.letters

    kappa = automaton.kappa
    if k > 1:
        if table.states is not None:
            tails = np.array(
                [automaton.least_tail(sw, k - 1) for sw in automaton.states],
                dtype=np.uint8)
            ext = np.hstack([letters, tails[table.states]])
        else:
            ext = np.hstack([
                letters,
                np.array([automaton.least_tail(tuple(w), k - 1)
                          for w in letters.tolist()], dtype=np.uint8)])
    else:
        ext = letters

    powers = kappa ** np.arange(k - 1, -1, -1, dtype=np.int64)
    accum = np.zeros(kappa ** k)
    for j in range(n):
        codes = ext[:, j:j + k].astype(np.int64) @ powers
        accum += np.bincount(codes, weights=beta, minlength=kappa ** k)
    accum /= n

    weights = {}
    for code in np.nonzero(accum)[0]:
        word = []
        c = int(code)
        for p in powers:
            word.append(c // int(p))
            c %= int(p)
        weights[tuple(word)] = float(accum[code])
    return CylinderDistribution(k, weights)


def check_consistency(cd: CylinderDistribution, *, tol: float = 1e-9) -> bool:
    """Approximate shift invariance of a cylinder table: the depth-(k-1)
    marginal by summing the last letter must match the one by summing the
    first letter."""
    if cd.depth < 2:
        raise ValidationError("consistency check needs depth >= 2")
    last: dict[Word, float] = {}
    first: dict[Word, float] = {}
    for w, v in cd.weights.items():
        last[w[:-1]] = last.get(w[:-1], 0.0) + v
        first[w[1:]] = first.get(w[1:], 0.0) + v
    keys = set(last) | set(first)
    return all(abs(last.get(u, 0.0) - first.get(u, 0.0)) <= tol
               for u in keys)
