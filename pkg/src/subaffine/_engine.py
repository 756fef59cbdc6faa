"""Level-synchronous enumeration of K_n with per-word matrix products.

One pass walks the subshift automaton depth by depth, carrying scaled
matrix products for every live word in lexicographic order, and ends with
the per-word log singular values.  Pressure, measure, and geometry sums are
then vectorized reductions over the resulting table; the table is the
spectrum cache the root-finders reuse across t values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DepthBudgetExceeded, ValidationError
from .linalg import ScaledMatrix, batched_log_alphas, log_phi_from_log_alphas
from .symbolic import SubshiftAutomaton

DEFAULT_MAX_WORDS = 1 << 24


@dataclass(frozen=True, eq=False)
class WordTable:
    """Per-word data for K_n, rows in lexicographic word order."""

    n: int
    log_alphas: np.ndarray          # (N, d)
    log_dets: np.ndarray            # (N,)
    letters: np.ndarray | None      # (N, n) uint8, only when tracked
    states: np.ndarray | None       # (N,) final automaton state index

    @property
    def size(self) -> int:
        return self.log_alphas.shape[0]

    @property
    def d(self) -> int:
        return self.log_alphas.shape[1]

    def log_phis(self, t: float) -> np.ndarray:
        """log phi^t per word, shape (N,)."""
        return log_phi_from_log_alphas(t, self.log_alphas, self.log_dets)


def check_budget(automaton: SubshiftAutomaton, n: int,
                 max_words: int = DEFAULT_MAX_WORDS) -> int:
    """#K_n, raising DepthBudgetExceeded when it exceeds the word budget."""
    total = automaton.count(n)
    if total > max_words:
        raise DepthBudgetExceeded(
            f"#K_{n} = {total} exceeds the word budget {max_words}")
    return total


def word_table(automaton: SubshiftAutomaton, matrices, n: int, *,
               track_letters: bool = False,
               max_words: int = DEFAULT_MAX_WORDS) -> WordTable:
    """Enumerate K_n and return the per-word spectrum table."""
    if n < 1:
        raise ValidationError("depth must be >= 1")
    check_budget(automaton, n, max_words)
    factors = [ScaledMatrix.from_matrix(np.asarray(m)) for m in matrices]
    if len(factors) != automaton.kappa:
        raise ValidationError(
            f"{len(factors)} matrices for alphabet of size {automaton.kappa}")
    d = factors[0].d
    m = automaton.memory

    if n <= m:
        words = list(automaton.words(n))
        prods = []
        for w in words:
            p = factors[w[0]]
            for a in w[1:]:
                p = p @ factors[a]
            prods.append(p)
        bases = np.stack([p.base for p in prods])
        scales = np.array([p.log_scale for p in prods])
        dets = np.array([p.log_det for p in prods])
        letters = (np.array(words, dtype=np.uint8)
                   if track_letters else None)
        return WordTable(n, batched_log_alphas(bases, scales, dets),
                         dets, letters, None)

    # seed at depth m with one product per live state
    seed = []
    for sw in automaton.states:
        p = factors[sw[0]]
        for a in sw[1:]:
            p = p @ factors[a]
        seed.append(p)
    bases = np.stack([p.base for p in seed])
    scales = np.array([p.log_scale for p in seed])
    dets = np.array([p.log_det for p in seed])
    states = np.arange(len(seed), dtype=np.int64)
    letters = (np.array(automaton.states, dtype=np.uint8)
               if track_letters else None)

    fac_bases = np.stack([f.base for f in factors])
    fac_scales = np.array([f.log_scale for f in factors])
    fac_dets = np.array([f.log_det for f in factors])
    trans = automaton.transitions
    kappa = automaton.kappa

    for _ in range(n - m):
        targets = trans[states]                      # (N, kappa)
        valid = (targets >= 0).ravel()
        cand = np.einsum("nij,ajk->naik", bases, fac_bases)
        cand = cand.reshape(-1, d, d)[valid]
        norms = np.abs(cand).max(axis=(1, 2))
        bases = cand / norms[:, None, None]
        scales = ((scales[:, None] + fac_scales[None, :]).ravel()[valid]
                  + np.log(norms))
        dets = (dets[:, None] + fac_dets[None, :]).ravel()[valid]
        if letters is not None:
            reps = np.repeat(letters, kappa, axis=0)[valid]
            new_col = np.tile(np.arange(kappa, dtype=np.uint8),
                              letters.shape[0])[valid]
            letters = np.hstack([reps, new_col[:, None]])
        states = targets.ravel()[valid]

    return WordTable(n, batched_log_alphas(bases, scales, dets),
                     dets, letters, states)
