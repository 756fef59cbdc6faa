"""Small dense matrix kernel for products of contractive matrices.

Everything here works in log space.  A long product A_{i_1}... A_{i_n} of
contractive matrices underflows raw doubles near depth 500, so products are
carried as a base matrix with unit max-abs entry plus a separate log scale,
renormalized after every multiply.  The log-determinant is accumulated
exactly along the product (determinants multiply), which lets the smallest
singular value be recovered without the cancellation that squaring into
A^T A would cause.

Singular values are computed from the symmetric eigenproblem of A^T A with
cyclic Jacobi sweeps, batched over arrays of matrices; dimensions up to 4
are the intended range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    NegativeT,
    NonContractive,
    SingularMatrix,
    ValidationError,
)

_JACOBI_SWEEPS = 30
_JACOBI_TOL = 1e-15
_EIG_FLOOR = 1e-300


@dataclass(frozen=True)
class ScaledMatrix:
    """Matrix represented as base * exp(log_scale), max |base entry| = 1.

    log_det is the exact running log |det| of the represented matrix,
    accumulated factor by factor when products are formed.
    """

    base: np.ndarray
    log_scale: float
    log_det: float

    @classmethod
    def from_matrix(cls, a: np.ndarray) -> "ScaledMatrix":
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationError(f"expected a square matrix, got {a.shape}")
        scale = np.max(np.abs(a))
        if scale == 0.0:
            raise SingularMatrix("zero matrix")
        base = a / scale
        sign, logdet = np.linalg.slogdet(base)
        if sign == 0.0:
            raise SingularMatrix("matrix is singular")
        d = a.shape[0]
        return cls(base, float(np.log(scale)),
                   float(logdet) + d * float(np.log(scale)))

    @property
    def d(self) -> int:
        return self.base.shape[0]

    def matrix(self) -> np.ndarray:
        """The represented matrix in raw doubles (may underflow)."""
        return self.base * math.exp(self.log_scale)

    def __matmul__(self, other: "ScaledMatrix") -> "ScaledMatrix":
        prod = self.base @ other.base
        scale = np.max(np.abs(prod))
        if scale == 0.0:
            raise SingularMatrix("product collapsed to zero")
        return ScaledMatrix(
            prod / scale,
            self.log_scale + other.log_scale + float(np.log(scale)),
            self.log_det + other.log_det,
        )


@dataclass(frozen=True)
class SingularSpectrum:
    """Logs of singular values, sorted nonincreasing, plus log |det|.

    The identity sum(log_alphas) == log_det holds by construction: the last
    singular value is recovered from the exactly-tracked determinant.
    """

    log_alphas: np.ndarray
    log_det: float

    @property
    def d(self) -> int:
        return self.log_alphas.shape[0]


def jacobi_eigenvalues(sym: np.ndarray) -> np.ndarray:
    """Eigenvalues of a batch of small symmetric matrices, descending.

    Cyclic Jacobi sweeps over the strict upper triangle; each sweep applies
    one two-sided rotation per pivot to every matrix in the batch.  Input
    shape (..., d, d); output shape (..., d).
    """
    a = np.array(sym, dtype=float, copy=True)
    single = a.ndim == 2
    if single:
        a = a[None]
    n, d, _ = a.shape
    if d > 1:
        for _ in range(_JACOBI_SWEEPS):
            diag_scale = np.abs(np.diagonal(a, axis1=1, axis2=2)).max()
            off = 0.0
            for p in range(d - 1):
                for q in range(p + 1, d):
                    off = max(off, np.abs(a[:, p, q]).max())
            if off <= _JACOBI_TOL * max(diag_scale, _EIG_FLOOR):
                break
            for p in range(d - 1):
                for q in range(p + 1, d):
                    apq = a[:, p, q]
                    rotate = apq != 0.0
                    safe = np.where(rotate, apq, 1.0)
                    tau = (a[:, q, q] - a[:, p, p]) / (2.0 * safe)
                    sign = np.where(tau >= 0.0, 1.0, -1.0)
                    t = sign / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
                    t = np.where(rotate, t, 0.0)
                    c = 1.0 / np.sqrt(1.0 + t * t)
                    s = t * c
                    rp, rq = a[:, p, :].copy(), a[:, q, :].copy()
                    a[:, p, :] = c[:, None] * rp - s[:, None] * rq
                    a[:, q, :] = s[:, None] * rp + c[:, None] * rq
                    cp, cq = a[:, :, p].copy(), a[:, :, q].copy()
                    a[:, :, p] = c[:, None] * cp - s[:, None] * cq
                    a[:, :, q] = s[:, None] * cp + c[:, None] * cq
    eigs = np.sort(np.diagonal(a, axis1=1, axis2=2), axis=1)[:, ::-1]
    return eigs[0] if single else eigs


def batched_log_alphas(bases: np.ndarray, log_scales: np.ndarray,
                       log_dets: np.ndarray) -> np.ndarray:
    """Log singular values for a batch of scaled matrices, shape (N, d).

    Jacobi on base^T base gives the top values; the last one is replaced by
    log_det minus the rest so the determinant identity is exact even when
    the squared problem loses it to roundoff.
    """
    bases = np.asarray(bases, dtype=float)
    n, d, _ = bases.shape
    gram = np.einsum("nji,njk->nik", bases, bases)
    eigs = jacobi_eigenvalues(gram)
    top = eigs[:, 0]
    if np.any(top <= 0.0):
        raise SingularMatrix("nonpositive leading eigenvalue of A^T A")
    floor = top * 1e-32
    clipped = np.maximum(eigs, floor[:, None])
    log_alphas = 0.5 * np.log(clipped) + np.asarray(log_scales)[:, None]
    if d > 1:
        log_alphas[:, d - 1] = (np.asarray(log_dets)
                                - log_alphas[:, :d - 1].sum(axis=1))
        order = np.argsort(-log_alphas, axis=1)
        log_alphas = np.take_along_axis(log_alphas, order, axis=1)
        smallest_sq = 2.0 * (log_alphas[:, d - 1]
                             - np.asarray(log_scales))
        if np.any(smallest_sq < math.log(_EIG_FLOOR)):
            raise SingularMatrix(
                "smallest eigenvalue of A^T A below 1e-300 after scaling")
    else:
        log_alphas[:, 0] = np.asarray(log_dets)
    return log_alphas


def singular_spectrum(a: "ScaledMatrix | np.ndarray") -> SingularSpectrum:
    """Singular spectrum of one matrix (scaled or raw)."""
    if not isinstance(a, ScaledMatrix):
        a = ScaledMatrix.from_matrix(np.asarray(a))
    log_alphas = batched_log_alphas(
        a.base[None], np.array([a.log_scale]), np.array([a.log_det]))[0]
    return SingularSpectrum(log_alphas, a.log_det)


def log_phi(t: float, spectrum: SingularSpectrum) -> float:
    """log of the singular value function phi^t.

    For 0 <= t < d this is sum of the first floor(t) log singular values
    plus the fractional part times the next one; for t >= d it is
    (t/d) log |det|.
    """
    return float(log_phi_from_log_alphas(
        t, spectrum.log_alphas[None], np.array([spectrum.log_det]))[0])


def log_phi_from_log_alphas(t: float, log_alphas: np.ndarray,
                            log_dets: np.ndarray) -> np.ndarray:
    """Vectorized log phi^t over an (N, d) table of log singular values."""
    if t < 0:
        raise NegativeT(f"t must be >= 0, got {t}")
    log_alphas = np.asarray(log_alphas, dtype=float)
    d = log_alphas.shape[1]
    if t >= d:
        return (t / d) * np.asarray(log_dets, dtype=float)
    l = int(math.floor(t))
    out = log_alphas[:, :l].sum(axis=1)
    frac = t - l
    if frac > 0.0:
        out = out + frac * log_alphas[:, l]
    return out


def word_product(word: Sequence[int], matrices: Sequence[np.ndarray]) -> ScaledMatrix:
    """Scaled product A_{w_1} ... A_{w_n}, renormalized every multiply."""
    if len(word) == 0:
        raise ValidationError("word_product needs a nonempty word")
    factors = [ScaledMatrix.from_matrix(np.asarray(m)) for m in matrices]
    prod = factors[word[0]]
    for a in word[1:]:
        prod = prod @ factors[a]
    return prod


def validate_matrices(matrices: Sequence[np.ndarray], *,
                      require_contractive: bool = False) -> list[np.ndarray]:
    """Check a family of square matrices for shape, invertibility and,
    optionally, contractivity (alpha_1 < 1).  Returns float copies."""
    mats = [np.asarray(m, dtype=float) for m in matrices]
    if not mats:
        raise ValidationError("need at least one matrix")
    d = mats[0].shape[0]
    for i, m in enumerate(mats):
        if m.ndim != 2 or m.shape != (d, d):
            raise DimensionMismatch(
                f"matrix {i} has shape {m.shape}, expected ({d}, {d})")
        scale = np.max(np.abs(m))
        if scale == 0.0 or abs(np.linalg.det(m)) <= 1e-12 * scale ** d:
            raise SingularMatrix(f"matrix {i} is singular within tolerance")
        if require_contractive:
            a1 = math.exp(singular_spectrum(m).log_alphas[0])
            if a1 >= 1.0:
                raise NonContractive(
                    f"matrix {i} has alpha_1 = {a1:.6g} >= 1")
    return mats


def alpha_bounds(matrices: Sequence[np.ndarray]) -> tuple[float, float]:
    """(alpha_lower, alpha_bar) = (min_i alpha_d(A_i), max_i alpha_1(A_i))."""
    lo, hi = math.inf, 0.0
    for m in matrices:
        s = singular_spectrum(np.asarray(m))
        hi = max(hi, math.exp(s.log_alphas[0]))
        lo = min(lo, math.exp(s.log_alphas[-1]))
    return lo, hi


@dataclass(frozen=True)
class ConeCheck:
    ok: bool
    margin: float


def check_cone_condition(matrices: Sequence[np.ndarray], theta: np.ndarray,
                         beta: float) -> ConeCheck:
    """Strict invariance of the planar double cone X(theta, beta).

    The cone is the set of directions within beta/2 of the +-theta axis.
    Each A_i and its transpose must map the closed cone strictly inside;
    for a linear map and this convex-nappe cone it is enough that the two
    boundary rays land strictly interior and in a common nappe.  margin is
    the minimal angular slack in radians (negative when the check fails),
    and strictness requires margin > 1e-9.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (2,):
        raise DimensionMismatch("theta must be a 2-vector")
    if not 0.0 < beta < math.pi / 2:
        raise ValidationError("beta must lie in (0, pi/2)")
    theta = theta / np.linalg.norm(theta)
    half = beta / 2.0
    normal = np.array([-theta[1], theta[0]])
    rays = [
        math.cos(half) * theta + math.sin(half) * normal,
        math.cos(half) * theta - math.sin(half) * normal,
    ]
    margin = math.inf
    ok = True
    for m in matrices:
        m = np.asarray(m, dtype=float)
        if m.shape != (2, 2):
            raise DimensionMismatch("cone condition is implemented for d = 2")
        for mat in (m, m.T):
            images = [mat @ r for r in rays]
            sides = [float(theta @ v) for v in images]
            if sides[0] * sides[1] <= 0.0:
                # images straddle the two nappes: the image cone pokes out
                ok = False
                margin = min(margin, -half)
                continue
            for v in images:
                cosang = abs(float(theta @ v)) / float(np.linalg.norm(v))
                psi = math.acos(min(1.0, cosang))
                margin = min(margin, half - psi)
    ok = ok and margin > 1e-9
    return ConeCheck(ok, margin)


def probe_quasimultiplicativity(t: float, depth: int, automaton,
                                matrices: Sequence[np.ndarray]) -> float:
    """Empirical quasi-multiplicativity constant D at a finite depth.

    Maximum of phi^t(A_i) phi^t(A_j) / phi^t(A_{ij}) over all pairs of
    words of length <= depth in K.  Submultiplicativity makes every ratio
    >= 1; this is a depth-bounded probe, not a proof that a uniform D
    exists.
    """
    if depth < 1:
        raise ValidationError("probe depth must be >= 1")
    words = [w for k in range(1, depth + 1) for w in automaton.words(k)]
    prods = [word_product(w, matrices) for w in words]
    n = len(prods)
    d = prods[0].d
    bases = np.stack([p.base for p in prods])
    scales = np.array([p.log_scale for p in prods])
    dets = np.array([p.log_det for p in prods])
    phis = log_phi_from_log_alphas(
        t, batched_log_alphas(bases, scales, dets), dets)

    pair_bases = np.einsum("aij,bjk->abik", bases, bases).reshape(-1, d, d)
    norms = np.abs(pair_bases).max(axis=(1, 2))
    pair_bases /= norms[:, None, None]
    pair_scales = (scales[:, None] + scales[None, :]).ravel() + np.log(norms)
    pair_dets = (dets[:, None] + dets[None, :]).ravel()
    pair_phis = log_phi_from_log_alphas(
        t, batched_log_alphas(pair_bases, pair_scales, pair_dets), pair_dets)

    ratios = phis[:, None] + phis[None, :] - pair_phis.reshape(n, n)
    return max(1.0, float(np.exp(ratios.max())))
