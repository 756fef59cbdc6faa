"""Projection to Euclidean space, attractor sampling, box counting.

The projection of an infinite symbol sequence is the convergent series of
translated matrix products; truncating at depth n puts every sampled point
within alpha_bar^n * R0 of the limit set, where R0 = max |a_i| / (1 -
alpha_bar) is the a-priori attractor radius.  Point clouds therefore carry
their resolution, and the box counter refuses scales finer than four times
it, where grid occupancy would reflect sampling rather than geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from ._engine import DEFAULT_MAX_WORDS, check_budget
from .errors import ScaleTooFine, TooFewPoints, ValidationError
from .linalg import singular_spectrum, validate_matrices, word_product
from .symbolic import SubshiftAutomaton


@dataclass(frozen=True, eq=False)
class AffineIFS:
    """Contractive affine maps x -> A_i x + a_i on R^d."""

    matrices: tuple
    translations: tuple

    def __post_init__(self):
        mats = validate_matrices(self.matrices, require_contractive=True)
        d = mats[0].shape[0]
        trs = [np.asarray(a, dtype=float).reshape(-1)
               for a in self.translations]
        if len(trs) != len(mats):
            raise ValidationError("one translation per matrix required")
        if any(a.shape != (d,) for a in trs):
            raise ValidationError(f"translations must be {d}-vectors")
        object.__setattr__(self, "matrices", tuple(mats))
        object.__setattr__(self, "translations", tuple(trs))
        a1 = [math.exp(singular_spectrum(m).log_alphas[0]) for m in mats]
        object.__setattr__(self, "_alpha_bar", max(a1))

    @property
    def d(self) -> int:
        return self.matrices[0].shape[0]

    @property
    def kappa(self) -> int:
        return len(self.matrices)

    @property
    def alpha_bar(self) -> float:
        return self._alpha_bar

    @property
    def r0(self) -> float:
        """A-priori attractor radius max |a_i| / (1 - alpha_bar)."""
        top = max(float(np.linalg.norm(a)) for a in self.translations)
        return top / (1.0 - self.alpha_bar)

    def apply(self, i: int, x: np.ndarray) -> np.ndarray:
        return self.matrices[i] @ x + self.translations[i]


@dataclass(frozen=True)
class CylinderImage:
    """Ball certificate for the image of a cylinder set."""

    word: tuple
    anchor: np.ndarray
    radius: float


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Sampled attractor points plus their guaranteed resolution."""

    points: np.ndarray
    resolution: float
    depth: int

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True, eq=False)
class BoxCountReport:
    scales: np.ndarray
    counts: np.ndarray
    slope: float
    r_squared: float


@dataclass(frozen=True)
class HyperplaneReport:
    contained: bool
    rank: int


@dataclass(frozen=True)
class InclusionReport:
    defect: float
    bound: float
    ok: bool


def project(w, ifs: AffineIFS) -> np.ndarray:
    """Finite projection sum: the anchor f_w(0) of the cylinder [w]."""
    if len(w) == 0:
        raise ValidationError("project needs a nonempty word")
    x = np.zeros(ifs.d)
    prod = np.eye(ifs.d)
    for a in w:
        x = x + prod @ ifs.translations[a]
        prod = prod @ ifs.matrices[a]
    return x


def cylinder_image(w, ifs: AffineIFS) -> CylinderImage:
    """Anchor and radius bound covering the projected cylinder."""
    spec = singular_spectrum(word_product(w, ifs.matrices))
    return CylinderImage(tuple(w), project(w, ifs),
                         math.exp(spec.log_alphas[0]) * ifs.r0)


def attractor_sample(n: int, ifs: AffineIFS, automaton: SubshiftAutomaton, *,
                     max_words: int = DEFAULT_MAX_WORDS) -> PointCloud:
    """Project every word of K_n; a cylinder cover of the attractor.

    Each point is within alpha_bar^n * R0 of the limit set and vice versa,
    which is the resolution recorded on the cloud.
    """
    if n < 1:
        raise ValidationError("depth must be >= 1")
    if ifs.kappa != automaton.kappa:
        raise ValidationError("alphabet size mismatch between IFS and shift")
    check_budget(automaton, n, max_words)
    d = ifs.d
    m = automaton.memory
    resolution = ifs.alpha_bar ** n * ifs.r0

    if n <= m:
        pts = np.stack([project(w, ifs) for w in automaton.words(n)])
        return PointCloud(pts, resolution, n)

    anchors, prods = [], []
    for sw in automaton.states:
        x = np.zeros(d)
        prod = np.eye(d)
        for a in sw:
            x = x + prod @ ifs.translations[a]
            prod = prod @ ifs.matrices[a]
        anchors.append(x)
        prods.append(prod)
    anchors = np.stack(anchors)
    prods = np.stack(prods)
    states = np.arange(len(automaton.states), dtype=np.int64)

    mats = np.stack(ifs.matrices)
    trs = np.stack(ifs.translations)
    trans = automaton.transitions
    kappa = ifs.kappa
    for _ in range(n - m):
        targets = trans[states]
        valid = (targets >= 0).ravel()
        shift = np.einsum("nij,aj->nai", prods, trs)
        new_anchors = (anchors[:, None, :] + shift).reshape(-1, d)[valid]
        new_prods = np.einsum("nij,ajk->naik", prods, mats)
        prods = new_prods.reshape(-1, d, d)[valid]
        anchors = new_anchors
        states = targets.ravel()[valid]
    return PointCloud(anchors, resolution, n)


def _as_cloud(cloud) -> PointCloud:
    if isinstance(cloud, PointCloud):
        return cloud
    pts = np.asarray(cloud, dtype=float)
    if pts.ndim != 2:
        raise ValidationError("point cloud must be an (N, d) array")
    return PointCloud(pts, 0.0, 0)


def default_scales(cloud) -> np.ndarray:
    """Dyadic ladder inside the validity window, middle half kept.

    The window runs from four times the cloud resolution up to the cloud
    diameter; trimming a quarter of the octaves at each end avoids both
    saturation (boxes the size of the set) and resolution artifacts.
    """
    cloud = _as_cloud(cloud)
    pts = cloud.points
    span = pts.max(axis=0) - pts.min(axis=0)
    diam = float(np.linalg.norm(span))
    if diam <= 0.0:
        raise ValidationError("cloud has zero diameter")
    floor = 4.0 * cloud.resolution if cloud.resolution > 0.0 \
        else diam * 2.0 ** -20
    k_lo = int(math.ceil(-math.log2(diam)))
    k_hi = int(math.floor(-math.log2(floor)))
    if k_hi < k_lo:
        raise ValidationError("no valid dyadic scales for this cloud")
    ks = list(range(k_lo, k_hi + 1))
    trim = len(ks) // 4
    if len(ks) - 2 * trim >= 2:
        ks = ks[trim:len(ks) - trim]
    return 2.0 ** -np.array(ks, dtype=float)


def box_count(cloud, anchor=None, scales=None) -> BoxCountReport:
    """Occupied-cell counts on origin-anchored grids and the fitted slope.

    The slope is the least squares fit of log N(eps) against log (1/eps)
    over the supplied scales (or the default ladder), the standard upper
    Minkowski dimension estimator.
    """
    cloud = _as_cloud(cloud)
    pts = cloud.points
    if pts.shape[0] == 0:
        raise TooFewPoints("empty cloud")
    anchor = np.zeros(cloud.d) if anchor is None \
        else np.asarray(anchor, dtype=float)
    scales = default_scales(cloud) if scales is None \
        else np.sort(np.asarray(scales, dtype=float))[::-1]
    if np.any(scales <= 0.0):
        raise ValidationError("scales must be positive")
    if cloud.resolution > 0.0 and np.any(scales < 4.0 * cloud.resolution):
        raise ScaleTooFine(
            f"finest scale {scales.min():.3g} is below 4 x resolution "
            f"{4.0 * cloud.resolution:.3g}")

    counts = np.empty(scales.shape[0], dtype=np.int64)
    for i, eps in enumerate(scales):
        cells = np.floor((pts - anchor) / eps).astype(np.int64)
        cells -= cells.min(axis=0)
        dims = cells.max(axis=0).astype(object) + 1
        if int(np.prod(dims)) < 2 ** 62:
            code = cells[:, 0].astype(np.int64)
            for j in range(1, cloud.d):
                code = code * int(dims[j]) + cells[:, j]
            counts[i] = np.unique(code).size
        else:
            counts[i] = np.unique(cells, axis=0).shape[0]

    x = np.log(1.0 / scales)
    y = np.log(counts.astype(float))
    if scales.size < 2:
        raise ValidationError("need at least two scales for a slope")
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return BoxCountReport(scales, counts, float(slope), r2)


def hyperplane_check(cloud) -> HyperplaneReport:
    """Affine rank of the cloud; contained iff rank < d.

    Rank counts singular values of the centered point matrix above 1e-8
    relative to the largest; a cloud inside a hyperplane has rank < d.
    """
    cloud = _as_cloud(cloud)
    pts = cloud.points
    if pts.shape[0] < 1:
        raise TooFewPoints("hyperplane check needs at least one point")
    centered = pts - pts.mean(axis=0)
    # SVD of the point matrix itself: squaring into a Gram matrix would
    # bury a 1e-13 second singular value under fp noise
    sigma = np.linalg.svd(centered, compute_uv=False)
    if sigma[0] <= 0.0:
        rank = 0
    else:
        rank = int(np.sum(sigma > 1e-8 * sigma[0]))
    return HyperplaneReport(rank < cloud.d, rank)


def inclusion_check(cloud, ifs: AffineIFS,
                    tolerance: float = 0.0) -> InclusionReport:
    """Defect of the covering E_K in union of images f_i(E_K).

    For every cloud point, the distance to the nearest image of a cloud
    point under any map; the maximum must not exceed tolerance plus twice
    the cloud resolution when the cloud samples a genuinely sub-invariant
    set.
    """
    cloud = _as_cloud(cloud)
    pts = cloud.points
    if pts.shape[0] == 0:
        raise TooFewPoints("empty cloud")
    images = np.vstack([pts @ np.asarray(m).T + a
                        for m, a in zip(ifs.matrices, ifs.translations)])
    dist, _ = cKDTree(images).query(pts, k=1)
    defect = float(dist.max())
    bound = tolerance + 2.0 * cloud.resolution
    return InclusionReport(defect, bound, defect <= bound)
