"""Overlapping ball regions from seeded k-means, weight schemes, restriction.

Regions are closed Euclidean balls around k-means centers; the ball radius
is (1 + tau) times the largest distance from the center to its assigned
points, so every training point is covered by construction and tau > 0
creates overlap. Clusters smaller than ``min_region_size`` are dissolved
and their points reassigned, shrinking the number of regions.

Weight schemes form a partition of unity over the covered set: weights sum
to one wherever at least one region applies and vanish identically outside
each region. Queries outside all balls fall back to the nearest region;
callers may count those events as coverage violations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import Dataset, WeightedSample, as_points
from .errors import CoverageError, InputError, InsufficientDataError

KIND_INDICATOR = "normalized-indicator"
KIND_BUMP = "smooth-bump"
_KINDS = (KIND_INDICATOR, KIND_BUMP)


def _dist_to(X: np.ndarray, center: np.ndarray) -> np.ndarray:
    # single formula shared by radius computation and membership tests so
    # boundary points compare bitwise-equal
    return np.sqrt(((X - center) ** 2).sum(axis=1))


@dataclass(frozen=True)
class RegionPredicate:
    """Closed ball {x : ||x - center|| <= radius} with a 1-based id."""

    center: np.ndarray
    radius: float
    id: int

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).reshape(-1)
        object.__setattr__(self, "center", c)
        if self.radius < 0:
            raise InputError(f"radius must be nonnegative, got {self.radius}")

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float).reshape(1, -1)
        return bool(_dist_to(x, self.center)[0] <= self.radius)

    def contains_many(self, X) -> np.ndarray:
        X = as_points(X)
        return _dist_to(X, self.center) <= self.radius

    def gap(self, X) -> np.ndarray:
        """Distance from each row of X to the ball (0 inside)."""
        X = as_points(X)
        return np.maximum(0.0, _dist_to(X, self.center) - self.radius)

    def to_dict(self) -> dict:
        return {"id": self.id, "center": self.center.tolist(),
                "radius": self.radius}


class RegionPartition:
    """A finite list of ball regions covering the training points."""

    def __init__(self, regions, tau: float, min_region_size: int = 1,
                 points: Optional[np.ndarray] = None,
                 exclusive: Optional[tuple] = None):
        self.regions = tuple(regions)
        self.tau = float(tau)
        self.min_region_size = int(min_region_size)
        self._points = None if points is None else as_points(points)
        if exclusive is not None:
            self.exclusive = tuple(bool(e) for e in exclusive)
        elif self._points is not None:
            M = self.membership(self._points)
            only_one = M.sum(axis=1) == 1
            self.exclusive = tuple(bool(np.any(M[only_one, j]))
                                   for j in range(self.B))
        else:
            self.exclusive = tuple(False for _ in self.regions)
        ids = [r.id for r in self.regions]
        if ids != list(range(1, self.B + 1)):
            raise InputError(f"region ids must be 1..B, got {ids}")

    @property
    def B(self) -> int:
        return len(self.regions)

    @property
    def points(self) -> Optional[np.ndarray]:
        """Training points the partition was fitted on (None after deserialization)."""
        return self._points

    def attach_points(self, X) -> None:
        """Re-attach training points, e.g. after deserialization."""
        self._points = as_points(X)

    def membership(self, X) -> np.ndarray:
        """Boolean (n, B) matrix of ball membership."""
        X = as_points(X)
        return np.column_stack([r.contains_many(X) for r in self.regions])

    def covers(self, X) -> np.ndarray:
        return self.membership(X).any(axis=1)

    def nearest_region_index(self, X) -> np.ndarray:
        """0-based index of the closest ball (ties to the lowest id)."""
        X = as_points(X)
        gaps = np.column_stack([r.gap(X) for r in self.regions])
        return gaps.argmin(axis=1)

    def region(self, region_id: int) -> RegionPredicate:
        try:
            return self.regions[region_id - 1]
        except IndexError:
            raise InputError(f"no region with id {region_id}") from None

    def to_dict(self) -> dict:
        return {
            "regions": [dict(r.to_dict(), exclusive=self.exclusive[j])
                        for j, r in enumerate(self.regions)],
            "tau": self.tau,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RegionPartition":
        regions = [RegionPredicate(center=np.asarray(r["center"], dtype=float),
                                   radius=float(r["radius"]), id=int(r["id"]))
                   for r in d["regions"]]
        exclusive = tuple(bool(r.get("exclusive", False)) for r in d["regions"])
        return cls(regions, tau=float(d.get("tau", 0.0)), exclusive=exclusive)


def _kmeans_pp_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:  # all points coincide with chosen centers
            centers[j:] = X[rng.integers(n, size=k - j)]
            break
        probs = d2 / total
        centers[j] = X[rng.choice(n, p=probs)]
        d2 = np.minimum(d2, ((X - centers[j]) ** 2).sum(axis=1))
    return centers


def _lloyd(X: np.ndarray, centers: np.ndarray, max_iter: int = 100):
    assign = None
    for _ in range(max_iter):
        d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=-1)
        new_assign = d2.argmin(axis=1)  # argmin ties resolve to the lowest id
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for j in range(centers.shape[0]):
            mask = assign == j
            if mask.any():
                centers[j] = X[mask].mean(axis=0)
            else:
                # re-seat an emptied cluster at the point farthest from its
                # current assignment's center (deterministic)
                far = d2[np.arange(X.shape[0]), assign].argmax()
                centers[j] = X[far]
    return centers, assign


def regionalize(points, b_target: int, tau: float = 0.0,
                min_region_size: int = 1, seed: int = 0) -> RegionPartition:
    """Seeded k-means ball partition with (1 + tau) radius inflation.

    Produces at most ``b_target`` regions; clusters smaller than
    ``min_region_size`` are dissolved (their points reassigned to the
    nearest surviving center), so the returned B may be smaller.
    """
    X = as_points(points)
    n = X.shape[0]
    if b_target < 1:
        raise InputError(f"b_target must be >= 1, got {b_target}")
    if min_region_size < 1:
        raise InputError(f"min_region_size must be >= 1, got {min_region_size}")
    if tau < 0:
        raise InputError(f"tau must be >= 0, got {tau}")
    if n < b_target * min_region_size:
        raise InsufficientDataError(
            f"{n} points cannot fill {b_target} regions of size >= {min_region_size}"
        )

    rng = np.random.default_rng(seed)
    centers = _kmeans_pp_init(X, b_target, rng)
    centers, assign = _lloyd(X, centers)

    # dissolve undersized clusters, smallest first (ties to the lowest index)
    while centers.shape[0] > 1:
        counts = np.bincount(assign, minlength=centers.shape[0])
        small = np.where(counts < min_region_size)[0]
        if small.size == 0:
            break
        drop = small[counts[small].argsort(kind="stable")][0]
        centers = np.delete(centers, drop, axis=0)
        d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=-1)
        assign = d2.argmin(axis=1)

    regions = []
    for j in range(centers.shape[0]):
        mask = assign == j
        r = float(_dist_to(X[mask], centers[j]).max()) if mask.any() else 0.0
        regions.append(RegionPredicate(center=centers[j],
                                       radius=(1.0 + tau) * r, id=j + 1))
    return RegionPartition(regions, tau=tau, min_region_size=min_region_size,
                           points=X)


class WeightScheme:
    """Pointwise convex weights over the regions of a partition.

    normalized-indicator: w_b(x) = 1[x in X_b] / #(containing regions).
    smooth-bump:          w_b(x) proportional to 1[x in X_b] exp(-d(x,c_b)^2/h^2).

    Both satisfy: weights sum to 1 wherever some region contains x, and
    w_b(x) = 0 exactly for x outside region b.
    """

    def __init__(self, kind: str, partition: RegionPartition,
                 h: Optional[float] = None):
        if kind not in _KINDS:
            raise InputError(f"unknown weight scheme {kind!r}; expected {_KINDS}")
        if kind == KIND_BUMP:
            if h is None or not h > 0:
                raise InputError(f"smooth-bump needs a positive bandwidth, got {h}")
        self.kind = kind
        self.partition = partition
        self.h = None if kind == KIND_INDICATOR else float(h)

    @property
    def B(self) -> int:
        return self.partition.B

    def _raw(self, X: np.ndarray, M: np.ndarray) -> np.ndarray:
        if self.kind == KIND_INDICATOR:
            return M.astype(float)
        centers = np.stack([r.center for r in self.partition.regions])
        d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=-1)
        s = np.exp(-d2 / self.h**2)
        s[~M] = 0.0
        # guard against total underflow far from all centers
        dead = M.any(axis=1) & (s.sum(axis=1) == 0.0)
        if dead.any():
            s[dead] = M[dead].astype(float)
        return s

    def weights_many(self, X, on_uncovered: str = "nearest"):
        """(n, B) weight matrix and the boolean covered mask.

        Uncovered rows get the nearest region's unit vector when
        ``on_uncovered="nearest"``; with "error" a CoverageError is raised.
        """
        X = as_points(X)
        M = self.partition.membership(X)
        covered = M.any(axis=1)
        if not covered.all():
            if on_uncovered == "error":
                raise CoverageError(
                    f"{int((~covered).sum())} point(s) lie outside every region"
                )
            nearest = self.partition.nearest_region_index(X[~covered])
            M[np.where(~covered)[0], nearest] = True
        raw = self._raw(X, M)
        W = raw / raw.sum(axis=1, keepdims=True)
        W[~M] = 0.0
        return W, covered

    def weights_at(self, x, on_uncovered: str = "error") -> np.ndarray:
        """Weight vector at a single point; errors on uncovered x by default."""
        W, _ = self.weights_many(np.atleast_2d(np.asarray(x, dtype=float)),
                                 on_uncovered=on_uncovered)
        return W[0]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "h": self.h}

    @classmethod
    def from_dict(cls, d: dict, partition: RegionPartition) -> "WeightScheme":
        return cls(kind=d["kind"], partition=partition, h=d.get("h"))


def partition_scheme_to_dict(scheme: WeightScheme) -> dict:
    """Standalone serialized form: {regions, tau, kind, h}."""
    d = scheme.partition.to_dict()
    d.update(scheme.to_dict())
    return d


def partition_scheme_from_dict(d: dict) -> WeightScheme:
    partition = RegionPartition.from_dict(d)
    return WeightScheme(kind=d["kind"], partition=partition, h=d.get("h"))


def weight_sup_norm(scheme: WeightScheme, region_id: int, probes=None) -> float:
    """Empirical sup of w_b over region b.

    Exactly 1 when region b has a training point shared with no other
    region (then w_b at that point is forced to 1 by the scheme axioms).
    Otherwise the max over supplied probes and fit-time training points
    inside the region, a lower bound of the true sup.
    """
    partition = scheme.partition
    region = partition.region(region_id)
    if partition.exclusive[region_id - 1]:
        return 1.0
    candidates = []
    if probes is not None:
        P = as_points(probes)
        P = P[region.contains_many(P)]
        if P.shape[0]:
            candidates.append(P)
    if partition.points is not None:
        T = partition.points[region.contains_many(partition.points)]
        if T.shape[0]:
            candidates.append(T)
    if not candidates:
        raise InsufficientDataError(
            f"no probe or training points inside region {region_id}; "
            "cannot estimate the weight sup-norm"
        )
    pts = np.vstack(candidates)
    W, _ = scheme.weights_many(pts, on_uncovered="nearest")
    return float(W[:, region_id - 1].max())


def restrict(data: Dataset, partition: RegionPartition, region_id: int):
    """Uniform empirical measure on the points of ``data`` inside region b.

    Returns None (the null-measure marker) when the region holds no points.
    """
    region = partition.region(region_id)
    mask = region.contains_many(data.X)
    n_b = int(mask.sum())
    if n_b == 0:
        return None
    return WeightedSample(data.X[mask], data.y[mask], np.full(n_b, 1.0 / n_b))
