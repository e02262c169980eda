"""Curves: representation, synthetic generation, perturbation, descriptors,
and the interpolation / uninterpolation machinery."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.spatial.distance import pdist, squareform

from .io import write_csv, write_json


class CurveError(ValueError):
    pass


class SARWGenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Curve:
    """Ordered 3D vertices; index order is the geodesic order."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise CurveError(f"expected an (n, 3) array, got shape {pts.shape}")
        if pts.shape[0] < 2:
            raise CurveError("a curve needs at least 2 vertices")
        steps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        if np.any(steps <= 0):
            bad = int(np.flatnonzero(steps <= 0)[0])
            raise CurveError(f"consecutive vertices {bad} and {bad + 1} coincide")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def segment_lengths(self) -> np.ndarray:
        return np.linalg.norm(np.diff(self.points, axis=0), axis=1)


def distance_matrix(curve: Curve) -> np.ndarray:
    return squareform(pdist(curve.points))


# ---------------------------------------------------------------------------
# descriptors
# ---------------------------------------------------------------------------

def _fill_ends(values: np.ndarray, first: int, last: int) -> np.ndarray:
    values[:first] = values[first]
    values[last + 1:] = values[last]
    return values


def curvature(curve: Curve) -> np.ndarray:
    """Turning angle at each interior vertex over the mean of its two segments.

    Endpoints copy the value of their nearest interior vertex.
    """
    n = curve.n
    if n < 3:
        raise CurveError("curvature needs at least 3 vertices")
    seg = np.diff(curve.points, axis=0)
    lengths = np.linalg.norm(seg, axis=1)
    a, b = seg[:-1], seg[1:]
    angle = np.arctan2(np.linalg.norm(np.cross(a, b), axis=1), np.einsum("ij,ij->i", a, b))
    out = np.empty(n)
    out[1:-1] = angle / (0.5 * (lengths[:-1] + lengths[1:]))
    return _fill_ends(out, 1, n - 2)


def torsion(curve: Curve, degenerate_tol: float = 1e-12) -> np.ndarray:
    """Signed angle between the osculating planes at i and i+1 over the mean
    length of the two segments meeting at vertex i.

    The angle is taken between planes, not oriented normals, so it lies in
    (-pi/2, pi/2] and planar curves (zig-zags included) get 0. Positive for
    right-handed helices; collinear triples give 0.
    """
    n = curve.n
    if n < 4:
        raise CurveError("torsion needs at least 4 vertices")
    seg = np.diff(curve.points, axis=0)
    lengths = np.linalg.norm(seg, axis=1)
    b1, b2, b3 = seg[:-2], seg[1:-1], seg[2:]
    n1 = np.cross(b1, b2)
    n2 = np.cross(b2, b3)
    y = lengths[1:-1] * np.einsum("ij,ij->i", b1, n2)
    x = np.einsum("ij,ij->i", n1, n2)
    angle = np.arctan2(np.where(x < 0, -y, y), np.abs(x))
    n1_norm = np.linalg.norm(n1, axis=1)
    n2_norm = np.linalg.norm(n2, axis=1)
    scale = lengths[:-2] * lengths[1:-1] + lengths[1:-1] * lengths[2:]
    degenerate = (n1_norm <= degenerate_tol * scale) | (n2_norm <= degenerate_tol * scale)
    angle[degenerate] = 0.0
    out = np.empty(n)
    out[1:n - 2] = angle / (0.5 * (lengths[:-2] + lengths[1:-1]))
    return _fill_ends(out, 1, n - 3)


def density(curve: Curve, radius: float = 2.0) -> np.ndarray:
    """Fraction of vertices (self included) strictly closer than ``radius``."""
    if radius <= 0:
        raise CurveError("radius must be positive")
    d = distance_matrix(curve)
    return (d < radius).sum(axis=1) / curve.n


def radius_of_gyration(points) -> float:
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if pts.shape[0] == 0:
        raise CurveError("radius of gyration of an empty point set")
    centred = pts - pts.mean(axis=0)
    return float(np.sqrt(np.mean(np.sum(centred ** 2, axis=1))))


# ---------------------------------------------------------------------------
# generation and perturbation
# ---------------------------------------------------------------------------

def _unit_vectors(rng: np.random.Generator, k: int) -> np.ndarray:
    v = rng.normal(size=(k, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def generate_sarw(
    length: int,
    seed: int,
    d_min: float = 1.0,
    max_attempts: int = 1000,
    max_total_attempts: int = 10_000_000,
) -> Curve:
    """Equilateral (unit step) self-avoiding random walk.

    Non-adjacent vertices are kept at distance >= ``d_min``. After
    ``max_attempts`` rejected proposals at one position the walk backs up
    one vertex.
    """
    if length < 2:
        raise CurveError("SARW length must be at least 2")
    rng = np.random.default_rng(seed)
    pts = np.zeros((length, 3))
    pts[1] = _unit_vectors(rng, 1)[0]
    k = 2
    failures = np.zeros(length, dtype=np.int64)
    total = 0
    batch = 32
    while k < length:
        proposals = pts[k - 1] + _unit_vectors(rng, batch)
        # every earlier vertex except the predecessor is non-adjacent
        dist = np.linalg.norm(proposals[:, None, :] - pts[None, :k - 1, :], axis=2)
        ok = np.flatnonzero(dist.min(axis=1) >= d_min)
        used = batch if ok.size == 0 else int(ok[0]) + 1
        total += used
        if total > max_total_attempts:
            raise SARWGenerationError(
                f"SARW of length {length} not completed after {total} attempts"
            )
        if ok.size:
            pts[k] = proposals[ok[0]]
            failures[k] = 0
            k += 1
            continue
        failures[k] += used
        if failures[k] >= max_attempts and k > 2:
            failures[k] = 0
            k -= 1
    return Curve(pts)


def perturb(curve: Curve, sigma: float, seed: int) -> Curve:
    if sigma < 0:
        raise CurveError("sigma must be non-negative")
    if sigma == 0:
        return curve
    rng = np.random.default_rng(seed)
    return Curve(curve.points + rng.normal(scale=sigma, size=curve.points.shape))


def smooth(curve: Curve, window: int = 3, passes: int = 5) -> Curve:
    """Centred moving average with pinned endpoints, applied ``passes`` times."""
    if window < 3 or window % 2 == 0:
        raise CurveError("window must be odd and >= 3")
    if passes < 1:
        raise CurveError("passes must be >= 1")
    half = window // 2
    pts = curve.points.copy()
    n = len(pts)
    idx = np.arange(n)
    # near the ends the window shrinks symmetrically; w = 0 pins the endpoints
    w = np.minimum(half, np.minimum(idx, n - 1 - idx))
    lo, hi = idx - w, idx + w + 1
    for _ in range(passes):
        csum = np.vstack([np.zeros((1, 3)), np.cumsum(pts, axis=0)])
        pts = (csum[hi] - csum[lo]) / (hi - lo)[:, None]
    return Curve(pts)


# ---------------------------------------------------------------------------
# interpolation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InterpolationMap:
    """Sparse (n_orig x n_interp) map D from interpolated to original vertices."""

    n_orig: int
    n_interp: int
    D: sp.csr_matrix
    counts: np.ndarray = field(repr=False)
    fractions: tuple = field(repr=False)

    def to_json(self) -> dict:
        coo = self.D.tocoo()
        order = np.lexsort((coo.row, coo.col))
        triplets = [
            [int(coo.row[k]), int(coo.col[k]), float(coo.data[k])] for k in order
        ]
        return {"n_orig": self.n_orig, "n_interp": self.n_interp, "triplets": triplets}

    @classmethod
    def from_json(cls, obj: dict) -> "InterpolationMap":
        n_orig, n_interp = int(obj["n_orig"]), int(obj["n_interp"])
        trip = np.asarray(obj["triplets"], dtype=float).reshape(-1, 3)
        rows, cols, w = trip[:, 0].astype(int), trip[:, 1].astype(int), trip[:, 2]
        D = sp.csr_matrix((w, (rows, cols)), shape=(n_orig, n_interp))
        fracs = [[] for _ in range(max(n_orig - 1, 0))]
        # interpolated columns carry weight t on row i + 1 of segment (i, i + 1)
        for r, c, x in zip(rows, cols, w):
            if x < 1.0 and (D[r - 1, c] if r > 0 else 0.0) > 0.0:
                fracs[r - 1].append(float(x))
        counts = np.array([len(f) for f in fracs], dtype=np.int64)
        return cls(n_orig, n_interp, D, counts, tuple(tuple(sorted(f)) for f in fracs))


def interpolation_counts(lengths: np.ndarray, extra: int) -> np.ndarray:
    """Greedy assignment: each extra vertex goes to the segment maximising
    length / (count + 1), ties to the lowest segment index."""
    counts = np.zeros(len(lengths), dtype=np.int64)
    for _ in range(extra):
        s = int(np.argmax(lengths / (counts + 1)))
        counts[s] += 1
    return counts


def interpolate(curve: Curve, target_length: int) -> tuple[Curve, InterpolationMap]:
    n = curve.n
    if target_length <= n:
        raise CurveError(f"target length {target_length} must exceed curve length {n}")
    counts = interpolation_counts(curve.segment_lengths(), target_length - n)
    pts = curve.points
    new_pts = []
    rows, cols, vals = [], [], []
    fractions = []
    col = 0
    for i in range(n):
        new_pts.append(pts[i])
        rows.append(i)
        cols.append(col)
        vals.append(1.0)
        col += 1
        if i == n - 1:
            break
        c = int(counts[i])
        fr = tuple((k + 1) / (c + 1) for k in range(c))
        fractions.append(fr)
        for t in fr:
            new_pts.append((1 - t) * pts[i] + t * pts[i + 1])
            rows.extend([i, i + 1])
            cols.extend([col, col])
            vals.extend([1 - t, t])
            col += 1
    D = sp.csr_matrix((vals, (rows, cols)), shape=(n, target_length))
    return Curve(np.array(new_pts)), InterpolationMap(n, target_length, D, counts, tuple(fractions))


def uninterpolate(imap: InterpolationMap, values, average: bool = False):
    """Map values on interpolated vertices back to original ones.

    Plain mode returns D @ values, which conserves total mass. With
    ``average`` each row is divided by its row sum of D, a weighted rolling
    average that keeps 0/1 memberships inside [0, 1].
    """
    arr = np.asarray(values, dtype=float)
    if arr.shape[0] != imap.n_interp:
        raise CurveError(
            f"expected {imap.n_interp} rows (interpolated vertices), got {arr.shape[0]}"
        )
    out = np.asarray(imap.D @ arr)
    if average:
        w = np.asarray(imap.D.sum(axis=1)).ravel()
        out = out / (w[:, None] if out.ndim == 2 else w)
    return out


def identity_map(n: int) -> InterpolationMap:
    return InterpolationMap(
        n, n, sp.identity(n, format="csr"), np.zeros(max(n - 1, 0), dtype=np.int64),
        tuple(() for _ in range(max(n - 1, 0))),
    )


# ---------------------------------------------------------------------------
# I/O
# ---------------------------------------------------------------------------

def read_curve_csv(path, time_as_z: bool = False, time_step: float = 1.0) -> Curve:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].strip().startswith("#"):
                continue
            try:
                rows.append([float(x) for x in rec])
            except ValueError:
                if rows:
                    raise CurveError(f"{path}: non-numeric row {rec!r}")
                continue  # header
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise CurveError(f"{path}: no vertices")
    if arr.shape[1] == 2:
        if not time_as_z:
            raise CurveError(f"{path}: 2D input requires --time-as-z")
        arr = np.column_stack([arr, time_step * np.arange(len(arr))])
    elif arr.shape[1] != 3:
        raise CurveError(f"{path}: expected 3 columns, got {arr.shape[1]}")
    return Curve(arr)


def write_curve_csv(curve: Curve, path, meta: dict | None = None) -> None:
    write_csv(path, ["x", "y", "z"], curve.points.tolist(), meta)


def write_interpolation_map(imap: InterpolationMap, path, meta: dict | None = None) -> None:
    obj = dict(meta or {})
    obj.update(imap.to_json())
    write_json(path, obj)
