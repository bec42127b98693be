"""Point sets on the unit sphere: loading, generation, and geometric diagnostics.

Coordinates are plain (n, 3) float64 arrays wrapped in an immutable
:class:`PointSet`.  Generators are deterministic; file I/O uses a plain
text format (three whitespace-separated reals per line, ``#`` comments).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from math import gcd
from pathlib import Path

import numpy as np

UNIT_TOL = 1e-12          # post-normalization unit-norm tolerance
LOAD_NORM_TOL = 1e-6      # acceptable norm deviation in point files


class PointFileError(ValueError):
    """Raised for malformed or out-of-tolerance point files."""


def _as_unit_rows(arr: np.ndarray, where: str) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3 or arr.shape[0] == 0:
        raise ValueError(f"{where}: expected nonempty (n, 3) array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{where}: non-finite coordinates")
    norms = np.linalg.norm(arr, axis=1)
    if np.any(np.abs(norms - 1.0) > UNIT_TOL):
        worst = np.abs(norms - 1.0).max()
        raise ValueError(f"{where}: points deviate from unit norm by {worst:.3e} (> {UNIT_TOL})")
    return arr


@dataclass(frozen=True)
class PointSet:
    """Ordered, immutable collection of unit vectors on S^2.

    Parameters
    ----------
    xyz : (n, 3) array
        Unit vectors; validated to norm 1 within 1e-12.
    design_degree : int, optional
        Attach only after the set has been verified as a spherical design
        of this degree (see :func:`sphfit.legendre.verify_design`).
    label : str
        Free-text provenance (file path or generator name).
    """

    xyz: np.ndarray
    design_degree: int | None = None
    label: str = ""

    def __post_init__(self):
        arr = _as_unit_rows(self.xyz, "PointSet")
        arr.setflags(write=False)
        object.__setattr__(self, "xyz", arr)
        if self.design_degree is not None and self.design_degree < 0:
            raise ValueError("design_degree must be nonnegative")

    def __len__(self) -> int:
        return self.xyz.shape[0]

    def with_design_degree(self, t: int) -> "PointSet":
        """Copy of this set carrying a verified design degree."""
        return replace(self, design_degree=t)

    def take(self, indices) -> "PointSet":
        """Sub-set in the given index order; drops any design degree."""
        return PointSet(self.xyz[np.asarray(indices)], label=f"{self.label}[subset]")


def normalized(arr: np.ndarray) -> np.ndarray:
    """Rows of `arr` scaled to unit length."""
    arr = np.asarray(arr, dtype=float)
    return arr / np.linalg.norm(arr, axis=-1, keepdims=True)


def load_point_file(path) -> PointSet:
    """Read a point set from a whitespace-separated ``x y z`` text file.

    Lines starting with ``#`` and blank lines are skipped.  Points whose
    norm deviates from 1 by more than 1e-6 are rejected; points already
    unit to within 1e-12 are kept bit for bit, the rest are renormalized.
    """
    path = Path(path)
    if not path.exists():
        raise PointFileError(f"{path}: no such file")
    rows = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = stripped.split()
        if len(fields) != 3:
            raise PointFileError(f"{path}:{lineno}: expected 3 fields, got {len(fields)}")
        try:
            rows.append([float(f) for f in fields])
        except ValueError as exc:
            raise PointFileError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise PointFileError(f"{path}: no points")
    arr = np.array(rows, dtype=float)
    norms = np.linalg.norm(arr, axis=1)
    bad = np.abs(norms - 1.0) > LOAD_NORM_TOL
    if np.any(bad):
        i = int(np.argmax(bad))
        raise PointFileError(
            f"{path}: point {i + 1} has norm {norms[i]:.9g}, beyond tolerance {LOAD_NORM_TOL}")
    off = np.abs(norms - 1.0) > UNIT_TOL
    if np.any(off):
        arr[off] /= norms[off, None]
    return PointSet(arr, label=str(path))


def save_point_file(path, point_set: PointSet, header: str | None = None) -> None:
    """Write a point set in the ``x y z`` text format (17 significant digits)."""
    lines = []
    if header:
        lines += [f"# {h}" for h in header.splitlines()]
    lines += [f"{p[0]:.17g} {p[1]:.17g} {p[2]:.17g}" for p in point_set.xyz]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def generate_spiral(n: int) -> PointSet:
    """Generalized spiral points (Rakhmanov-Saff-Zhou rule, constant 3.6).

    Heights are uniform in [-1, 1]; azimuths advance by 3.6/sqrt(n(1-h^2))
    per step, with both endpoints pinned to azimuth 0 at the poles.
    Deterministic: equal `n` gives bitwise-equal coordinates.
    """
    if n < 2:
        raise ValueError("spiral needs n >= 2")
    h = -1.0 + 2.0 * np.arange(n) / (n - 1)
    theta = np.arccos(np.clip(h, -1.0, 1.0))
    phi = np.zeros(n)
    acc = 0.0
    for i in range(1, n - 1):
        acc = (acc + 3.6 / math.sqrt(n * (1.0 - h[i] * h[i]))) % (2.0 * math.pi)
        phi[i] = acc
    sin_t = np.sin(theta)
    xyz = np.column_stack([sin_t * np.cos(phi), sin_t * np.sin(phi), np.cos(theta)])
    xyz[0] = (0.0, 0.0, -1.0)
    xyz[-1] = (0.0, 0.0, 1.0)
    return PointSet(normalized(xyz), label=f"spiral({n})")


# ---------------------------------------------------------------------------
# Recursive zonal equal-area partition (S^2 only)

@dataclass(frozen=True)
class EqPartition:
    """Zonal equal-area partition of S^2 into `n` regions.

    `cap_colats[i]` is the colatitude of the bottom of the i-th nested cap;
    collar `i` spans ``[cap_colats[i], cap_colats[i+1]]`` and holds
    ``collar_counts[i]`` equal-area lune cells, rotated by ``offsets[i]``
    turns.  A single polar cap sits above the first collar and below the
    last (for n >= 2).
    """

    n: int
    cap_colats: np.ndarray = field(default_factory=lambda: np.empty(0))
    collar_counts: tuple[int, ...] = ()
    offsets: tuple[float, ...] = ()

    def region_of(self, xyz: np.ndarray) -> np.ndarray:
        """Region index (0..n-1, in center-point order) of each row of `xyz`."""
        xyz = np.atleast_2d(xyz)
        colat = np.arccos(np.clip(xyz[:, 2], -1.0, 1.0))
        az = np.mod(np.arctan2(xyz[:, 1], xyz[:, 0]), 2.0 * np.pi)
        idx = np.zeros(len(colat), dtype=int)
        if self.n == 1:
            return idx
        zone = np.clip(np.searchsorted(self.cap_colats, colat, side="right"), 0,
                       len(self.collar_counts) + 1)
        first = 1
        for ci, (count, off) in enumerate(zip(self.collar_counts, self.offsets)):
            in_collar = zone == ci + 1
            cell = np.floor(np.mod(az[in_collar] / (2 * np.pi) - off, 1.0) * count).astype(int)
            idx[in_collar] = first + np.clip(cell, 0, count - 1)
            first += count
        idx[zone == 0] = 0
        idx[zone == len(self.collar_counts) + 1] = self.n - 1
        return idx


def _round_preserving_total(ideal: list[float]) -> list[int]:
    counts, disc = [], 0.0
    for r in ideal:
        k = int(round(r + disc))
        counts.append(k)
        disc += r - k
    return counts


def _circle_offset(n_top: int, n_bot: int) -> float:
    return (1.0 / n_bot - 1.0 / n_top) / 2.0 + gcd(n_top, n_bot) / (2.0 * n_top * n_bot)


def eq_area_partition(n: int) -> EqPartition:
    """Recursive zonal equal-area partition of S^2 into `n` regions."""
    if n < 1:
        raise ValueError("need n >= 1 regions")
    if n == 1:
        return EqPartition(n=1)
    c_polar = math.acos(1.0 - 2.0 / n)
    if n == 2:
        return EqPartition(n=2, cap_colats=np.array([c_polar]))
    ideal_angle = math.sqrt(4.0 * math.pi / n)
    n_collars = max(1, int(round((math.pi - 2.0 * c_polar) / ideal_angle)))
    fitting = (math.pi - 2.0 * c_polar) / n_collars
    ideal = []
    for i in range(n_collars):
        top = c_polar + i * fitting
        bot = c_polar + (i + 1) * fitting
        ideal.append(n * (math.cos(top) - math.cos(bot)) / 2.0)
    counts = _round_preserving_total(ideal)
    counts = [max(1, c) for c in counts]
    while sum(counts) > n - 2:
        counts[counts.index(max(counts))] -= 1
    while sum(counts) < n - 2:
        counts[counts.index(max(counts))] += 1
    # collar boundaries re-fit so every region has area exactly 4*pi/n
    colats, cum = [c_polar], 1
    for c in counts:
        cum += c
        colats.append(math.acos(max(-1.0, 1.0 - 2.0 * cum / n)))
    offsets, off = [0.0], 0.0
    for prev, cur in zip(counts, counts[1:]):
        off = (off + _circle_offset(prev, cur)) % 1.0
        offsets.append(off)
    return EqPartition(n=n, cap_colats=np.array(colats),
                       collar_counts=tuple(counts), offsets=tuple(offsets))


def eq_area_centers(n: int) -> PointSet:
    """Center points of the `n` regions of the zonal equal-area partition.

    Cap regions are centered on the poles; each collar cell is centered at
    the midpoint of its colatitude span and azimuth interval.
    """
    part = eq_area_partition(n)
    pts = [(0.0, 0.0, 1.0)]
    if n > 1:
        bounds = part.cap_colats
        for ci, (count, off) in enumerate(zip(part.collar_counts, part.offsets)):
            colat = (bounds[ci] + bounds[ci + 1]) / 2.0
            s, c = math.sin(colat), math.cos(colat)
            for j in range(count):
                az = 2.0 * math.pi * ((j + 0.5) / count + off)
                pts.append((s * math.cos(az), s * math.sin(az), c))
        pts.append((0.0, 0.0, -1.0))
    return PointSet(normalized(np.array(pts)), label=f"eq-centers({n})")


# ---------------------------------------------------------------------------
# Geometric diagnostics

def _min_geodesic_to_set(queries: np.ndarray, pts: np.ndarray, chunk: int = 65536):
    """For each query row, max dot product against `pts` (chunked)."""
    best = np.empty(len(queries))
    for lo in range(0, len(queries), chunk):
        hi = min(lo + chunk, len(queries))
        best[lo:hi] = (queries[lo:hi] @ pts.T).max(axis=1)
    return best


def _disc_probe(center: np.ndarray, radius: float, count: int) -> np.ndarray:
    """Deterministic spiral of `count` points in the spherical cap around `center`."""
    z = center / np.linalg.norm(center)
    a = np.array([1.0, 0.0, 0.0]) if abs(z[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = np.cross(z, a)
    u /= np.linalg.norm(u)
    v = np.cross(z, u)
    k = np.arange(1, count + 1)
    r = radius * np.sqrt(k / count)
    ang = k * math.pi * (3.0 - math.sqrt(5.0))
    tang = np.outer(r * np.cos(ang), u) + np.outer(r * np.sin(ang), v)
    return normalized(z[None, :] + tang)


def mesh_norm(point_set: PointSet) -> float:
    """Covering radius of the set, in radians.

    Maximizes the distance-to-nearest-point over a dense deterministic grid
    (spiral with 100x the set size) and refines around the winner; accurate
    to well within 2% for sets of 2+ points.
    """
    pts = point_set.xyz
    if len(pts) == 1:
        return math.pi
    grid = generate_spiral(max(200, 100 * len(pts))).xyz
    maxdot = _min_geodesic_to_set(grid, pts)
    best = int(np.argmin(maxdot))
    best_dot = maxdot[best]
    center = grid[best]
    radius = 2.0 * math.sqrt(4.0 * math.pi / len(grid))
    for _ in range(6):
        probe = np.vstack([center[None, :], _disc_probe(center, radius, 256)])
        pd = _min_geodesic_to_set(probe, pts)
        j = int(np.argmin(pd))
        if pd[j] < best_dot:
            best_dot = pd[j]
            center = probe[j]
        radius /= 3.0
    return float(np.arccos(np.clip(best_dot, -1.0, 1.0)))


def separation_radius(point_set: PointSet) -> float:
    """Half the minimum pairwise geodesic distance, in radians (exact)."""
    pts = point_set.xyz
    n = len(pts)
    if n < 2:
        raise ValueError("separation radius needs at least 2 points")
    worst = -1.0
    chunk = max(1, 2**22 // max(n, 1))
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        dots = pts[lo:hi] @ pts.T
        for r in range(lo, hi):
            dots[r - lo, r] = -2.0  # mask self-pair
        worst = max(worst, float(dots.max()))
    return float(np.arccos(np.clip(worst, -1.0, 1.0)) / 2.0)
