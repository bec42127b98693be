"""Zonal positive-definite kernels on S^2 and dense kernel-matrix assembly.

Both kernels depend on their arguments only through the chordal distance,
so every evaluation goes through the dot product (clamped to [-1, 1]) and
``||a - b||^2 = 2 - 2 a.b``; this makes zonality exact and avoids
cancellation near coincident points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .points import PointSet

DEFAULT_MEMORY_BUDGET = 2 << 30     # bytes; guards accidental |D|^2 allocations


class MatrixSizeError(MemoryError):
    """Requested dense kernel matrix exceeds the memory budget."""


def wendland_psi(u) -> np.ndarray | float:
    """Compactly supported Wendland profile ``(1-u)_+^8 (32u^3+25u^2+8u+1)``."""
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr < 0.0):
        raise ValueError("profile argument is a distance, must be >= 0")
    base = np.maximum(1.0 - u_arr, 0.0) ** 8
    poly = ((32.0 * u_arr + 25.0) * u_arr + 8.0) * u_arr + 1.0
    out = base * poly
    return float(out) if np.isscalar(u) or u_arr.ndim == 0 else out


@dataclass(frozen=True)
class KernelSpec:
    """A zonal kernel: ``gaussian`` with width sigma, or ``wendland``.

    Gaussian: exp(-||a-b||^2 / (2 sigma^2)).  Wendland: psi((1-u)_+ ...) of
    the chordal distance; support is chordal distance < 1 (geodesic pi/3).
    Both are positive definite on S^2.
    """

    kind: str
    sigma: float | None = None

    def __post_init__(self):
        if self.kind == "gaussian":
            if self.sigma is None or not self.sigma > 0:
                raise ValueError("gaussian kernel needs sigma > 0")
        elif self.kind == "wendland":
            if self.sigma is not None:
                raise ValueError("wendland kernel takes no width")
        else:
            raise ValueError(f"unknown kernel kind {self.kind!r}")

    @classmethod
    def gaussian(cls, sigma: float) -> "KernelSpec":
        return cls("gaussian", float(sigma))

    @classmethod
    def wendland(cls) -> "KernelSpec":
        return cls("wendland")

    def describe(self) -> str:
        return f"gaussian:{self.sigma:.17g}" if self.kind == "gaussian" else "wendland"

    @classmethod
    def parse(cls, text: str) -> "KernelSpec":
        """Inverse of :meth:`describe`; accepts ``wendland`` or ``gaussian:<sigma>``."""
        text = text.strip()
        if text == "wendland":
            return cls.wendland()
        if text.startswith("gaussian:"):
            return cls.gaussian(float(text.split(":", 1)[1]))
        raise ValueError(f"cannot parse kernel spec {text!r}")


def zonal_value(spec: KernelSpec, dot) -> np.ndarray:
    """Kernel value as a function of the (clamped) dot product."""
    d = np.clip(np.asarray(dot, dtype=float), -1.0, 1.0)
    if spec.kind == "gaussian":
        return np.exp(-(1.0 - d) / spec.sigma**2)   # ||a-b||^2 = 2 - 2 a.b
    return wendland_psi(np.sqrt(np.maximum(2.0 - 2.0 * d, 0.0)))


def eval_kernel(spec: KernelSpec, a, b) -> float:
    """Kernel value between two unit points."""
    dot = float(np.dot(np.asarray(a, float), np.asarray(b, float)))
    return float(zonal_value(spec, dot))


def _coords(points) -> np.ndarray:
    """Accept a PointSet or a raw (n, 3) array of unit vectors."""
    if isinstance(points, PointSet):
        return points.xyz
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"expected (n, 3) coordinates, got shape {arr.shape}")
    return arr


def _check_budget(rows: int, cols: int, budget_bytes: int | None):
    budget = DEFAULT_MEMORY_BUDGET if budget_bytes is None else budget_bytes
    need = rows * cols * 8
    if need > budget:
        raise MatrixSizeError(
            f"{rows} x {cols} kernel matrix needs {need / 2**30:.2f} GiB, "
            f"budget is {budget / 2**30:.2f} GiB")


def cross_matrix(spec: KernelSpec, rows, cols,
                 budget_bytes: int | None = None) -> np.ndarray:
    """Dense |rows| x |cols| kernel matrix between two point sets.

    Either argument may be a PointSet or a raw (n, 3) array.
    """
    r, c = _coords(rows), _coords(cols)
    _check_budget(len(r), len(c), budget_bytes)
    return zonal_value(spec, r @ c.T)


def gram(spec: KernelSpec, point_set,
         budget_bytes: int | None = None) -> np.ndarray:
    """Symmetric kernel matrix of a set against itself.

    The upper triangle is computed and mirrored, so the result satisfies
    ``M == M.T`` bitwise.
    """
    p = _coords(point_set)
    _check_budget(len(p), len(p), budget_bytes)
    m = zonal_value(spec, p @ p.T)
    upper = np.triu(m)
    return upper + np.triu(m, 1).T
