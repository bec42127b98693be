"""Regularized least-squares fitting with kernel centers on a reduced set.

The model is f(x) = sum_j alpha_j K(x, c_j) over a center set C of size m,
fitted to data (x_i, y_i), i = 1..N, by minimizing

    (1/N) sum_i (f(x_i) - y_i)^2 + lam * ||f||_K^2 .

Restricting the representer expansion to C gives the m x m normal equations

    (Knm^T Knm + lam * N * Kmm) alpha = Knm^T y ,

solved through a symmetric eigendecomposition pseudo-inverse so that rank
deficiency (tiny lam, clustered centers) degrades gracefully instead of
blowing up.  ``fit_full`` covers the classical m = N case through the
equivalent system (K + lam * N * I) alpha = y.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

from .kernels import KernelSpec, cross_matrix, gram, zonal_value
from .points import PointSet

PREDICT_BLOCK_BYTES = 64 << 20


@dataclass(frozen=True)
class SolveDiagnostics:
    """How the linear system was actually solved."""

    method: str                 # "eig-pinv", "cholesky", or "loaded"
    rank_used: int              # retained spectral rank (= m for cholesky)
    eigen_threshold: float      # cutoff below which eigenvalues were dropped
    residual_norm: float        # ||A alpha - b||_2 of the solved system
    wall_time: float            # seconds spent in the linear solve
    zero_lambda: bool = False   # lam = 0 was requested (pseudo-inverse territory)


@dataclass(frozen=True)
class FittedModel:
    kernel: KernelSpec
    centers: PointSet
    coefficients: np.ndarray    # shape (m,)
    lam: float
    training_size: int
    diagnostics: SolveDiagnostics

    def __post_init__(self):
        coef = np.asarray(self.coefficients, dtype=float)
        if coef.shape != (len(self.centers),):
            raise ValueError("one coefficient per center required")
        if not np.all(np.isfinite(coef)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coefficients", coef)
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise ValueError("lam must be finite and >= 0")
        if self.training_size < 1:
            raise ValueError("training_size must be positive")

    def __call__(self, points: PointSet) -> np.ndarray:
        return predict(self, points)


def _pinv_solve(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, int, float]:
    """Solve symmetric PSD ``a x = b`` via eigendecomposition pseudo-inverse.

    Eigenvalues at or below m * eps * lambda_max are treated as zero.
    Returns (solution, rank, threshold).
    """
    m = a.shape[0]
    sym = (a + a.T) / 2.0
    w, v = np.linalg.eigh(sym)
    w_max = float(w[-1]) if m else 0.0
    threshold = m * np.finfo(float).eps * max(w_max, 0.0)
    keep = w > threshold
    rank = int(keep.sum())
    if rank == 0:
        return np.zeros(m), 0, threshold
    x = v[:, keep] @ ((v[:, keep].T @ b) / w[keep])
    return x, rank, threshold


def fit_sketched_multi(kernel: KernelSpec, data: PointSet, values,
                       centers: PointSet, lams) -> list[FittedModel]:
    """Fit one model per regularization value, sharing matrix assembly.

    The kernel matrices are built once; each lam then gets its own
    eigendecomposition.  The per-lam results are bitwise identical to
    separate :func:`fit_sketched` calls.
    """
    y = np.asarray(values, dtype=float)
    if y.shape != (len(data),):
        raise ValueError(f"values must have shape ({len(data)},), got {y.shape}")
    if not np.all(np.isfinite(y)):
        raise ValueError("values must be finite")
    lams = [float(l) for l in lams]
    if any(not (np.isfinite(l) and l >= 0) for l in lams):
        raise ValueError("regularization values must be finite and >= 0")

    knm = cross_matrix(kernel, data, centers)
    kmm = gram(kernel, centers)
    gtg = knm.T @ knm
    rhs = knm.T @ y
    n = len(data)

    models = []
    for lam in lams:
        t0 = time.perf_counter()
        a = gtg + (lam * n) * kmm
        coef, rank, threshold = _pinv_solve(a, rhs)
        wall = time.perf_counter() - t0
        diag = SolveDiagnostics(
            "eig-pinv", rank, threshold,
            residual_norm=float(np.linalg.norm(a @ coef - rhs)),
            wall_time=wall, zero_lambda=(lam == 0.0))
        models.append(FittedModel(kernel, centers, coef, lam, n, diag))
    return models


def fit_sketched(kernel: KernelSpec, data: PointSet, values,
                 centers: PointSet, lam: float) -> FittedModel:
    """Fit with centers restricted to ``centers`` (the sketched system)."""
    return fit_sketched_multi(kernel, data, values, centers, [lam])[0]


def fit_full(kernel: KernelSpec, data: PointSet, values, lam: float) -> FittedModel:
    """Fit with every data site as a center: (K + lam*N*I) alpha = y.

    Pure interpolation (lam = 0) is excluded; use a tiny lam like 1e-10 to
    approach it.  Cholesky first; if the shifted matrix turns out to be
    numerically indefinite anyway, fall back to the pseudo-inverse and
    record that in the diagnostics.
    """
    y = np.asarray(values, dtype=float)
    if y.shape != (len(data),):
        raise ValueError(f"values must have shape ({len(data)},), got {y.shape}")
    if not np.all(np.isfinite(y)):
        raise ValueError("values must be finite")
    lam = float(lam)
    if not (np.isfinite(lam) and lam > 0):
        raise ValueError("fit_full needs lam > 0")
    n = len(data)
    k = gram(kernel, data)
    shifted = k + (lam * n) * np.eye(n)
    t0 = time.perf_counter()
    try:
        coef = scipy.linalg.cho_solve(scipy.linalg.cho_factor(shifted, lower=True), y)
        diag = SolveDiagnostics(
            "cholesky", n, 0.0,
            residual_norm=float(np.linalg.norm(shifted @ coef - y)),
            wall_time=time.perf_counter() - t0)
    except scipy.linalg.LinAlgError:
        coef, rank, threshold = _pinv_solve(shifted, y)
        diag = SolveDiagnostics(
            "eig-pinv", rank, threshold,
            residual_norm=float(np.linalg.norm(shifted @ coef - y)),
            wall_time=time.perf_counter() - t0)
    return FittedModel(kernel, data, coef, lam, n, diag)


def predict(model: FittedModel, points: PointSet) -> np.ndarray:
    """Evaluate the fitted expansion at ``points``, blockwise."""
    xyz = points.xyz
    cx = model.centers.xyz
    rows_per_block = max(1, PREDICT_BLOCK_BYTES // (8 * max(len(model.centers), 1)))
    out = np.empty(len(points))
    for lo in range(0, len(points), rows_per_block):
        hi = min(lo + rows_per_block, len(points))
        out[lo:hi] = zonal_value(model.kernel, xyz[lo:hi] @ cx.T) @ model.coefficients
    return out


MODEL_MAGIC = "sphfit-model v1"


def save_model(path, model: FittedModel) -> None:
    """Write a model as text: header lines, then x y z alpha rows."""
    centers = model.centers
    lines = [
        MODEL_MAGIC,
        f"kernel {model.kernel.describe()}",
        f"lambda {model.lam:.17g}",
        f"training_size {model.training_size}",
        f"design_degree {centers.design_degree if centers.design_degree is not None else '-'}",
        f"n_centers {len(centers)}",
    ]
    for p, a in zip(centers.xyz, model.coefficients):
        lines.append(f"{p[0]:.17g} {p[1]:.17g} {p[2]:.17g} {a:.17g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path) -> FittedModel:
    """Read a model written by :func:`save_model`."""
    raw = Path(path).read_text(encoding="utf-8").splitlines()
    if not raw or raw[0].strip() != MODEL_MAGIC:
        raise ValueError(f"{path}: not a sphfit model file")
    keys = ("kernel", "lambda", "training_size", "design_degree", "n_centers")
    header: dict[str, str] = {}
    for key, line in zip(keys, raw[1:1 + len(keys)]):
        parts = line.split(None, 1)
        if len(parts) != 2 or parts[0] != key:
            raise ValueError(f"{path}: expected header line {key!r}, got {line!r}")
        header[key] = parts[1].strip()
    m = int(header["n_centers"])
    body = raw[1 + len(keys):]
    rows = [line.split() for line in body if line.strip()]
    if len(rows) != m or any(len(r) != 4 for r in rows):
        raise ValueError(f"{path}: expected {m} 'x y z alpha' rows")
    table = np.array(rows, dtype=float)
    degree = None if header["design_degree"] == "-" else int(header["design_degree"])
    centers = PointSet(table[:, :3], design_degree=degree, label="model-centers")
    kernel = KernelSpec.parse(header["kernel"])
    diag = SolveDiagnostics("loaded", m, 0.0, 0.0, 0.0)
    return FittedModel(kernel, centers, table[:, 3].copy(), float(header["lambda"]),
                       int(header["training_size"]), diag)
