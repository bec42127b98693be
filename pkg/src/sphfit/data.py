"""Synthetic targets on the sphere, truncated Gaussian noise, and datasets.

Two standard test functions drive all experiments: a four-term exponential
bump mixture (``f1``, the Franke function adapted to ambient sphere
coordinates) and a sum of 20 compactly supported Wendland bumps (``f2``).
Labels are target values plus zero-mean truncated Gaussian noise.

PRNG contract: noise streams come from ``numpy.random.Generator`` seeded
with ``PCG64`` (``np.random.default_rng``), Gaussian variates via its
ziggurat ``standard_normal``.  A unit-variance draw is scaled by delta, so
a fixed seed yields proportional noise across noise levels (common random
numbers).  Streams are stable within one numpy major version on all
platforms.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .kernels import wendland_psi
from .points import PointSet, eq_area_centers
from .solver import FittedModel, predict

NOISE_BOUND = 10.0
N_F2_CENTERS = 20


def franke_f1(xyz) -> np.ndarray:
    """Four-term exponential mixture evaluated on ambient coordinates.

    The second term is linear in its last two coordinates (not squared);
    the function is smooth but not a polynomial in x, y, z.
    """
    p = np.asarray(xyz, dtype=float)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    return (
        0.75 * np.exp(-(9 * x - 2) ** 2 / 4 - (9 * y - 2) ** 2 / 4 - (9 * z - 2) ** 2 / 4)
        + 0.75 * np.exp(-(9 * x + 1) ** 2 / 49 - (9 * y + 1) / 10 - (9 * z + 1) / 10)
        + 0.5 * np.exp(-(9 * x - 7) ** 2 / 4 - (9 * y - 3) ** 2 / 4 - (9 * z - 5) ** 2 / 4)
        - 0.2 * np.exp(-(9 * x - 4) ** 2 - (9 * y - 7) ** 2 - (9 * z - 5) ** 2)
    )


def default_f2_centers() -> PointSet:
    """The 20 equal-area region centers used as bump locations for f2."""
    return eq_area_centers(N_F2_CENTERS)


def wendland_target_f2(xyz, centers: PointSet | None = None) -> np.ndarray:
    """Sum of Wendland bumps: f2(x) = sum_i psi((2 - 2 x.z_i)^(1/2))."""
    if centers is None:
        centers = default_f2_centers()
    p = np.asarray(xyz, dtype=float)
    dots = np.clip(p @ centers.xyz.T, -1.0, 1.0)
    dist = np.sqrt(np.maximum(2.0 - 2.0 * dots, 0.0))
    return wendland_psi(dist).sum(axis=-1)


@dataclass(frozen=True)
class TargetFunction:
    """Named target: ``f1`` (Franke mixture) or ``f2`` (Wendland bump sum)."""

    name: str
    centers: PointSet | None = None     # f2 bump locations; None = default 20

    def __post_init__(self):
        if self.name == "f1":
            if self.centers is not None:
                raise ValueError("f1 takes no centers")
        elif self.name == "f2":
            if self.centers is None:
                object.__setattr__(self, "centers", default_f2_centers())
        else:
            raise ValueError(f"unknown target {self.name!r}")

    def __call__(self, points) -> np.ndarray:
        xyz = points.xyz if isinstance(points, PointSet) else points
        if self.name == "f1":
            return franke_f1(xyz)
        return wendland_target_f2(xyz, self.centers)

    @classmethod
    def by_name(cls, name: str) -> "TargetFunction":
        return cls(name)


@dataclass(frozen=True)
class NoiseModel:
    """Zero-mean Gaussian with standard deviation delta, clipped to a bound."""

    delta: float
    seed: int
    bound: float = NOISE_BOUND

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be >= 0")
        if not self.bound > 0:
            raise ValueError("bound must be > 0")


def sample_truncated_gaussian(noise: NoiseModel, count: int) -> np.ndarray:
    """Draw ``count`` clipped N(0, delta^2) samples; deterministic per seed.

    Clipping (rather than redrawing) realizes the truncation; at the noise
    levels in use the bound sits beyond 20 standard deviations, so the
    distinction never matters numerically.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(noise.seed)
    eps = noise.delta * rng.standard_normal(count)
    return np.clip(eps, -noise.bound, noise.bound)


@dataclass(frozen=True)
class Dataset:
    inputs: PointSet
    labels: np.ndarray
    target: TargetFunction
    noise: NoiseModel

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=float)
        if labels.shape != (len(self.inputs),):
            raise ValueError("one label per input point required")
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.inputs)


def make_dataset(inputs: PointSet, target: TargetFunction,
                 noise: NoiseModel) -> Dataset:
    """Labels = target(inputs) + truncated Gaussian noise.

    A pure function of (inputs, target, noise): the same arguments always
    reproduce the same labels bitwise.
    """
    labels = target(inputs) + sample_truncated_gaussian(noise, len(inputs))
    return Dataset(inputs, labels, target, noise)


def rmse(model: FittedModel, test_inputs: PointSet, test_labels) -> float:
    """Root mean squared prediction error on a labeled test set."""
    labels = np.asarray(test_labels, dtype=float)
    if labels.shape != (len(test_inputs),):
        raise ValueError(f"labels must have shape ({len(test_inputs)},), got {labels.shape}")
    diff = predict(model, test_inputs) - labels
    return float(np.sqrt(np.mean(diff ** 2)))


DATASET_HEADER = "x,y,z,label"


def save_dataset(path, dataset: Dataset) -> None:
    """CSV with an ``x,y,z,label`` header; generation settings in comments."""
    lines = [
        f"# target {dataset.target.name}",
        f"# delta {dataset.noise.delta:.17g}",
        f"# seed {dataset.noise.seed}",
        DATASET_HEADER,
    ]
    for p, lab in zip(dataset.inputs.xyz, dataset.labels):
        lines.append(f"{p[0]:.17g},{p[1]:.17g},{p[2]:.17g},{lab:.17g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_dataset(path) -> tuple[PointSet, np.ndarray]:
    """Read points and labels back from :func:`save_dataset` output.

    The generation-settings comments are informational only; the target
    object itself is not reconstructed.
    """
    path = Path(path)
    rows = []
    header_seen = False
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if line != DATASET_HEADER:
                raise ValueError(f"{path}:{lineno}: expected header {DATASET_HEADER!r}")
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise ValueError(f"{path}:{lineno}: expected 4 comma-separated fields")
        try:
            rows.append([float(v) for v in parts])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    table = np.array(rows)
    return PointSet(table[:, :3], label=str(path)), table[:, 3].copy()
