"""Experiment drivers: sketch selection, grid search, and simulations 1-3.

Simulation 1 sweeps the design degree s* for several noise levels with
design sketching.  Simulation 2 compares the three sketching methods
(first-m, random-m, design) at matched sketch sizes across noise levels.
Simulation 3 exports a dense pointwise error field for one fitted model.

Seeding policy: one base seed drives everything.  Training noise uses the
base seed itself for every noise level, so noise draws are proportional
across levels (common random numbers); the random sketch method uses
``base_seed + 1 + i`` for replicate i; the simulation-3 noisy field uses
``base_seed + 500``.  All outputs are pure functions of the config.
"""

from __future__ import annotations

import configparser
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .data import (Dataset, NoiseModel, TargetFunction, make_dataset, rmse,
                   sample_truncated_gaussian)
from .designs import load_design
from .kernels import KernelSpec
from .points import PointSet, generate_spiral
from .solver import fit_sketched, fit_sketched_multi, predict

DESK_SCALE_DEGREE = 57
FULL_SCALE_DEGREE = 141


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


class GridSearchError(RuntimeError):
    """Every (lambda, sigma) cell of a grid search failed numerically."""


# -- hyperparameter grids ---------------------------------------------------

def lambda_grid(base: float) -> tuple[float, ...]:
    """Descending grid {base^-q : base^-q > 1e-10, q = 0, 1, ...}."""
    out = []
    q = 0
    while True:
        v = float(base) ** -q
        if v <= 1e-10:
            return tuple(out)
        out.append(v)
        q += 1


def sigma_grid(noisy: bool) -> tuple[float, ...]:
    """10 log-spaced Gaussian widths; tighter range for noise-free data."""
    lo, hi = (0.1, 1.0) if noisy else (0.028, 0.28)
    return tuple(float(s) for s in np.geomspace(lo, hi, 10))


@dataclass(frozen=True)
class GridSpec:
    """Search grid: lambdas always, sigmas only for the Gaussian kernel."""

    lambdas: tuple[float, ...]
    sigmas: tuple[float, ...] | None = None

    def __post_init__(self):
        lams = tuple(float(l) for l in self.lambdas)
        if not lams or any(l <= 0 for l in lams):
            raise ValueError("lambdas must be positive and nonempty")
        if any(later >= earlier for later, earlier in zip(lams[1:], lams)):
            raise ValueError("lambdas must be strictly descending")
        object.__setattr__(self, "lambdas", lams)
        if self.sigmas is not None:
            sigs = tuple(float(s) for s in self.sigmas)
            if not sigs or any(s <= 0 for s in sigs):
                raise ValueError("sigmas must be positive and nonempty")
            object.__setattr__(self, "sigmas", sigs)

    @classmethod
    def for_target(cls, target_name: str, noisy: bool) -> "GridSpec":
        """Default grids: f1 pairs with Gaussian (base-2 lambdas, sigma
        sweep), f2 with Wendland (base-1.5 lambdas, no sigma)."""
        if target_name == "f1":
            return cls(lambda_grid(2.0), sigma_grid(noisy))
        if target_name == "f2":
            return cls(lambda_grid(1.5), None)
        raise ConfigError(f"unknown target {target_name!r}")


def kernel_for(target_name: str, sigma: float | None) -> KernelSpec:
    if target_name == "f1":
        if sigma is None:
            raise ConfigError("f1 uses the Gaussian kernel; sigma required")
        return KernelSpec.gaussian(sigma)
    return KernelSpec.wendland()


# -- sketch selection -------------------------------------------------------

@dataclass(frozen=True)
class SketchMethod:
    """How the center set is chosen: ``first``, ``random``, or ``design``."""

    variant: str
    m: int | None = None            # first/random
    seed: int | None = None         # random
    s_star: int | None = None       # design
    design_dir: str | None = None   # design; None = bundled files

    def __post_init__(self):
        if self.variant in ("first", "random"):
            if self.m is None or self.m < 1:
                raise ValueError(f"{self.variant} sketch needs m >= 1")
            if self.variant == "random" and self.seed is None:
                raise ValueError("random sketch needs a seed")
        elif self.variant == "design":
            if self.s_star is None or self.s_star < 1 or self.s_star % 2 == 0:
                raise ValueError("design sketch needs an odd positive s_star")
        else:
            raise ValueError(f"unknown sketch variant {self.variant!r}")

    @classmethod
    def first(cls, m: int) -> "SketchMethod":
        return cls("first", m=m)

    @classmethod
    def random(cls, m: int, seed: int) -> "SketchMethod":
        return cls("random", m=m, seed=seed)

    @classmethod
    def design(cls, s_star: int, design_dir=None) -> "SketchMethod":
        return cls("design", s_star=s_star,
                   design_dir=None if design_dir is None else str(design_dir))


def select_sketch(method: SketchMethod, training: PointSet) -> PointSet:
    """Resolve a sketch method to a concrete center set.

    ``first`` and ``random`` pick training points (file order / seeded
    uniform without replacement); ``design`` loads the s*-design, whose
    points need not belong to the training set.
    """
    if method.variant == "design":
        return load_design(method.s_star, method.design_dir)
    if method.m > len(training):
        raise ValueError(f"m={method.m} exceeds training size {len(training)}")
    if method.variant == "first":
        return training.take(np.arange(method.m))
    rng = np.random.default_rng(method.seed)
    idx = np.sort(rng.choice(len(training), size=method.m, replace=False))
    return training.take(idx)


# -- grid search ------------------------------------------------------------

@dataclass(frozen=True)
class ResultRow:
    """One experiment cell: method x noise level x sketch size."""

    target: str
    delta: float
    method: str
    s_star: int
    m: int
    sr: float                   # sampling ratio m / N
    lam: float
    sigma: float | None
    rmse: float
    fit_seconds: float

    def __post_init__(self):
        if not 0 < self.sr <= 1:
            raise ValueError("sampling ratio must be in (0, 1]")
        if self.rmse < 0:
            raise ValueError("rmse must be >= 0")


def grid_search(data: Dataset, test: tuple[PointSet, np.ndarray],
                method: SketchMethod, grid: GridSpec,
                s_star: int | None = None) -> ResultRow:
    """Exhaustive (lambda, sigma) search minimizing test RMSE.

    Ties are broken toward larger lambda, then larger sigma.  Cells whose
    solve raises a numerical error are skipped; if every cell fails a
    :class:`GridSearchError` carries the collected messages.

    ``s_star`` labels the row; for design sketching it defaults to the
    method's own degree.
    """
    test_points, test_labels = test
    centers = select_sketch(method, data.inputs)
    if s_star is None:
        if method.variant != "design":
            raise ValueError("s_star label required for first/random sketching")
        s_star = method.s_star

    target_name = data.target.name
    best = None       # (rmse, -lam, -sigma_key) minimized lexicographically
    failures = []
    for sigma in (grid.sigmas if grid.sigmas is not None else (None,)):
        kernel = kernel_for(target_name, sigma)
        try:
            models = fit_sketched_multi(kernel, data.inputs, data.labels,
                                        centers, grid.lambdas)
        except (np.linalg.LinAlgError, ValueError) as exc:
            failures.append(f"sigma={sigma}: {exc}")
            continue
        for model in models:
            err = rmse(model, test_points, test_labels)
            if not np.isfinite(err):
                failures.append(f"lambda={model.lam} sigma={sigma}: non-finite rmse")
                continue
            key = (err, -model.lam, -(sigma if sigma is not None else 0.0))
            if best is None or key < best[0]:
                best = (key, model.lam, sigma)
    if best is None:
        raise GridSearchError(
            f"all grid cells failed for method={method.variant}: "
            + "; ".join(failures[:5]))

    _, lam, sigma = best
    kernel = kernel_for(target_name, sigma)
    t0 = time.perf_counter()
    model = fit_sketched(kernel, data.inputs, data.labels, centers, lam)
    fit_seconds = time.perf_counter() - t0
    return ResultRow(target_name, data.noise.delta, method.variant, s_star,
                     len(centers), len(centers) / len(data), lam, sigma,
                     rmse(model, test_points, test_labels), fit_seconds)


# -- simulation configuration ----------------------------------------------

SIM1_DELTAS = (0.0, 0.001, 0.1, 0.5)
SIM2_DELTAS = (0.0, 1e-4, 1e-3, 1e-2, 0.1, 0.3, 0.5)
SIM2_S_STARS = (9, 25, 41, 57)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a simulation run depends on; see ``parse_config``."""

    target: str = "f2"
    t: int = DESK_SCALE_DEGREE
    deltas: tuple[float, ...] | None = None      # None = per-sim default
    s_stars: tuple[int, ...] | None = None       # None = per-sim default
    n_seeds: int = 10                            # random-method replicates
    n_test: int = 10000
    base_seed: int = 1234
    design_dir: str | None = None
    real_timing: bool = True                     # False writes fit_seconds = 0
    sim3_delta: float = 0.1
    sim3_s_star: int = 25
    sim3_grid_n: int = 40000

    def __post_init__(self):
        if self.target not in ("f1", "f2"):
            raise ConfigError(f"target must be f1 or f2, got {self.target!r}")
        if self.t < 1 or self.t % 2 == 0:
            raise ConfigError("training degree t must be odd and positive")
        if self.n_seeds < 1 or self.n_test < 2:
            raise ConfigError("n_seeds >= 1 and n_test >= 2 required")
        if self.sim3_delta < 0 or self.sim3_grid_n < 2:
            raise ConfigError("sim3 delta must be >= 0 and grid_n >= 2")
        if self.sim3_s_star < 1 or self.sim3_s_star % 2 == 0:
            raise ConfigError("sim3 s_star must be odd and positive")

    def sim1_deltas(self) -> tuple[float, ...]:
        return self.deltas if self.deltas is not None else SIM1_DELTAS

    def sim2_deltas(self) -> tuple[float, ...]:
        return self.deltas if self.deltas is not None else SIM2_DELTAS

    def sim1_s_stars(self) -> tuple[int, ...]:
        if self.s_stars is not None:
            return self.s_stars
        return tuple(range(1, self.t + 1, 2))

    def sim2_s_stars(self) -> tuple[int, ...]:
        if self.s_stars is not None:
            return self.s_stars
        return tuple(s for s in SIM2_S_STARS if s <= self.t)


def parse_config(path) -> ExperimentConfig:
    """Read an INI-style config file into an :class:`ExperimentConfig`.

    Sections/keys (all optional)::

        [experiment]  target = f1|f2    t = 57    full_scale = false
        [noise]       deltas = 0, 0.001, 0.1, 0.5      seed = 1234
        [sketch]      s_stars = 9, 25, 41, 57          n_seeds = 10
                      design_dir = /path/to/designs
        [test]        n_points = 10000
        [output]      timing = real|zero
        [sim3]        delta = 0.1    s_star = 25    grid_n = 40000
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    parser = configparser.ConfigParser()
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None

    known = {"experiment", "noise", "sketch", "test", "output", "sim3"}
    unknown = set(parser.sections()) - known
    if unknown:
        raise ConfigError(f"{path}: unknown section(s) {sorted(unknown)}")

    def get(section, key, default=None):
        return parser.get(section, key, fallback=default)

    try:
        kwargs = {}
        if get("experiment", "target") is not None:
            kwargs["target"] = get("experiment", "target").strip()
        t = int(get("experiment", "t", DESK_SCALE_DEGREE))
        if parser.getboolean("experiment", "full_scale", fallback=False):
            t = FULL_SCALE_DEGREE
        kwargs["t"] = t
        if get("noise", "deltas") is not None:
            kwargs["deltas"] = tuple(
                float(v) for v in get("noise", "deltas").split(",") if v.strip())
        if get("noise", "seed") is not None:
            kwargs["base_seed"] = int(get("noise", "seed"))
        if get("sketch", "s_stars") is not None:
            kwargs["s_stars"] = tuple(
                int(v) for v in get("sketch", "s_stars").split(",") if v.strip())
        if get("sketch", "n_seeds") is not None:
            kwargs["n_seeds"] = int(get("sketch", "n_seeds"))
        if get("sketch", "design_dir") is not None:
            kwargs["design_dir"] = get("sketch", "design_dir").strip()
        if get("test", "n_points") is not None:
            kwargs["n_test"] = int(get("test", "n_points"))
        timing = get("output", "timing", "real").strip().lower()
        if timing not in ("real", "zero"):
            raise ConfigError(f"{path}: output.timing must be 'real' or 'zero'")
        kwargs["real_timing"] = timing == "real"
        if get("sim3", "delta") is not None:
            kwargs["sim3_delta"] = float(get("sim3", "delta"))
        if get("sim3", "s_star") is not None:
            kwargs["sim3_s_star"] = int(get("sim3", "s_star"))
        if get("sim3", "grid_n") is not None:
            kwargs["sim3_grid_n"] = int(get("sim3", "grid_n"))
    except (ValueError, ConfigError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{path}: {exc}") from None
    return ExperimentConfig(**kwargs)


# -- simulation drivers -----------------------------------------------------

def _training_and_test(cfg: ExperimentConfig):
    training = load_design(cfg.t, cfg.design_dir)
    target = TargetFunction.by_name(cfg.target)
    test_points = generate_spiral(cfg.n_test)
    test_labels = target(test_points)           # test labels are noise-free
    return training, target, (test_points, test_labels)


def _check_s_stars(cfg: ExperimentConfig, s_stars) -> None:
    bad = [s for s in s_stars if s > cfg.t or s < 1 or s % 2 == 0]
    if bad:
        raise ConfigError(
            f"s_star values must be odd and <= training degree t={cfg.t}, got {bad}")


def _dataset(training, target, delta, cfg) -> Dataset:
    return make_dataset(training, target, NoiseModel(delta, cfg.base_seed))


def run_simulation1(cfg: ExperimentConfig) -> list[ResultRow]:
    """Design-sketch RMSE as a function of s* for each noise level.

    The s* = t row trains on the full design and is the standard
    regularized least squares baseline.
    """
    training, target, test = _training_and_test(cfg)
    _check_s_stars(cfg, cfg.sim1_s_stars())
    rows = []
    for delta in cfg.sim1_deltas():
        data = _dataset(training, target, delta, cfg)
        grid = GridSpec.for_target(cfg.target, noisy=delta > 0)
        for s_star in cfg.sim1_s_stars():
            method = SketchMethod.design(s_star, cfg.design_dir)
            rows.append(grid_search(data, test, method, grid))
    return sort_rows(rows)


def run_simulation2(cfg: ExperimentConfig) -> tuple[list[ResultRow], list[tuple[int, ResultRow]]]:
    """Compare first/random/design sketching at matched sketch sizes.

    Returns (main rows, per-seed detail as (seed, row) pairs).  The random
    method is repeated over ``cfg.n_seeds`` seeds; its main row carries the
    mean RMSE and mean fit time, with the modal (lambda, sigma) choice.
    """
    training, target, test = _training_and_test(cfg)
    _check_s_stars(cfg, cfg.sim2_s_stars())
    main, detail = [], []
    for delta in cfg.sim2_deltas():
        data = _dataset(training, target, delta, cfg)
        grid = GridSpec.for_target(cfg.target, noisy=delta > 0)
        for s_star in cfg.sim2_s_stars():
            design_method = SketchMethod.design(s_star, cfg.design_dir)
            design_row = grid_search(data, test, design_method, grid)
            m = design_row.m        # matched sketch size for all three methods

            first_row = grid_search(
                data, test, SketchMethod.first(m), grid, s_star=s_star)

            seed_rows = []
            for i in range(cfg.n_seeds):
                seed = cfg.base_seed + 1 + i
                method = SketchMethod.random(m, seed)
                seed_rows.append(
                    (seed, grid_search(data, test, method, grid, s_star=s_star)))
            random_row = _summarize_random([r for _, r in seed_rows])

            main += [first_row, random_row, design_row]
            detail += seed_rows
    detail.sort(key=lambda sr: (sr[1].target, sr[1].delta, sr[1].s_star, sr[0]))
    return sort_rows(main), detail


def _summarize_random(seed_rows: list[ResultRow]) -> ResultRow:
    """Mean RMSE/time over replicates; modal hyperparameters."""
    choices = [(r.lam, r.sigma) for r in seed_rows]
    # mode; ties toward more regularization, matching grid_search tie-breaks
    lam, sigma = max(set(choices),
                     key=lambda c: (choices.count(c), c[0], c[1] or 0.0))
    return replace(seed_rows[0], lam=lam, sigma=sigma,
                   rmse=float(np.mean([r.rmse for r in seed_rows])),
                   fit_seconds=float(np.mean([r.fit_seconds for r in seed_rows])))


@dataclass(frozen=True)
class FieldExport:
    """Dense pointwise evaluation behind the visualization figures."""

    points: PointSet
    exact: np.ndarray
    noisy: np.ndarray
    prediction: np.ndarray
    abs_error: np.ndarray


def run_simulation3(cfg: ExperimentConfig) -> FieldExport:
    """Fit one configuration and export the error field on a dense grid."""
    training, target, test = _training_and_test(cfg)
    _check_s_stars(cfg, [cfg.sim3_s_star])
    data = _dataset(training, target, cfg.sim3_delta, cfg)
    grid = GridSpec.for_target(cfg.target, noisy=cfg.sim3_delta > 0)
    method = SketchMethod.design(cfg.sim3_s_star, cfg.design_dir)
    row = grid_search(data, test, method, grid)

    kernel = kernel_for(cfg.target, row.sigma)
    centers = select_sketch(method, data.inputs)
    model = fit_sketched(kernel, data.inputs, data.labels, centers, row.lam)

    dense = generate_spiral(cfg.sim3_grid_n)
    exact = target(dense)
    noise = NoiseModel(cfg.sim3_delta, cfg.base_seed + 500)
    noisy = exact + sample_truncated_gaussian(noise, len(dense))
    prediction = predict(model, dense)
    return FieldExport(dense, exact, noisy, prediction, np.abs(prediction - exact))


# -- output -----------------------------------------------------------------

RESULTS_HEADER = "target,delta,method,s_star,m,sr,lambda,sigma,rmse,fit_seconds"


def sort_rows(rows: list[ResultRow]) -> list[ResultRow]:
    """Deterministic output order regardless of execution order."""
    return sorted(rows, key=lambda r: (r.target, r.delta, r.s_star,
                                       r.method, r.rmse))


def _fmt(value: float | None) -> str:
    return "" if value is None else f"{value:.17g}"


def write_results_csv(path, rows: list[ResultRow], real_timing: bool = True) -> None:
    """Write result rows in the stable 10-column schema.

    With ``real_timing`` off, fit_seconds is written as 0 so that repeated
    runs of the same config are bitwise identical.
    """
    lines = [RESULTS_HEADER]
    for r in rows:
        secs = r.fit_seconds if real_timing else 0.0
        lines.append(",".join([
            r.target, _fmt(r.delta), r.method, str(r.s_star), str(r.m),
            _fmt(r.sr), _fmt(r.lam), _fmt(r.sigma), _fmt(r.rmse), _fmt(secs)]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


SEED_DETAIL_HEADER = "target,delta,s_star,m,seed,lambda,sigma,rmse,fit_seconds"


def write_seed_detail_csv(path, detail: list[tuple[int, ResultRow]],
                          real_timing: bool = True) -> None:
    """Per-replicate rows behind the random-method means of simulation 2."""
    lines = [SEED_DETAIL_HEADER]
    for seed, r in detail:
        secs = r.fit_seconds if real_timing else 0.0
        lines.append(",".join([
            r.target, _fmt(r.delta), str(r.s_star), str(r.m), str(seed),
            _fmt(r.lam), _fmt(r.sigma), _fmt(r.rmse), _fmt(secs)]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_field_csv(path, export: FieldExport) -> None:
    """Dense-grid field export: coordinates plus the four value columns."""
    lines = ["x,y,z,exact,noisy,prediction,abs_error"]
    for p, e, ny, pr, ae in zip(export.points.xyz, export.exact, export.noisy,
                                export.prediction, export.abs_error):
        lines.append(f"{p[0]:.17g},{p[1]:.17g},{p[2]:.17g},"
                     f"{e:.17g},{ny:.17g},{pr:.17g},{ae:.17g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_results_csv(path) -> list[ResultRow]:
    """Parse a results CSV back into rows (inverse of write_results_csv)."""
    raw = Path(path).read_text(encoding="utf-8").splitlines()
    if not raw or raw[0] != RESULTS_HEADER:
        raise ValueError(f"{path}: unexpected header")
    rows = []
    for line in raw[1:]:
        f = line.split(",")
        if len(f) != 10:
            raise ValueError(f"{path}: expected 10 fields, got {len(f)}")
        rows.append(ResultRow(
            f[0], float(f[1]), f[2], int(f[3]), int(f[4]), float(f[5]),
            float(f[6]), None if f[7] == "" else float(f[7]),
            float(f[8]), float(f[9])))
    return rows
