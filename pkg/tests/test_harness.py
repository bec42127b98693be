import numpy as np
import pytest

from sphfit.data import Dataset, NoiseModel, TargetFunction, make_dataset
from sphfit.designs import load_design
from sphfit.harness import (SIM1_DELTAS, SIM2_S_STARS, ConfigError,
                            ExperimentConfig, GridSearchError, GridSpec,
                            ResultRow, SketchMethod, grid_search, kernel_for,
                            lambda_grid, parse_config, read_results_csv,
                            run_simulation1, run_simulation2, run_simulation3,
                            select_sketch, sigma_grid, sort_rows,
                            write_field_csv, write_results_csv,
                            write_seed_detail_csv)
from sphfit.points import generate_spiral


def toy_config(**overrides) -> ExperimentConfig:
    base = dict(target="f2", t=9, deltas=(0.0, 0.1), s_stars=(5, 9),
                n_seeds=3, n_test=400, base_seed=99, real_timing=False,
                sim3_s_star=5, sim3_grid_n=500)
    base.update(overrides)
    return ExperimentConfig(**base)


class TestGrids:
    def test_base2_lambda_grid(self):
        grid = lambda_grid(2.0)
        assert len(grid) == 34
        assert grid[0] == 1.0
        assert grid[1] == 0.5
        assert grid[-1] == 2.0 ** -33
        assert grid[-1] > 1e-10
        assert 2.0 ** -34 <= 1e-10
        assert all(a > b for a, b in zip(grid, grid[1:]))

    def test_base15_lambda_grid(self):
        grid = lambda_grid(1.5)
        assert len(grid) == 57
        assert grid[0] == 1.0
        assert grid[-1] > 1e-10
        assert 1.5 ** -57 <= 1e-10

    def test_sigma_grids(self):
        noisy = sigma_grid(True)
        clean = sigma_grid(False)
        assert len(noisy) == len(clean) == 10
        assert noisy[0] == pytest.approx(0.1) and noisy[-1] == pytest.approx(1.0)
        assert clean[0] == pytest.approx(0.028) and clean[-1] == pytest.approx(0.28)
        assert all(a < b for a, b in zip(noisy, noisy[1:]))

    def test_gridspec_validation(self):
        with pytest.raises(ValueError, match="descending"):
            GridSpec(lambdas=(1e-3, 1e-2))
        with pytest.raises(ValueError, match="positive"):
            GridSpec(lambdas=())
        with pytest.raises(ValueError, match="positive"):
            GridSpec(lambdas=(1.0, -0.5))
        with pytest.raises(ValueError, match="positive"):
            GridSpec(lambdas=(1.0,), sigmas=(0.0,))

    def test_for_target(self):
        f1 = GridSpec.for_target("f1", noisy=True)
        assert len(f1.lambdas) == 34 and len(f1.sigmas) == 10
        f2 = GridSpec.for_target("f2", noisy=False)
        assert len(f2.lambdas) == 57 and f2.sigmas is None
        with pytest.raises(ConfigError):
            GridSpec.for_target("f9", noisy=True)

    def test_kernel_for(self):
        assert kernel_for("f1", 0.3).kind == "gaussian"
        assert kernel_for("f2", None).kind == "wendland"
        with pytest.raises(ConfigError, match="sigma"):
            kernel_for("f1", None)


class TestSketchSelection:
    def test_first_takes_file_order(self, design13):
        centers = select_sketch(SketchMethod.first(5), design13)
        assert np.array_equal(centers.xyz, design13.xyz[:5])

    def test_random_is_seeded_subset(self, design13):
        method = SketchMethod.random(10, seed=4)
        a = select_sketch(method, design13)
        b = select_sketch(method, design13)
        assert np.array_equal(a.xyz, b.xyz)
        # every center is a training point, no repeats
        matches = (a.xyz[:, None, :] == design13.xyz[None, :, :]).all(axis=2)
        assert matches.any(axis=1).all()
        assert len(np.unique(matches.argmax(axis=1))) == 10

    def test_random_seed_changes_subset(self, design13):
        a = select_sketch(SketchMethod.random(10, seed=4), design13)
        b = select_sketch(SketchMethod.random(10, seed=5), design13)
        assert not np.array_equal(a.xyz, b.xyz)

    def test_design_ignores_training(self, design13):
        centers = select_sketch(SketchMethod.design(9), design13)
        assert len(centers) == 48
        assert centers.design_degree == 9

    def test_oversized_m_rejected(self, design13):
        with pytest.raises(ValueError, match="exceeds"):
            select_sketch(SketchMethod.first(95), design13)

    def test_method_validation(self):
        with pytest.raises(ValueError, match="seed"):
            SketchMethod("random", m=5)
        with pytest.raises(ValueError, match="odd"):
            SketchMethod.design(8)
        with pytest.raises(ValueError, match="m >= 1"):
            SketchMethod.first(0)
        with pytest.raises(ValueError, match="variant"):
            SketchMethod("cluster", m=5)


class TestResultRow:
    def _row(self, **overrides):
        base = dict(target="f2", delta=0.1, method="design", s_star=9, m=48,
                    sr=0.5, lam=1e-3, sigma=None, rmse=0.1, fit_seconds=0.2)
        base.update(overrides)
        return ResultRow(**base)

    def test_valid(self):
        assert self._row().sr == 0.5

    def test_bad_sampling_ratio(self):
        with pytest.raises(ValueError, match="ratio"):
            self._row(sr=1.5)
        with pytest.raises(ValueError, match="ratio"):
            self._row(sr=0.0)

    def test_negative_rmse(self):
        with pytest.raises(ValueError, match="rmse"):
            self._row(rmse=-0.1)


class TestGridSearch:
    def test_zero_labels_pick_most_regularization(self, design13):
        # every cell fits the zero function exactly: RMSE ties everywhere,
        # so the tie-break must select the largest lambda and sigma
        data = Dataset(design13, np.zeros(len(design13)),
                       TargetFunction.by_name("f1"), NoiseModel(0.0, seed=1))
        test = generate_spiral(50)
        grid = GridSpec(lambdas=(1.0, 0.5, 0.25), sigmas=(0.1, 0.2, 0.4))
        row = grid_search(data, (test, np.zeros(50)),
                          SketchMethod.first(10), grid, s_star=13)
        assert row.lam == 1.0
        assert row.sigma == 0.4
        assert row.rmse == 0.0

    def test_label_required_for_first(self, design13):
        data = make_dataset(design13, TargetFunction.by_name("f2"),
                            NoiseModel(0.0, seed=1))
        test = generate_spiral(50)
        with pytest.raises(ValueError, match="s_star label"):
            grid_search(data, (test, np.zeros(50)), SketchMethod.first(10),
                        GridSpec(lambdas=(1.0,)))

    def test_design_row_shape(self, design13):
        target = TargetFunction.by_name("f2")
        data = make_dataset(design13, target, NoiseModel(0.0, seed=1))
        test_pts = generate_spiral(200)
        row = grid_search(data, (test_pts, target(test_pts)),
                          SketchMethod.design(9),
                          GridSpec(lambdas=(1e-4, 1e-6, 1e-8)))
        assert row.method == "design"
        assert row.s_star == 9
        assert row.m == 48
        assert row.sr == pytest.approx(48 / 94)
        assert row.fit_seconds > 0
        # coarse sketch, but far better than predicting zero
        label_rms = float(np.sqrt(np.mean(target(test_pts) ** 2)))
        assert 0 < row.rmse < 0.5 * label_rms

    def test_all_cells_failing_raises(self, design13):
        bad = Dataset(design13, np.full(len(design13), np.nan),
                      TargetFunction.by_name("f2"), NoiseModel(0.0, seed=1))
        test = generate_spiral(50)
        with pytest.raises(GridSearchError, match="all grid cells failed"):
            grid_search(bad, (test, np.zeros(50)), SketchMethod.design(9),
                        GridSpec(lambdas=(1e-3,)))


class TestConfig:
    def test_defaults(self):
        cfg = ExperimentConfig()
        assert cfg.target == "f2" and cfg.t == 57
        assert cfg.sim1_deltas() == SIM1_DELTAS
        assert cfg.sim2_s_stars() == SIM2_S_STARS
        assert cfg.sim1_s_stars() == tuple(range(1, 58, 2))

    def test_sim2_s_stars_capped_by_degree(self):
        assert ExperimentConfig(t=13).sim2_s_stars() == (9,)
        assert ExperimentConfig(t=41).sim2_s_stars() == (9, 25, 41)

    def test_overrides_win(self):
        cfg = ExperimentConfig(deltas=(0.1,), s_stars=(5,))
        assert cfg.sim1_deltas() == cfg.sim2_deltas() == (0.1,)
        assert cfg.sim1_s_stars() == cfg.sim2_s_stars() == (5,)

    def test_validation(self):
        with pytest.raises(ConfigError, match="target"):
            ExperimentConfig(target="f7")
        with pytest.raises(ConfigError, match="odd"):
            ExperimentConfig(t=10)
        with pytest.raises(ConfigError):
            ExperimentConfig(n_seeds=0)
        with pytest.raises(ConfigError):
            ExperimentConfig(sim3_s_star=4)

    def test_parse_minimal(self, tmp_path):
        f = tmp_path / "min.ini"
        f.write_text("[experiment]\ntarget = f2\n")
        cfg = parse_config(f)
        assert cfg.t == 57 and cfg.real_timing

    def test_parse_full(self, tmp_path):
        f = tmp_path / "full.ini"
        f.write_text(
            "[experiment]\ntarget = f1\nt = 13\n"
            "[noise]\ndeltas = 0, 0.5\nseed = 7\n"
            "[sketch]\ns_stars = 5, 9\nn_seeds = 4\n"
            "[test]\nn_points = 500\n"
            "[output]\ntiming = zero\n"
            "[sim3]\ndelta = 0.2\ns_star = 9\ngrid_n = 1000\n")
        cfg = parse_config(f)
        assert cfg.target == "f1" and cfg.t == 13
        assert cfg.deltas == (0.0, 0.5) and cfg.base_seed == 7
        assert cfg.s_stars == (5, 9) and cfg.n_seeds == 4
        assert cfg.n_test == 500 and not cfg.real_timing
        assert cfg.sim3_delta == 0.2 and cfg.sim3_s_star == 9
        assert cfg.sim3_grid_n == 1000

    def test_parse_full_scale_flag(self, tmp_path):
        f = tmp_path / "fs.ini"
        f.write_text("[experiment]\nfull_scale = true\n")
        assert parse_config(f).t == 141

    def test_parse_errors(self, tmp_path):
        missing = tmp_path / "absent.ini"
        with pytest.raises(ConfigError, match="does not exist"):
            parse_config(missing)
        bad_section = tmp_path / "sec.ini"
        bad_section.write_text("[surprise]\nx = 1\n")
        with pytest.raises(ConfigError, match="unknown section"):
            parse_config(bad_section)
        bad_timing = tmp_path / "tim.ini"
        bad_timing.write_text("[output]\ntiming = fast\n")
        with pytest.raises(ConfigError, match="timing"):
            parse_config(bad_timing)
        bad_number = tmp_path / "num.ini"
        bad_number.write_text("[experiment]\nt = many\n")
        with pytest.raises(ConfigError):
            parse_config(bad_number)


@pytest.fixture(scope="module")
def sim1_rows():
    return run_simulation1(toy_config())


@pytest.fixture(scope="module")
def sim2_result():
    return run_simulation2(toy_config())


class TestSimulations:
    def test_sim1_shape(self, sim1_rows):
        assert len(sim1_rows) == 4      # 2 deltas x 2 s_stars
        assert all(r.method == "design" for r in sim1_rows)
        assert sim1_rows == sort_rows(sim1_rows)

    def test_sim1_full_degree_row_uses_whole_design(self, sim1_rows):
        full = [r for r in sim1_rows if r.s_star == 9]
        assert all(r.m == 48 and r.sr == 1.0 for r in full)

    def test_sim1_noise_hurts(self, sim1_rows):
        by = {(r.delta, r.s_star): r.rmse for r in sim1_rows}
        assert by[(0.0, 9)] <= by[(0.1, 9)]

    def test_sim2_shape(self, sim2_result):
        main, detail = sim2_result
        assert len(main) == 12          # 2 deltas x 2 s_stars x 3 methods
        assert len(detail) == 12        # 2 x 2 x 3 seeds
        methods = [r.method for r in main[:3]]
        assert methods == ["design", "first", "random"]

    def test_sim2_matched_sketch_sizes(self, sim2_result):
        main, _ = sim2_result
        for i in range(0, len(main), 3):
            group = main[i:i + 3]
            assert len({r.m for r in group}) == 1
            assert len({(r.delta, r.s_star) for r in group}) == 1

    def test_sim2_design_rows_match_sim1(self, sim1_rows, sim2_result):
        main, _ = sim2_result
        sim1_by = {(r.delta, r.s_star): r for r in sim1_rows}
        for r in main:
            if r.method == "design":
                ref = sim1_by[(r.delta, r.s_star)]
                assert r.rmse == ref.rmse and r.lam == ref.lam

    def test_sim2_random_mean_from_detail(self, sim2_result):
        main, detail = sim2_result
        for r in main:
            if r.method != "random":
                continue
            mates = [row.rmse for seed, row in detail
                     if row.delta == r.delta and row.s_star == r.s_star]
            assert len(mates) == 3
            assert r.rmse == pytest.approx(float(np.mean(mates)), abs=1e-15)

    def test_sim2_detail_seeds(self, sim2_result):
        _, detail = sim2_result
        assert {seed for seed, _ in detail} == {100, 101, 102}

    def test_sim3_field(self):
        export = run_simulation3(toy_config())
        assert len(export.points) == 500
        for arr in (export.exact, export.noisy, export.prediction, export.abs_error):
            assert arr.shape == (500,)
        assert np.array_equal(export.abs_error,
                              np.abs(export.prediction - export.exact))
        target = TargetFunction.by_name("f2")
        assert np.array_equal(export.exact, target(export.points))
        # a 12-center sketch is coarse but clearly beats predicting zero
        field_rmse = np.sqrt(np.mean((export.prediction - export.exact) ** 2))
        assert field_rmse < 0.8 * np.sqrt(np.mean(export.exact ** 2))

    def test_oversized_s_star_rejected(self):
        with pytest.raises(ConfigError, match="odd and <="):
            run_simulation1(toy_config(s_stars=(11, 25)))
        with pytest.raises(ConfigError, match="odd and <="):
            run_simulation3(toy_config(sim3_s_star=25))

    def test_sim2_deterministic(self):
        cfg = toy_config(deltas=(0.1,), s_stars=(5,), n_seeds=2, n_test=100, t=5)
        a_main, a_detail = run_simulation2(cfg)
        b_main, b_detail = run_simulation2(cfg)
        assert [r.rmse for r in a_main] == [r.rmse for r in b_main]
        assert [(s, r.rmse) for s, r in a_detail] == [(s, r.rmse) for s, r in b_detail]


class TestCsvIO:
    def _rows(self):
        return [
            ResultRow("f2", 0.1, "design", 9, 48, 48 / 94, 1.5 ** -20, None,
                      0.123456789012345678, 0.25),
            ResultRow("f1", 0.0, "first", 13, 94, 1.0, 2.0 ** -30, 0.31622,
                      1e-9, 0.5),
        ]

    def test_round_trip(self, tmp_path):
        rows = self._rows()
        path = tmp_path / "rows.csv"
        write_results_csv(path, rows)
        assert read_results_csv(path) == rows

    def test_zero_timing_mode(self, tmp_path):
        path = tmp_path / "rows.csv"
        write_results_csv(path, self._rows(), real_timing=False)
        assert all(r.fit_seconds == 0.0 for r in read_results_csv(path))

    def test_header_and_empty_sigma(self, tmp_path):
        path = tmp_path / "rows.csv"
        write_results_csv(path, self._rows())
        lines = path.read_text().splitlines()
        assert lines[0] == "target,delta,method,s_star,m,sr,lambda,sigma,rmse,fit_seconds"
        assert ",,," not in lines[1]        # only sigma may be empty
        assert lines[1].split(",")[7] == ""

    def test_read_rejects_malformed(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("nope\n")
        with pytest.raises(ValueError, match="header"):
            read_results_csv(bad)
        bad.write_text("target,delta,method,s_star,m,sr,lambda,sigma,rmse,fit_seconds\n"
                       "f2,0.1,design\n")
        with pytest.raises(ValueError, match="fields"):
            read_results_csv(bad)

    def test_seed_detail_schema(self, tmp_path):
        path = tmp_path / "detail.csv"
        write_seed_detail_csv(path, [(101, self._rows()[0])])
        lines = path.read_text().splitlines()
        assert lines[0] == "target,delta,s_star,m,seed,lambda,sigma,rmse,fit_seconds"
        assert len(lines) == 2
        assert lines[1].split(",")[4] == "101"

    def test_field_csv(self, tmp_path):
        export = run_simulation3(toy_config(sim3_grid_n=50, n_test=100))
        path = tmp_path / "field.csv"
        write_field_csv(path, export)
        lines = path.read_text().splitlines()
        assert lines[0] == "x,y,z,exact,noisy,prediction,abs_error"
        assert len(lines) == 51
        assert all(len(line.split(",")) == 7 for line in lines[1:])

    def test_sort_rows_stable_and_total(self):
        rows = self._rows()
        assert sort_rows(rows[::-1]) == sort_rows(rows)
