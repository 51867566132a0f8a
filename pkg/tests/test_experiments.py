import pytest
import numpy as np
import pandas as pd
import tempfile
import os
from pathlib import Path
import sys

# Add src directory to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from aggregation import hra_aggregate
from datagen import save_profile
from errors import ConfigurationError
import experiments
from experiments import (
    ExperimentConfig, ExperimentRunner, derived_seed, load_dataset, load_sweep_config,
    plot_frame, resolve_output, run_once, run_sweep, summarize, write_results,
)
from rankings import Ranking, average_kendall, tally


def R(*order):
    return Ranking(tuple(order))


@pytest.fixture
def temp_dir():
    """Temporary directory for profiles, configs and results"""
    with tempfile.TemporaryDirectory() as temp_dir:
        yield Path(temp_dir)


@pytest.fixture
def separated_profile_path(temp_dir):
    profile = [R(0, 1, 2, 3)] * 15 + [R(1, 0, 2, 3)] * 4 + [R(0, 2, 1, 3)] * 2
    path = temp_dir / "separated.csv"
    save_profile(profile, path)
    return path


class TestExperimentConfig:
    """Test cases for sweep cell validation"""

    def test_unknown_method(self):
        with pytest.raises(ConfigurationError) as excinfo:
            ExperimentConfig(method="magic")
        assert excinfo.value.field == "method"

    @pytest.mark.parametrize("kwargs,field", [
        ({"repetitions": 0}, "repetitions"),
        ({"epsilon": 0.0}, "epsilon"),
        ({"delta": 1.0}, "delta"),
        ({"m": 1}, "m"),
        ({"n": 0}, "n"),
        ({"theta": -1.0}, "theta"),
        ({"k_queries": "many"}, "k"),
        ({"master_seed": -1}, "seed"),
    ])
    def test_invalid_fields(self, kwargs, field):
        with pytest.raises(ConfigurationError) as excinfo:
            ExperimentConfig(method="ddp-helnaksort", **kwargs)
        assert excinfo.value.field == field

    def test_epsilon_scope_defaults(self):
        assert ExperimentConfig(method="ddp-helnaksort").epsilon_scope == "central"
        assert ExperimentConfig(method="ddp-helnaksort-noshuffle").epsilon_scope == "local"
        assert ExperimentConfig(method="ldp-quicksort").epsilon_scope == "local"
        assert ExperimentConfig(method="hra").epsilon_scope == "none"
        assert ExperimentConfig(method="ddp-helnaksort", epsilon_is_central=False).epsilon_scope == "local"

    def test_resolve_k(self):
        assert ExperimentConfig(method="ddp-helnaksort").resolve_k(4) == 1
        assert ExperimentConfig(method="hra").resolve_k(4) == 6
        assert ExperimentConfig(method="ldp-kwiksort", k_queries="m").resolve_k(4) == 4
        assert ExperimentConfig(method="ldp-kwiksort", k_queries="m").resolve_k(2) == 1
        assert ExperimentConfig(method="ldp-kwiksort", k_queries="max").resolve_k(15) == 105
        assert ExperimentConfig(method="ldp-kwiksort", k_queries="3").resolve_k(4) == 3
        with pytest.raises(ConfigurationError):
            ExperimentConfig(method="ldp-kwiksort", k_queries=7).resolve_k(4)

    def test_private_default_k_comes_from_config(self, monkeypatch):
        monkeypatch.setitem(experiments.PROTOCOL_CONFIG, "default_k", 2)
        assert ExperimentConfig(method="ldp-quicksort").resolve_k(4) == 2
        assert ExperimentConfig(method="hra").resolve_k(4) == 6


class TestRunOnce:
    """Test cases for single repetitions"""

    def test_hra_on_unanimous_profile(self, temp_dir):
        path = temp_dir / "unanimous.csv"
        save_profile([R(2, 0, 3, 1)] * 10, path)
        assert run_once(ExperimentConfig(method="hra", profile_path=str(path)), 0) == 0.0

    def test_negligible_noise_matches_hra(self, separated_profile_path):
        private = ExperimentConfig(method="ddp-helnaksort", profile_path=str(separated_profile_path),
                                   epsilon=1e6, epsilon_is_central=False, k_queries="max")
        reference = ExperimentConfig(method="hra", profile_path=str(separated_profile_path))
        for rep in range(5):
            assert run_once(private, rep) == pytest.approx(run_once(reference, rep), abs=1e-12)

    def test_kemeny_is_a_lower_bound(self):
        common = dict(m=4, n=60, theta=0.25, master_seed=31)
        best = run_once(ExperimentConfig(method="kemeny", **common), 0)
        others = ["ddp-helnaksort", "ddp-helnaksort-noshuffle", "ldp-kwiksort", "ldp-quicksort",
                  "hra", "ra", "borda", "kwiksort", "quicksort"]
        for method in others:
            for rep in range(3):
                assert best <= run_once(ExperimentConfig(method=method, **common), rep) + 1e-12

    def test_repetitions_are_reproducible(self):
        cfg = ExperimentConfig(method="ddp-helnaksort", m=5, n=50, theta=0.5, master_seed=3)
        dataset = load_dataset(cfg)
        assert run_once(cfg, 4, dataset) == run_once(cfg, 4)

    def test_capture_holds_shuffled_batch(self):
        cfg = ExperimentConfig(method="ddp-helnaksort", m=4, n=30)
        capture = {}
        run_once(cfg, 0, capture=capture)
        assert len(capture["batch"]) == 30

    def test_capture_holds_output_ranking(self, separated_profile_path):
        for method in ("hra", "kemeny", "ldp-kwiksort"):
            cfg = ExperimentConfig(method=method, profile_path=str(separated_profile_path), repetitions=1)
            capture = {}
            distance = run_once(cfg, 0, capture=capture)
            dataset = load_dataset(cfg)
            assert distance == pytest.approx(average_kendall(capture["ranking"], dataset.profile))
        assert capture["ranking"].m == 4

    def test_hra_capture_matches_noiseless_aggregate(self, separated_profile_path):
        cfg = ExperimentConfig(method="hra", profile_path=str(separated_profile_path))
        capture = {}
        run_once(cfg, 0, capture=capture)
        assert capture["ranking"] == hra_aggregate(tally(load_dataset(cfg).profile))

    def test_missing_profile(self, temp_dir):
        cfg = ExperimentConfig(method="hra", profile_path=str(temp_dir / "absent.csv"))
        with pytest.raises(ConfigurationError) as excinfo:
            run_once(cfg, 0)
        assert excinfo.value.field == "profile"

    def test_directory_as_profile(self, temp_dir):
        cfg = ExperimentConfig(method="hra", profile_path=str(temp_dir))
        with pytest.raises(ConfigurationError) as excinfo:
            run_once(cfg, 0)
        assert excinfo.value.field == "profile"


class TestSeeds:

    def test_derived_seed_is_stable(self):
        assert derived_seed(2023, 5) == derived_seed(2023, 5)
        assert derived_seed(2023, 5) != derived_seed(2023, 6)
        assert derived_seed(2023, 5) != derived_seed(2024, 5)

    def test_dataset_ignores_method(self):
        a = load_dataset(ExperimentConfig(method="hra", m=5, n=20, theta=0.3))
        b = load_dataset(ExperimentConfig(method="ldp-kwiksort", m=5, n=20, theta=0.3))
        assert a.profile == b.profile


class TestSweep:
    """Test cases for the sweep runner"""

    def configs(self):
        return [
            ExperimentConfig(method="ddp-helnaksort", m=4, n=40, repetitions=12, master_seed=5),
            ExperimentConfig(method="ldp-quicksort", m=4, n=40, repetitions=12, master_seed=5),
            ExperimentConfig(method="hra", m=5, n=40, repetitions=3, master_seed=5),
        ]

    def test_empty_sweep_is_header_only(self, temp_dir):
        df = run_sweep([])
        path = temp_dir / "empty.csv"
        write_results(df, path)
        assert path.read_text().strip() == (
            "method,m,n,theta,epsilon,epsilon_scope,delta,k,shuffle,reps,mean_dist,std_dist,ci95,seconds"
        )

    def test_rows_follow_config_order(self):
        df = run_sweep(self.configs())
        assert df["method"].tolist() == ["ddp-helnaksort", "ldp-quicksort", "hra"]
        assert df["reps"].tolist() == [12, 12, 3]
        assert df["shuffle"].tolist() == [1, 0, 0]
        assert df["mean_dist"].between(0, 1).all()
        assert (df["std_dist"] >= 0).all()
        assert (df["seconds"] == "").all()

    def test_timings_fill_seconds(self):
        df = run_sweep(self.configs()[:1], timings=True)
        assert float(df["seconds"].iloc[0]) >= 0

    def test_identical_output_across_worker_counts(self, temp_dir):
        write_results(run_sweep(self.configs(), n_jobs=1), temp_dir / "serial.csv")
        write_results(run_sweep(self.configs(), n_jobs=2), temp_dir / "parallel.csv")
        assert (temp_dir / "serial.csv").read_bytes() == (temp_dir / "parallel.csv").read_bytes()

    def test_failing_cell_does_not_stop_sweep(self, temp_dir):
        configs = [
            ExperimentConfig(method="hra", profile_path=str(temp_dir / "absent.csv"), repetitions=2),
            ExperimentConfig(method="kemeny", m=9, n=5, repetitions=1),
            ExperimentConfig(method="hra", m=4, n=10, repetitions=2),
        ]
        runner = ExperimentRunner(n_jobs=1)
        df = runner.run_sweep(configs)
        assert len(df) == 1
        assert len(runner.failures) == 2
        assert runner.failures[0][0] is configs[0]

    def test_directory_profile_is_a_failed_cell(self, temp_dir):
        configs = [
            ExperimentConfig(method="hra", profile_path=str(temp_dir), repetitions=2),
            ExperimentConfig(method="hra", m=4, n=10, repetitions=2),
        ]
        runner = ExperimentRunner(n_jobs=1)
        df = runner.run_sweep(configs)
        assert len(df) == 1
        assert len(runner.failures) == 1
        assert "not found" in runner.failures[0][1]

    def test_unexpected_errors_are_recorded(self, monkeypatch):
        original = experiments.load_dataset

        def flaky_load(cfg):
            if cfg.name == "locked":
                raise PermissionError("profile is locked")
            return original(cfg)

        monkeypatch.setattr(experiments, "load_dataset", flaky_load)
        configs = [
            ExperimentConfig(method="hra", m=4, n=10, repetitions=2, name="locked"),
            ExperimentConfig(method="hra", m=4, n=10, repetitions=2),
        ]
        runner = ExperimentRunner(n_jobs=1)
        df = runner.run_sweep(configs)
        assert len(df) == 1
        assert runner.failures[0][1] == "PermissionError: profile is locked"

    def test_bare_file_name_goes_to_output_dir(self, temp_dir, monkeypatch):
        monkeypatch.setitem(experiments.OUTPUT_CONFIG, "output_dir", str(temp_dir / "results"))
        assert resolve_output("sweep.csv") == temp_dir / "results" / "sweep.csv"
        assert resolve_output(temp_dir / "elsewhere.csv") == temp_dir / "elsewhere.csv"
        write_results(run_sweep([]), "sweep.csv")
        assert (temp_dir / "results" / "sweep.csv").is_file()

    def test_confidence_interval_shrinks_with_repetitions(self):
        common = dict(method="ddp-helnaksort", m=4, n=100, theta=1.0, master_seed=17)
        small = ExperimentRunner(n_jobs=1).run_experiment(ExperimentConfig(repetitions=30, **common))
        large = ExperimentRunner(n_jobs=1).run_experiment(ExperimentConfig(repetitions=300, **common))
        assert 2.0 < small.ci95 / large.ci95 < 5.0

    def test_summarize(self):
        mean, std, ci95 = summarize([0.1, 0.3])
        assert mean == pytest.approx(0.2)
        assert std == pytest.approx(np.sqrt(0.02))
        assert ci95 == pytest.approx(1.96 * np.sqrt(0.02) / np.sqrt(2))
        assert summarize([0.4]) == (0.4, 0.0, 0.0)


class TestPlotFrame:

    def test_long_format(self):
        runner = ExperimentRunner(n_jobs=1)
        runner.run_sweep([
            ExperimentConfig(method="ddp-helnaksort", m=4, n=30, repetitions=4, k_queries=k) for k in (1, "m")
        ])
        df = plot_frame(runner.results)
        assert list(df.columns) == ["x", "series", "y", "ci"]
        assert df["x"].tolist() == [1, 4]
        assert df["series"].tolist() == ["ddp-helnaksort eps=1"] * 2

    def test_unknown_column(self):
        runner = ExperimentRunner(n_jobs=1)
        runner.run_sweep([ExperimentConfig(method="hra", m=3, n=5, repetitions=1)])
        with pytest.raises(ConfigurationError):
            plot_frame(runner.results, x="colour")


class TestSweepConfig:
    """Test cases for INI sweep files"""

    def write(self, temp_dir, text):
        path = temp_dir / "sweep.ini"
        path.write_text(text)
        return path

    def test_sections_and_defaults(self, temp_dir):
        path = self.write(temp_dir, """
[DEFAULT]
m = 4
n = 100
theta = 1.0
epsilon = 1.0
repetitions = 20
seed = 7

[shuffled]
method = ddp-helnaksort
k = m

[plain]
method = ddp-helnaksort-noshuffle
epsilon_scope = central
epsilon = 0.5
""")
        shuffled, plain = load_sweep_config(path)
        assert shuffled.name == "shuffled"
        assert shuffled.k_queries == "m"
        assert shuffled.master_seed == 7
        assert shuffled.repetitions == 20
        assert plain.epsilon == 0.5
        assert plain.epsilon_is_central is True

    def test_seed_override(self, temp_dir):
        path = self.write(temp_dir, "[a]\nmethod = hra\nseed = 1\n[b]\nmethod = ra\n")
        assert [c.master_seed for c in load_sweep_config(path, seed=99)] == [99, 99]

    def test_negative_seed_override(self, temp_dir):
        path = self.write(temp_dir, "[a]\nmethod = hra\n")
        with pytest.raises(ConfigurationError) as excinfo:
            load_sweep_config(path, seed=-1)
        assert excinfo.value.field == "seed"

    def test_repetitions_override(self, temp_dir):
        path = self.write(temp_dir, "[a]\nmethod = hra\nrepetitions = 300\n[b]\nmethod = ra\n")
        assert [c.repetitions for c in load_sweep_config(path, repetitions=50)] == [50, 50]
        assert [c.repetitions for c in load_sweep_config(path)][0] == 300

    @pytest.mark.parametrize("body,field", [
        ("[a]\nm = 4\n", "method"),
        ("[a]\nmethod = hra\ncolour = red\n", "colour"),
        ("[a]\nmethod = hra\nm = four\n", "m"),
        ("[a]\nmethod = hra\nepsilon = lots\n", "epsilon"),
        ("[a]\nmethod = hra\nk = some\n", "k"),
        ("[a]\nmethod = hra\nepsilon_scope = global\n", "epsilon_scope"),
    ])
    def test_invalid_sections(self, temp_dir, body, field):
        with pytest.raises(ConfigurationError) as excinfo:
            load_sweep_config(self.write(temp_dir, body))
        assert excinfo.value.field == field

    def test_missing_file(self, temp_dir):
        with pytest.raises(ConfigurationError):
            load_sweep_config(temp_dir / "absent.ini")

    def test_shipped_configs_parse(self):
        configs_dir = Path(__file__).parent.parent / "configs"
        for path in sorted(configs_dir.glob("*.ini")):
            assert load_sweep_config(path), path.name


@pytest.mark.slow
class TestMethodOrderings:
    """Method orderings at full repetition counts"""

    def run(self, configs):
        runner = ExperimentRunner(n_jobs=1)
        runner.run_sweep(configs)
        assert not runner.failures
        return runner.results

    def test_shuffled_protocol_beats_baselines(self):
        common = dict(m=4, n=100, theta=1.0, epsilon=1.0, k_queries=1, repetitions=300, master_seed=2023)
        ddp, kwik, quick = self.run([
            ExperimentConfig(method=method, **common)
            for method in ("ddp-helnaksort", "ldp-kwiksort", "ldp-quicksort")
        ])
        for baseline in (kwik, quick):
            assert baseline.mean - ddp.mean > baseline.ci95 + ddp.ci95

    def test_quicksort_trails_kwiksort_on_noisy_data(self):
        common = dict(m=4, n=100, theta=0.25, epsilon=1.0, k_queries=1, repetitions=300, master_seed=2023)
        kwik, quick = self.run([ExperimentConfig(method=method, **common)
                                for method in ("ldp-kwiksort", "ldp-quicksort")])
        assert quick.mean > kwik.mean

    def test_single_query_is_best(self):
        results = self.run([
            ExperimentConfig(method="ddp-helnaksort", m=4, n=100, theta=1.0, epsilon=1.0,
                             k_queries=k, repetitions=300, master_seed=2023)
            for k in (1, "m", "max")
        ])
        means = [r.mean for r in results]
        slack = [r.ci95 for r in results]
        for i in range(len(results) - 1):
            assert means[i] <= means[i + 1] + slack[i] + slack[i + 1]
        assert means[0] <= min(means[1:]) + slack[0]

    def test_shuffle_gap(self):
        def gap(m, epsilon):
            common = dict(m=m, n=100, theta=0.25, epsilon=epsilon, epsilon_is_central=True,
                          repetitions=300, master_seed=2023)
            on, off = self.run([
                ExperimentConfig(method="ddp-helnaksort", **common),
                ExperimentConfig(method="ddp-helnaksort-noshuffle", **common),
            ])
            return on, off

        for epsilon in (0.5, 1.0):
            on, off = gap(4, epsilon)
            assert on.mean <= off.mean + on.ci95 + off.ci95
        on4, off4 = gap(4, 1.0)
        assert off4.mean - on4.mean > on4.ci95 + off4.ci95
        on15, off15 = gap(15, 1.0)
        assert off4.mean - on4.mean > off15.mean - on15.mean

    def test_convergence_with_large_budget(self):
        cfg = ExperimentConfig(method="ddp-helnaksort", m=4, n=100, theta=4.0, epsilon=50.0,
                               epsilon_is_central=False, k_queries="max", repetitions=100, master_seed=2023)
        dataset = load_dataset(cfg)
        target = hra_aggregate(tally(dataset.profile))
        hits = 0
        for rep in range(cfg.repetitions):
            capture = {}
            run_once(cfg, rep, dataset, capture=capture)
            hits += capture["ranking"] == target
        assert hits >= 95


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
