"""
Monte-Carlo experiment runner.

One ExperimentConfig is a sweep cell: a method, a dataset (Mallows
parameters or a profile CSV), privacy parameters and a repetition count.
Every repetition draws from its own stream derived from
(master seed, repetition index), so results do not depend on execution
order or on the number of workers.
"""

import configparser
from dataclasses import dataclass, field, replace
import logging
import math
from pathlib import Path
import time

from joblib import Parallel, delayed
import numpy as np
import pandas as pd

from aggregation import hra_aggregate, kemeny_optimal, ra_aggregate
from baselines import ldp_kwiksort, ldp_quicksort
from config import DATAGEN_CONFIG, EXPERIMENT_CONFIG, OUTPUT_CONFIG, PRIVACY_CONFIG, PROTOCOL_CONFIG
from datagen import MallowsConfig, load_profile, sample_mallows
from errors import ConfigurationError, RankAggError
from privacy import PrivacySpec, local_epsilon_for_central
from protocol import CollectionPipeline
from rankings import average_kendall_from_counts, borda_ranking, pair_count, tally

logger = logging.getLogger(__name__)

PRIVATE_METHODS = {"ddp-helnaksort", "ddp-helnaksort-noshuffle", "ldp-kwiksort", "ldp-quicksort"}

# child stream tag for the dataset, kept apart from repetition indices
DATA_STREAM = 2**32 - 1


@dataclass(frozen=True)
class ExperimentConfig:
    method: str
    m: int = 4
    n: int = DATAGEN_CONFIG["default_n"]
    theta: float = DATAGEN_CONFIG["default_theta"]
    profile_path: str = None
    epsilon: float = 1.0
    epsilon_is_central: bool = None
    delta: float = PRIVACY_CONFIG["default_delta"]
    k_queries: object = None  # int, "m", "max", or None for the method default
    repetitions: int = EXPERIMENT_CONFIG["default_repetitions"]
    master_seed: int = EXPERIMENT_CONFIG["default_seed"]
    name: str = ""

    def __post_init__(self):
        if self.method not in EXPERIMENT_CONFIG["methods"]:
            raise ConfigurationError("method", f"unknown method '{self.method}' (choose from {', '.join(EXPERIMENT_CONFIG['methods'])})")
        if self.repetitions < 1:
            raise ConfigurationError("repetitions", f"must be at least 1, got {self.repetitions}")
        if not self.epsilon > 0:
            raise ConfigurationError("epsilon", f"must be positive, got {self.epsilon}")
        if not 0 < self.delta < 1:
            raise ConfigurationError("delta", f"must lie in (0, 1), got {self.delta}")
        if self.master_seed < 0:
            raise ConfigurationError("seed", f"must be a non-negative integer, got {self.master_seed}")
        if self.profile_path is None:
            if self.m < 2:
                raise ConfigurationError("m", f"must be at least 2, got {self.m}")
            if self.n < 1:
                raise ConfigurationError("n", f"must be at least 1, got {self.n}")
            if self.theta < 0:
                raise ConfigurationError("theta", f"must be non-negative, got {self.theta}")
        if isinstance(self.k_queries, str) and self.k_queries.strip().isdigit():
            object.__setattr__(self, "k_queries", int(self.k_queries))
        elif isinstance(self.k_queries, str) and self.k_queries not in ("m", "max"):
            raise ConfigurationError("k", f"must be an integer, 'm' or 'max', got '{self.k_queries}'")
        if self.epsilon_is_central is None:
            object.__setattr__(self, "epsilon_is_central", self.method == "ddp-helnaksort")

    @property
    def private(self):
        return self.method in PRIVATE_METHODS

    @property
    def shuffle(self):
        return self.method == "ddp-helnaksort"

    @property
    def epsilon_scope(self):
        if not self.private:
            return "none"
        return "central" if self.epsilon_is_central else "local"

    def resolve_k(self, m):
        """Concrete query count for a dataset with m alternatives"""
        k = self.k_queries
        if k is None:
            k = PROTOCOL_CONFIG["default_k"] if self.private else "max"
        if k == "max":
            return pair_count(m)
        if k == "m":
            return min(m, pair_count(m))
        k = int(k)
        if not 1 <= k <= pair_count(m):
            raise ConfigurationError("k", f"must lie in [1, {pair_count(m)}] for m={m}, got {k}")
        return k


@dataclass(frozen=True)
class Dataset:
    profile: list
    counts: object

    @property
    def n(self):
        return len(self.profile)

    @property
    def m(self):
        return self.profile[0].m


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    m: int
    n: int
    k: int
    mean: float
    std: float
    ci95: float
    seconds: float
    distances: tuple = field(default=(), repr=False)

    def as_row(self, timings=False):
        cfg = self.config
        return {
            "method": cfg.method,
            "m": self.m,
            "n": self.n,
            "theta": cfg.theta if cfg.profile_path is None else "",
            "epsilon": cfg.epsilon,
            "epsilon_scope": cfg.epsilon_scope,
            "delta": cfg.delta,
            "k": self.k,
            "shuffle": int(cfg.shuffle),
            "reps": len(self.distances),
            "mean_dist": self.mean,
            "std_dist": self.std,
            "ci95": self.ci95,
            "seconds": round(self.seconds, 3) if timings else "",
        }


def derived_seed(master_seed, index):
    """Stable 64-bit seed for (master_seed, index)"""
    return int(np.random.SeedSequence([master_seed, index]).generate_state(1, dtype=np.uint64)[0])


def load_dataset(cfg):
    """Profile for a config, read from file or sampled from the Mallows model"""
    if cfg.profile_path is not None:
        path = Path(cfg.profile_path)
        if not path.is_file():
            raise ConfigurationError("profile", f"file not found: {path}")
        profile = load_profile(path)
    else:
        mallows = MallowsConfig(m=cfg.m, n=cfg.n, theta=cfg.theta, seed=derived_seed(cfg.master_seed, DATA_STREAM))
        profile = sample_mallows(mallows)
    return Dataset(profile, tally(profile))


def privacy_spec(cfg, n, m, k):
    """Per-agent spec; central budgets of the shuffled method are converted to local ones"""
    if cfg.shuffle and cfg.epsilon_is_central:
        epsilon = local_epsilon_for_central(cfg.epsilon, cfg.delta, n, m).epsilon
    else:
        epsilon = cfg.epsilon
    return PrivacySpec(epsilon=epsilon, delta=cfg.delta, k_queries=k)


def run_once(cfg, rep_index, dataset=None, capture=None):
    """Normalized average Kendall distance of one repetition's output to the profile"""
    dataset = dataset or load_dataset(cfg)
    profile, m = dataset.profile, dataset.m
    k = cfg.resolve_k(m)
    mechanism_seq, shuffle_seq = np.random.SeedSequence([cfg.master_seed, rep_index]).spawn(2)
    rng = np.random.default_rng(mechanism_seq)
    spec = privacy_spec(cfg, dataset.n, m, k) if cfg.private else None

    if cfg.method in ("ddp-helnaksort", "ddp-helnaksort-noshuffle", "hra", "ra", "borda"):
        pipeline = CollectionPipeline(spec, k, shuffle_answers=cfg.shuffle)
        counts = pipeline.run(profile, rng, np.random.default_rng(shuffle_seq))
        if capture is not None:
            capture["batch"] = pipeline.last_batch
        if cfg.method == "hra":
            result = hra_aggregate(counts)
        elif cfg.method == "borda":
            result = borda_ranking(counts)
        else:
            result = ra_aggregate(counts)
    elif cfg.method in ("ldp-kwiksort", "kwiksort"):
        result = ldp_kwiksort(profile, spec, rng, k_queries=k)
    elif cfg.method in ("ldp-quicksort", "quicksort"):
        result = ldp_quicksort(profile, spec, rng, k_queries=k)
    else:
        result, _ = kemeny_optimal(profile)

    if capture is not None:
        capture["ranking"] = result
    return average_kendall_from_counts(result, dataset.counts, dataset.n)


def summarize(distances):
    distances = np.asarray(distances, dtype=float)
    mean = float(distances.mean())
    std = float(distances.std(ddof=1)) if len(distances) > 1 else 0.0
    ci95 = EXPERIMENT_CONFIG["ci_z"] * std / math.sqrt(len(distances))
    return mean, std, ci95


class ExperimentRunner:
    """Runs sweep cells and assembles the result table"""

    def __init__(self, n_jobs=None, timings=False):
        self.n_jobs = n_jobs if n_jobs is not None else EXPERIMENT_CONFIG["n_jobs"]
        self.timings = timings
        self.results = []
        self.failures = []

    def run_experiment(self, cfg):
        """Run all repetitions of one config"""
        start = time.perf_counter()
        dataset = load_dataset(cfg)
        k = cfg.resolve_k(dataset.m)
        logger.info(f"Running {cfg.method} (m={dataset.m}, n={dataset.n}, epsilon={cfg.epsilon} {cfg.epsilon_scope}, k={k}, reps={cfg.repetitions})")
        if cfg.shuffle and cfg.epsilon_is_central and k != 1:
            logger.warning(f"Central epsilon {cfg.epsilon} converted for K={k}; the shuffled bound is only certified for K=1")

        distances = Parallel(n_jobs=self.n_jobs)(
            delayed(run_once)(cfg, rep, dataset) for rep in range(cfg.repetitions)
        )
        mean, std, ci95 = summarize(distances)
        seconds = time.perf_counter() - start
        logger.info(f"{cfg.method}: mean distance {mean:.4f} ± {ci95:.4f} in {seconds:.1f}s")
        return ExperimentResult(cfg, dataset.m, dataset.n, k, mean, std, ci95, seconds, tuple(distances))

    def run_sweep(self, configs):
        """One row per config in the given order; failing cells are logged and skipped"""
        rows = []
        for cfg in configs:
            try:
                result = self.run_experiment(cfg)
            except RankAggError as e:
                logger.error(f"Sweep cell '{cfg.name or cfg.method}' failed: {e}")
                self.failures.append((cfg, str(e)))
                continue
            except Exception as e:
                logger.error(f"Sweep cell '{cfg.name or cfg.method}' failed unexpectedly: {type(e).__name__}: {e}")
                self.failures.append((cfg, f"{type(e).__name__}: {e}"))
                continue
            self.results.append(result)
            rows.append(result.as_row(self.timings))
        return pd.DataFrame(rows, columns=OUTPUT_CONFIG["result_columns"])


def run_sweep(configs, n_jobs=None, timings=False):
    return ExperimentRunner(n_jobs=n_jobs, timings=timings).run_sweep(configs)


def resolve_output(path):
    """A bare file name lands in the configured output directory"""
    path = Path(path)
    if path.parent == Path("."):
        return Path(OUTPUT_CONFIG["output_dir"]) / path
    return path


def write_results(df, path):
    """Write a result table with the fixed float format"""
    path = resolve_output(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format=OUTPUT_CONFIG["float_format"])
    logger.info(f"Saved {len(df)} result rows to {path}")


def plot_frame(results, x="k"):
    """Long-format (x, series, y, ci) table for external plotting"""
    rows = []
    for result in results:
        row = result.as_row()
        if x not in row:
            raise ConfigurationError("plot_x", f"unknown column '{x}'")
        series = f"{row['method']} eps={row['epsilon']:g}"
        rows.append({"x": row[x], "series": series, "y": result.mean, "ci": result.ci95})
    return pd.DataFrame(rows, columns=OUTPUT_CONFIG["plot_columns"])


_INT_KEYS = {"m", "n", "repetitions", "seed"}
_FLOAT_KEYS = {"theta", "epsilon", "delta"}
_KNOWN_KEYS = _INT_KEYS | _FLOAT_KEYS | {"method", "profile", "epsilon_scope", "k"}


def _parse_section(name, section):
    unknown = set(section) - _KNOWN_KEYS
    if unknown:
        raise ConfigurationError(sorted(unknown)[0], f"unknown key in section [{name}]")
    if "method" not in section:
        raise ConfigurationError("method", f"missing in section [{name}]")

    values = {"method": section["method"].strip(), "name": name}
    for key in _INT_KEYS & set(section):
        try:
            values["master_seed" if key == "seed" else key] = int(section[key])
        except ValueError:
            raise ConfigurationError(key, f"expected an integer in section [{name}], got '{section[key]}'")
    for key in _FLOAT_KEYS & set(section):
        try:
            values[key] = float(section[key])
        except ValueError:
            raise ConfigurationError(key, f"expected a number in section [{name}], got '{section[key]}'")
    if "profile" in section:
        values["profile_path"] = section["profile"].strip()
    if "k" in section:
        k = section["k"].strip()
        values["k_queries"] = k if k in ("m", "max") else _parse_k(name, k)
    if "epsilon_scope" in section:
        scope = section["epsilon_scope"].strip()
        if scope not in ("central", "local"):
            raise ConfigurationError("epsilon_scope", f"must be 'central' or 'local' in section [{name}]")
        values["epsilon_is_central"] = scope == "central"
    return ExperimentConfig(**values)


def _parse_k(name, text):
    try:
        return int(text)
    except ValueError:
        raise ConfigurationError("k", f"expected an integer, 'm' or 'max' in section [{name}], got '{text}'")


def load_sweep_config(path, seed=None, repetitions=None):
    """Parse an INI sweep file; every non-default section is one cell"""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError("config", f"file not found: {path}")
    parser = configparser.ConfigParser()
    parser.read(path, encoding="utf-8")
    configs = [_parse_section(name, parser[name]) for name in parser.sections()]
    if seed is not None:
        configs = [replace(cfg, master_seed=seed) for cfg in configs]
    if repetitions is not None:
        configs = [replace(cfg, repetitions=repetitions) for cfg in configs]
    logger.info(f"Loaded {len(configs)} sweep cells from {path}")
    return configs
