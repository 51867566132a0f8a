"""
Synthetic ranking profiles from the Mallows model, and profile CSV storage.

Profile CSV format: header `agent,r1,...,rm`, then one row per agent with
the preference order as 0-based alternative indices, most preferred first.
"""

from dataclasses import dataclass, field
import logging
from pathlib import Path
import re

import numpy as np
import pandas as pd

from config import DATAGEN_CONFIG
from errors import InvalidArgumentError, ProfileParseError
from rankings import Ranking

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MallowsConfig:
    """Parameters of one Mallows profile, P(r) proportional to exp(-theta * d(r, reference))"""

    m: int = DATAGEN_CONFIG["default_m"]
    n: int = DATAGEN_CONFIG["default_n"]
    theta: float = DATAGEN_CONFIG["default_theta"]
    reference: Ranking = field(default=None)
    seed: int = DATAGEN_CONFIG["default_seed"]

    def __post_init__(self):
        if self.m < 2:
            raise InvalidArgumentError(f"m must be at least 2, got {self.m}")
        if self.n < 1:
            raise InvalidArgumentError(f"n must be at least 1, got {self.n}")
        if self.theta < 0:
            raise InvalidArgumentError(f"theta must be non-negative, got {self.theta}")
        if self.reference is None:
            object.__setattr__(self, "reference", Ranking.identity(self.m))
        elif self.reference.m != self.m:
            raise InvalidArgumentError(f"reference ranks {self.reference.m} alternatives, expected {self.m}")


def insertion_probabilities(i, theta):
    """
    Probabilities of inserting the i-th reference item (1-based) at
    positions 1..i, counted from the top.

    Position j puts the item above i - j of the items already placed,
    each of which precedes it in the reference.
    """
    displacement = i - np.arange(1, i + 1)
    weights = np.exp(-theta * displacement)
    return weights / weights.sum()


def sample_mallows(cfg):
    """Draw cfg.n independent rankings by the repeated insertion model"""
    rng = np.random.default_rng(cfg.seed)
    reference = cfg.reference.order

    # slots[:, i - 2] holds the 0-based insertion slot of item i
    slots = np.empty((cfg.n, cfg.m - 1), dtype=np.int64)
    for i in range(2, cfg.m + 1):
        slots[:, i - 2] = rng.choice(i, size=cfg.n, p=insertion_probabilities(i, cfg.theta))

    profile = []
    for u in range(cfg.n):
        order = [reference[0]]
        for i in range(2, cfg.m + 1):
            order.insert(int(slots[u, i - 2]), reference[i - 1])
        profile.append(Ranking(tuple(order)))

    logger.info(f"Sampled {cfg.n} Mallows rankings (m={cfg.m}, theta={cfg.theta}, seed={cfg.seed})")
    return profile


def profile_frame(profile):
    """Profile as a DataFrame in the CSV column layout"""
    m = profile[0].m
    columns = [f"r{p}" for p in range(1, m + 1)]
    df = pd.DataFrame([r.order for r in profile], columns=columns)
    df.insert(0, "agent", range(len(profile)))
    return df


def save_profile(profile, path):
    """Write a profile to CSV"""
    if len(profile) == 0:
        raise InvalidArgumentError("cannot save an empty profile")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    profile_frame(profile).to_csv(path, index=False)
    logger.info(f"Saved {len(profile)} rankings to {path}")


def _parser_line(message):
    match = re.search(r"line (\d+)", str(message))
    return int(match.group(1)) if match else None


def _cell(value):
    return "" if pd.isna(value) else str(value).strip()


def load_profile(path):
    """Read a profile CSV, validating every row"""
    path = Path(path)
    if not path.is_file():
        raise InvalidArgumentError(f"profile file not found: {path}")
    try:
        # keep blank lines so row index + 2 is the file line
        df = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True, skip_blank_lines=False)
    except pd.errors.EmptyDataError:
        raise ProfileParseError("no data rows")
    except pd.errors.ParserError as e:
        raise ProfileParseError(f"inconsistent column count ({e})", line=_parser_line(e))

    header = [c.strip() for c in df.columns]
    m = len(header) - 1
    expected = ["agent"] + [f"r{p}" for p in range(1, m + 1)]
    if header != expected:
        raise ProfileParseError(f"header must be {','.join(expected)}", line=1)
    if m < 2:
        raise ProfileParseError("a profile needs at least two alternatives", line=1)

    profile = []
    for index, row in enumerate(df.itertuples(index=False)):
        line = index + 2
        fields = [_cell(c) for c in row]
        if all(f == "" for f in fields):
            continue
        cells = fields[1:]
        if any(c == "" for c in cells):
            raise ProfileParseError(f"expected {m} alternatives", line=line)
        try:
            order = [int(c) for c in cells]
        except ValueError:
            raise ProfileParseError(f"non-integer alternative in {cells}", line=line)
        if sorted(order) != list(range(m)):
            raise ProfileParseError(f"{order} is not a permutation of 0..{m - 1}", line=line)
        profile.append(Ranking(tuple(order)))

    if not profile:
        raise ProfileParseError("no data rows")

    logger.info(f"Loaded {len(profile)} rankings from {path}")
    return profile
