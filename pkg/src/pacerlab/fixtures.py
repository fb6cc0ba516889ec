"""Bundled synthetic study dataset with a known effect pattern.

36 simulated participants, 9 per condition cell. The generator plants one
effect per measure family and nothing else:

* HRV: elevated only for the focus groups during the intervention window
  (attention x time interaction; no main effects);
* task accuracy: larger first-to-second improvement in the focus groups
  (attention main effect on the delta);
* anxiety: a spike after the first task for everyone (time effect) plus a
  focus-only drop at the end (attention x time interaction);
* usability: static slightly above dynamic, overlapping enough that the
  rank-sum test stays non-significant.

Cell samples are affinely standardized so each cell hits its target mean
and SD exactly; the random seed only shapes the within-cell arrangement.
The dataset is clearly synthetic and exists so the analysis battery has a
ground-truth significance pattern to verify against.
"""

from __future__ import annotations

import numpy as np

from .stats import Dataset, Row

DEFAULT_SEED = 7

# (attention, time) -> (mean, sd); chosen so the three time-point means and
# the two attention row means coincide, leaving only the interaction.
RMSSD_CELLS = {
    ("focus", 1): (0.0097, 0.0044),
    ("focus", 2): (0.0147, 0.0067),
    ("focus", 3): (0.0097, 0.0044),
    ("ambient", 1): (0.01303, 0.0044),
    ("ambient", 2): (0.00803, 0.0035),
    ("ambient", 3): (0.01303, 0.0044),
}

STAI_CELLS = {
    ("focus", 1): (36.8, 6.9),
    ("focus", 2): (42.4, 7.6),
    ("focus", 3): (30.8, 3.2),
    ("ambient", 1): (34.0, 6.9),
    ("ambient", 2): (42.4, 7.6),
    ("ambient", 3): (37.6, 8.0),
}

NBACK1_MEAN, NBACK1_SD = 65.0, 5.0
NBACK_DELTA = {"focus": (11.23, 8.36), "ambient": (4.21, 7.03)}

# fixed usability totals (scale maximum 36): static rates a little higher
# but the samples overlap heavily
USE_STATIC = [36, 36, 35, 34, 34, 33, 32, 29, 28]
USE_DYNAMIC = [36, 35, 34, 33, 31, 29, 25, 20, 17]

CONDITIONS = [
    ("ambient", "dynamic"),
    ("ambient", "static"),
    ("focus", "dynamic"),
    ("focus", "static"),
]
N_PER_CELL = 9


def _cell_sample(rng: np.random.Generator, n: int, mean: float, sd: float) -> np.ndarray:
    """Uniform draws standardized to hit the sample mean and SD exactly.

    Bounded support keeps values physiological (no negative HRV, no
    accuracy above 100) for any draw.
    """
    x = rng.uniform(size=n)
    z = (x - x.mean()) / x.std(ddof=1)
    return mean + sd * z


def make_reference_dataset(seed: int = DEFAULT_SEED) -> Dataset:
    rng = np.random.default_rng(seed)
    rows: list[Row] = []
    pid_counter = 0
    for att, fb in CONDITIONS:
        pids = [f"p{pid_counter + i + 1:02d}" for i in range(N_PER_CELL)]
        pid_counter += N_PER_CELL

        for t in (1, 2, 3):
            mean, sd = RMSSD_CELLS[(att, t)]
            for pid, v in zip(pids, _cell_sample(rng, N_PER_CELL, mean, sd)):
                rows.append(Row(pid, att, fb, "rmssd", t, float(v)))

        intercepts = _cell_sample(rng, N_PER_CELL, 0.0, 5.0)
        for t in (1, 2, 3):
            mean, sd = STAI_CELLS[(att, t)]
            within = _cell_sample(rng, N_PER_CELL, 0.0, sd)
            for pid, b, w in zip(pids, intercepts, within):
                rows.append(Row(pid, att, fb, "stai", t, float(mean + b + w)))

        base = _cell_sample(rng, N_PER_CELL, NBACK1_MEAN, NBACK1_SD)
        dmean, dsd = NBACK_DELTA[att]
        delta = _cell_sample(rng, N_PER_CELL, dmean, dsd)
        for pid, b, d in zip(pids, base, delta):
            rows.append(Row(pid, att, fb, "nback_pct", 1, float(b)))
            rows.append(Row(pid, att, fb, "nback_pct", 2, float(b + d)))

        if att == "focus":
            totals = list(USE_STATIC if fb == "static" else USE_DYNAMIC)
            rng.shuffle(totals)
            for pid, v in zip(pids, totals):
                rows.append(Row(pid, att, fb, "use_total", None, float(v)))

    return Dataset(rows)
