"""Analysis pipeline: permutation tests for the 2x2 x time design,
Wilcoxon rank-sum for usability, descriptives and the fixed study battery.

Permutation schemes
-------------------
* between factor (attention/feedback): participant-level values, labels
  shuffled across participants;
* time: values shuffled across time points within each participant;
* factor x time interaction: each participant's values are centered on
  their own mean (removing participant and additive time effects), then
  factor labels are shuffled across participants;
* between x between interaction (single value per participant): additive
  main effects are subtracted and the residuals shuffled across
  participants.

All tests are seeded and bit-reproducible; p = (1 + #{perm >= obs}) /
(1 + n_perm).
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, InsufficientDataError

DEFAULT_N_PERM = 9999
_EPS = 1e-12

BETWEEN_FACTORS = ("attention", "feedback")


@dataclass(frozen=True)
class Row:
    participant_id: str
    attention: str
    feedback: str
    measure: str
    time: Optional[int]
    value: Optional[float]


@dataclass
class Dataset:
    rows: list[Row] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for r in self.rows:
            k = (r.participant_id, r.measure, r.time)
            if k in seen:
                raise DomainError(f"duplicate observation {k}")
            seen.add(k)

    def measures(self) -> set[str]:
        return {r.measure for r in self.rows}

    def select(self, measure: str) -> list[Row]:
        return [r for r in self.rows if r.measure == measure and r.value is not None]

    def pivot(self, measure: str) -> tuple[list[str], dict[str, str], dict[str, str], np.ndarray, list[int]]:
        """Complete-case participants x times matrix for a repeated measure.

        Returns (participant_ids, attention_by_pid, feedback_by_pid, matrix, times).
        """
        rows = self.select(measure)
        times = sorted({r.time for r in rows if r.time is not None})
        by_pid: dict[str, dict[int, float]] = {}
        att: dict[str, str] = {}
        fb: dict[str, str] = {}
        for r in rows:
            by_pid.setdefault(r.participant_id, {})[r.time] = r.value
            att[r.participant_id] = r.attention
            fb[r.participant_id] = r.feedback
        pids = sorted(p for p, vals in by_pid.items() if all(t in vals for t in times))
        matrix = np.array([[by_pid[p][t] for t in times] for p in pids], dtype=float)
        return pids, att, fb, matrix, times


def dataset_from_records(records: Sequence[dict]) -> Dataset:
    """Long-format dataset from per-participant measure records
    (the shape produced by protocol.extract_measures)."""
    rows: list[Row] = []
    for rec in records:
        pid, att, fb = rec["participant_id"], rec["attention"], rec["feedback"]

        def add(measure, time, value):
            if value is not None:
                rows.append(Row(pid, att, fb, measure, time, float(value)))

        for t in (1, 2, 3):
            add("rmssd", t, rec.get(f"rmssd_time{t}"))
            add("stai", t, rec.get(f"stai{t}"))
        for t in (1, 2):
            add("nback_pct", t, rec.get(f"nback{t}_pct"))
        add("use_total", None, rec.get("use_total"))
    return Dataset(rows)


CSV_HEADER = ["participant_id", "attention", "feedback", "time", "measure", "value"]


def save_dataset(data: Dataset, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for r in data.rows:
            w.writerow(
                [
                    r.participant_id,
                    r.attention,
                    r.feedback,
                    "" if r.time is None else r.time,
                    r.measure,
                    "" if r.value is None else repr(r.value),
                ]
            )


def load_dataset(path: Path) -> Dataset:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise DomainError(f"unexpected dataset header {reader.fieldnames}")
        for raw in reader:
            rows.append(
                Row(
                    raw["participant_id"],
                    raw["attention"],
                    raw["feedback"],
                    raw["measure"],
                    int(raw["time"]) if raw["time"] else None,
                    float(raw["value"]) if raw["value"] else None,
                )
            )
    return Dataset(rows)


@dataclass(frozen=True)
class TestResult:
    effect: str
    statistic: float
    p_value: float
    n_permutations: int
    seed: int


def _perm_p(obs: float, perm_stats: np.ndarray) -> float:
    tol = _EPS * max(1.0, abs(obs))
    return (1 + int(np.sum(perm_stats >= obs - tol))) / (1 + len(perm_stats))


def _participant_values(data: Dataset, measure: str) -> tuple[np.ndarray, list[str], list[str]]:
    """Mean over available time points per participant, with factor labels."""
    rows = data.select(measure)
    acc: dict[str, list[float]] = {}
    att: dict[str, str] = {}
    fb: dict[str, str] = {}
    for r in rows:
        acc.setdefault(r.participant_id, []).append(r.value)
        att[r.participant_id] = r.attention
        fb[r.participant_id] = r.feedback
    pids = sorted(acc)
    values = np.array([float(np.mean(acc[p])) for p in pids])
    return values, [att[p] for p in pids], [fb[p] for p in pids]


def _between_stat(values: np.ndarray, mask: np.ndarray) -> float:
    return abs(values[mask].mean() - values[~mask].mean())


def perm_test_main(
    data: Dataset,
    factor: str,
    measure: str,
    n_perm: int = DEFAULT_N_PERM,
    seed: int = 0,
) -> TestResult:
    """Main-effect permutation test.

    Between factors compare participant means (absolute mean difference);
    the time factor compares time-point means (variance of level means)
    with shuffles confined within participants.
    """
    rng = np.random.default_rng(seed)
    if factor in BETWEEN_FACTORS:
        values, att, fb = _participant_values(data, measure)
        labels = att if factor == "attention" else fb
        levels = sorted(set(labels))
        if len(levels) != 2:
            raise InsufficientDataError(f"{factor}: need 2 levels, got {levels}")
        mask = np.array([lab == levels[1] for lab in labels])
        if mask.sum() < 2 or (~mask).sum() < 2:
            raise InsufficientDataError(f"{factor}: need >= 2 observations per level")
        obs = _between_stat(values, mask)
        perm_masks = mask[rng.random((n_perm, len(mask))).argsort(axis=1)]
        n1 = mask.sum()
        n0 = len(mask) - n1
        sums1 = perm_masks @ values
        perm = np.abs(sums1 / n1 - (values.sum() - sums1) / n0)
        return TestResult(f"main({factor})", obs, _perm_p(obs, perm), n_perm, seed)

    if factor != "time":
        raise DomainError(f"unknown factor {factor!r}")
    _, _, _, matrix, times = data.pivot(measure)
    if len(times) < 2 or matrix.shape[0] < 2:
        raise InsufficientDataError("time: need >= 2 time points and participants")
    obs = float(np.var(matrix.mean(axis=0)))
    n, t = matrix.shape
    keys = rng.random((n_perm, n, t)).argsort(axis=2)
    shuffled = np.take_along_axis(matrix[None, :, :].repeat(n_perm, axis=0), keys, axis=2)
    perm = np.var(shuffled.mean(axis=1), axis=1)
    return TestResult("main(time)", obs, _perm_p(obs, perm), n_perm, seed)


def _interaction_ss(centered: np.ndarray, mask: np.ndarray) -> float:
    """Interaction sum of squares for a 2-level factor x time cell-means layout."""
    m1 = centered[mask].mean(axis=0)
    m0 = centered[~mask].mean(axis=0)
    cells = np.stack([m0, m1])  # levels x times
    grand = cells.mean()
    effect = cells - cells.mean(axis=1, keepdims=True) - cells.mean(axis=0, keepdims=True) + grand
    n_per = np.array([[(~mask).sum()], [mask.sum()]], dtype=float)
    return float(np.sum(n_per * effect**2))


def perm_test_interaction(
    data: Dataset,
    factor: str,
    measure: str,
    n_perm: int = DEFAULT_N_PERM,
    seed: int = 0,
) -> TestResult:
    """factor x time interaction, participant-centered label permutation."""
    if factor not in BETWEEN_FACTORS:
        raise DomainError(f"interaction factor must be one of {BETWEEN_FACTORS}")
    rng = np.random.default_rng(seed)
    pids, att, fb, matrix, times = data.pivot(measure)
    if len(times) < 2:
        raise InsufficientDataError("interaction needs >= 2 time points")
    labels = [att[p] if factor == "attention" else fb[p] for p in pids]
    levels = sorted(set(labels))
    if len(levels) != 2:
        raise InsufficientDataError(f"{factor}: need 2 levels, got {levels}")
    mask = np.array([lab == levels[1] for lab in labels])
    if mask.sum() < 2 or (~mask).sum() < 2:
        raise InsufficientDataError(f"{factor}: need >= 2 participants per level")
    centered = matrix - matrix.mean(axis=1, keepdims=True)
    obs = _interaction_ss(centered, mask)
    perm_masks = mask[rng.random((n_perm, len(mask))).argsort(axis=1)].astype(float)
    n1 = mask.sum()
    n0 = len(mask) - n1
    m1 = (perm_masks @ centered) / n1  # n_perm x times
    m0 = ((1.0 - perm_masks) @ centered) / n0
    time_mean = (m0 + m1) / 2.0  # per-time mean over the two levels
    overall = time_mean.mean(axis=1, keepdims=True)
    e1 = m1 - m1.mean(axis=1, keepdims=True) - time_mean + overall
    e0 = m0 - m0.mean(axis=1, keepdims=True) - time_mean + overall
    perm = n1 * np.sum(e1**2, axis=1) + n0 * np.sum(e0**2, axis=1)
    return TestResult(f"interaction({factor}xtime)", obs, _perm_p(obs, perm), n_perm, seed)


def perm_test_interaction_between(
    data: Dataset,
    measure: str,
    n_perm: int = DEFAULT_N_PERM,
    seed: int = 0,
) -> TestResult:
    """attention x feedback interaction on a single-value-per-participant measure.

    Additive main effects are estimated from cell means and removed; the
    residuals are shuffled across participants (reduced-model residual
    permutation).
    """
    rng = np.random.default_rng(seed)
    values, att, fb = _participant_values(data, measure)
    a_mask = np.array([x == "focus" for x in att])
    b_mask = np.array([x == "static" for x in fb])
    for m, name in ((a_mask, "attention"), (b_mask, "feedback")):
        if m.sum() < 2 or (~m).sum() < 2:
            raise InsufficientDataError(f"{name}: need >= 2 participants per level")
    grand = values.mean()
    a_eff = {lv: values[a_mask == lv].mean() - grand for lv in (False, True)}
    b_eff = {lv: values[b_mask == lv].mean() - grand for lv in (False, True)}
    resid = values - np.array([a_eff[x] for x in a_mask]) - np.array([b_eff[x] for x in b_mask])

    def stat(v: np.ndarray) -> float:
        total = 0.0
        g = v.mean()
        for a in (False, True):
            for b in (False, True):
                cell = v[(a_mask == a) & (b_mask == b)]
                if len(cell) == 0:
                    continue
                eff = cell.mean() - v[a_mask == a].mean() - v[b_mask == b].mean() + g
                total += len(cell) * eff**2
        return total

    obs = stat(resid)
    perm = np.empty(n_perm)
    for i in range(n_perm):
        perm[i] = stat(rng.permutation(resid))
    return TestResult("interaction(attentionxfeedback)", obs, _perm_p(obs, perm), n_perm, seed)


# ---------------------------------------------------------------------------
# Wilcoxon rank-sum

EXACT_MAX_N = 12


def _midranks(pooled: Sequence[float]) -> list[float]:
    order = sorted(range(len(pooled)), key=lambda i: pooled[i])
    ranks = [0.0] * len(pooled)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and pooled[order[j + 1]] == pooled[order[i]]:
            j += 1
        mid = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mid
        i = j + 1
    return ranks


def wilcoxon_rank_sum(a: Sequence[float], b: Sequence[float]) -> TestResult:
    """Two-sided rank-sum test with midranks.

    Exact enumeration of all rank assignments when the pooled size is at
    most 12, normal approximation with continuity and tie corrections
    otherwise.
    """
    if not a or not b:
        raise InsufficientDataError("both samples must be non-empty")
    n1, n2 = len(a), len(b)
    n = n1 + n2
    ranks = _midranks(list(a) + list(b))
    w = sum(ranks[:n1])
    expected = n1 * (n + 1) / 2.0
    dev = abs(w - expected)

    if n <= EXACT_MAX_N:
        total = 0
        hits = 0
        for combo in itertools.combinations(range(n), n1):
            total += 1
            if abs(sum(ranks[i] for i in combo) - expected) >= dev - _EPS:
                hits += 1
        return TestResult("wilcoxon", w, hits / total, total, 0)

    # tie-corrected variance of the rank sum
    counts: dict[float, int] = {}
    for r in ranks:
        counts[r] = counts.get(r, 0) + 1
    tie_term = sum(t**3 - t for t in counts.values())
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if var <= 0:
        return TestResult("wilcoxon", w, 1.0, 0, 0)
    z = max(dev - 0.5, 0.0) / math.sqrt(var)
    p = min(1.0, 2.0 * (0.5 * math.erfc(z / math.sqrt(2))))
    return TestResult("wilcoxon", w, p, 0, 0)


# ---------------------------------------------------------------------------
# descriptives and the study battery

def summarize(data: Dataset, measure: str, grouping: Sequence[str]) -> list[dict]:
    """Per-cell mean/SD/n (sample SD, n-1); absent values excluded."""
    cells: dict[tuple, list[float]] = {}
    for r in data.select(measure):
        key = tuple(getattr(r, g) if g != "time" else r.time for g in grouping)
        cells.setdefault(key, []).append(r.value)
    out = []
    for key in sorted(cells, key=str):
        vals = cells[key]
        out.append(
            {
                "cell": dict(zip(grouping, key)),
                "mean": float(np.mean(vals)),
                "sd": float(np.std(vals, ddof=1)) if len(vals) > 1 else None,
                "n": len(vals),
            }
        )
    return out


def _nback_delta(data: Dataset) -> Dataset:
    """Derived per-participant measure: accuracy change between the two tasks."""
    pids, att, fb, matrix, times = data.pivot("nback_pct")
    rows = []
    if times == [1, 2]:
        for pid, row in zip(pids, matrix):
            rows.append(Row(pid, att[pid], fb[pid], "nback_delta", None, float(row[1] - row[0])))
    return Dataset(rows)


@dataclass(frozen=True)
class BatteryEntry:
    block: str
    label: str
    result: Optional[TestResult]  # None when skipped

    @property
    def skipped(self) -> bool:
        return self.result is None


@dataclass
class StudyReport:
    entries: list[BatteryEntry]
    descriptives: dict
    n_perm: int
    seed: int

    def entry(self, block: str, label: str) -> BatteryEntry:
        for e in self.entries:
            if e.block == block and e.label == label:
                return e
        raise KeyError((block, label))

    def to_rows(self) -> list[dict]:
        rows = []
        for e in self.entries:
            rows.append(
                {
                    "block": e.block,
                    "test": e.label,
                    "statistic": None if e.skipped else e.result.statistic,
                    "p_value": None if e.skipped else e.result.p_value,
                    "n_permutations": None if e.skipped else e.result.n_permutations,
                    "skipped": e.skipped,
                }
            )
        return rows

    def to_text(self) -> str:
        lines = ["Study analysis report", "=" * 60]
        for measure, tables in self.descriptives.items():
            lines.append(f"\n{measure}: descriptives")
            for row in tables:
                cell = ", ".join(f"{k}={v}" for k, v in row["cell"].items())
                sd = "-" if row["sd"] is None else f"{row['sd']:.4g}"
                lines.append(f"  [{cell}] mean={row['mean']:.4g} sd={sd} n={row['n']}")
        lines.append("\nTests")
        for e in self.entries:
            if e.skipped:
                lines.append(f"  {e.block:12s} {e.label:32s} skipped (measure absent)")
            else:
                star = " *" if e.result.p_value < 0.05 else ""
                lines.append(
                    f"  {e.block:12s} {e.label:32s} stat={e.result.statistic:.5g} "
                    f"p={e.result.p_value:.4f}{star}"
                )
        return "\n".join(lines) + "\n"


def analyze_study(data: Dataset, n_perm: int = DEFAULT_N_PERM, seed: int = 0) -> StudyReport:
    """The fixed analysis battery over the study's four measure families."""
    entries: list[BatteryEntry] = []
    measures = data.measures()
    delta = _nback_delta(data) if "nback_pct" in measures else Dataset([])

    def run(block, label, fn, idx):
        try:
            result = fn(int(np.random.SeedSequence([seed, idx]).generate_state(1)[0]))
        except InsufficientDataError:
            result = None
        entries.append(BatteryEntry(block, label, result))

    specs = []
    if "rmssd" in measures:
        specs += [
            ("hrv", "main(attention)", lambda s: perm_test_main(data, "attention", "rmssd", n_perm, s)),
            ("hrv", "main(feedback)", lambda s: perm_test_main(data, "feedback", "rmssd", n_perm, s)),
            ("hrv", "main(time)", lambda s: perm_test_main(data, "time", "rmssd", n_perm, s)),
            ("hrv", "interaction(attentionxtime)", lambda s: perm_test_interaction(data, "attention", "rmssd", n_perm, s)),
            ("hrv", "interaction(feedbackxtime)", lambda s: perm_test_interaction(data, "feedback", "rmssd", n_perm, s)),
        ]
    else:
        entries.append(BatteryEntry("hrv", "all", None))
    if delta.rows:
        specs += [
            ("nback", "main(attention)", lambda s: perm_test_main(delta, "attention", "nback_delta", n_perm, s)),
            ("nback", "main(feedback)", lambda s: perm_test_main(delta, "feedback", "nback_delta", n_perm, s)),
            ("nback", "interaction(attentionxfeedback)", lambda s: perm_test_interaction_between(delta, "nback_delta", n_perm, s)),
        ]
    else:
        entries.append(BatteryEntry("nback", "all", None))
    if "stai" in measures:
        specs += [
            ("stai", "main(time)", lambda s: perm_test_main(data, "time", "stai", n_perm, s)),
            ("stai", "interaction(attentionxtime)", lambda s: perm_test_interaction(data, "attention", "stai", n_perm, s)),
            ("stai", "interaction(feedbackxtime)", lambda s: perm_test_interaction(data, "feedback", "stai", n_perm, s)),
        ]
    else:
        entries.append(BatteryEntry("stai", "all", None))

    for idx, (block, label, fn) in enumerate(specs):
        run(block, label, fn, idx)

    use_rows = data.select("use_total")
    static = [r.value for r in use_rows if r.feedback == "static"]
    dynamic = [r.value for r in use_rows if r.feedback == "dynamic"]
    if static and dynamic:
        entries.append(BatteryEntry("use", "wilcoxon(static-vs-dynamic)", wilcoxon_rank_sum(static, dynamic)))
    else:
        entries.append(BatteryEntry("use", "wilcoxon(static-vs-dynamic)", None))

    descriptives = {}
    if "rmssd" in measures:
        descriptives["rmssd"] = summarize(data, "rmssd", ["attention", "time"])
    if delta.rows:
        descriptives["nback_delta"] = summarize(delta, "nback_delta", ["attention"])
    if "stai" in measures:
        descriptives["stai"] = summarize(data, "stai", ["attention", "time"])
    if use_rows:
        descriptives["use_total"] = summarize(data, "use_total", ["feedback"])
    return StudyReport(entries, descriptives, n_perm, seed)
