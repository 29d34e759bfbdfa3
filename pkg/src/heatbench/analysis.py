"""Scaling fits, the averaged-time speed score, LOC counting, Basic COCOMO and
the easy/difficult x slow/fast classification map."""

from __future__ import annotations

import csv
import json
import math
import os
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np


class DegenerateFit(ValueError):
    """Scaling fit needs at least two distinct thread counts."""


# ---------------------------------------------------------------------------
# strong-scaling fit  t(p) = serial_s + parallel_s / p


@dataclass(frozen=True)
class FitResult:
    serial_s: float
    parallel_s: float
    r_squared: float

    def predict(self, threads) -> np.ndarray:
        return self.serial_s + self.parallel_s / np.asarray(threads, dtype=float)


def r_squared(observed: Sequence[float], predicted: Sequence[float]) -> float:
    """Coefficient of determination ``1 - SS_res / SS_tot``.

    Constant observations give 1 when the prediction matches them exactly.
    """
    y = np.asarray(observed, dtype=float)
    yhat = np.asarray(predicted, dtype=float)
    ss_res = float(np.sum((y - yhat) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else -math.inf
    return 1.0 - ss_res / ss_tot


def fit_scaling(samples: Iterable[tuple[float, float]]) -> FitResult:
    """Least-squares fit of elapsed time against thread count.

    ``samples`` are ``(threads, elapsed_s)`` pairs; repeated thread counts are
    fine. The model is linear in ``1/p`` and solved in closed form.
    """
    pairs = [(float(p), float(t)) for p, t in samples]
    if not pairs:
        raise DegenerateFit("no samples")
    p = np.array([q for q, _ in pairs])
    t = np.array([s for _, s in pairs])
    if np.any(p <= 0):
        raise ValueError("thread counts must be positive")
    if np.unique(p).size < 2:
        raise DegenerateFit(f"need at least two distinct thread counts, got {sorted(set(p.tolist()))}")

    if np.all(t == t[0]):
        # Exact for constant data; the means below could round off.
        return FitResult(float(t[0]), 0.0, 1.0)

    x = 1.0 / p
    x_mean = x.mean()
    t_mean = t.mean()
    dx = x - x_mean
    slope = float(np.dot(dx, t - t_mean) / np.dot(dx, dx))
    intercept = float(t_mean - slope * x_mean)
    return FitResult(intercept, slope, r_squared(t, intercept + slope * x))


# ---------------------------------------------------------------------------
# speed score


@dataclass(frozen=True)
class AverageTime:
    t2: float
    t20: float
    t40: float

    @property
    def t_average(self) -> float:
        return t_average(self.t2, self.t20, self.t40)


def t_average(t2: float, t20: float, t40: float) -> float:
    """Mean of the elapsed times at 2, 20 and 40 threads."""
    for name, v in (("t2", t2), ("t20", t20), ("t40", t40)):
        if not v > 0:
            raise ValueError(f"{name} must be positive, got {v!r}")
    return (t2 + t20 + t40) / 3


# ---------------------------------------------------------------------------
# classification map


@dataclass(frozen=True)
class ClassificationPoint:
    label: str
    x: float  # effort: -1 easy .. +1 difficult
    y: float  # speed:  -1 slow .. +1 fast


def _to_unit_interval(values: Sequence[float]) -> list[float]:
    lo, hi = min(values), max(values)
    if hi == lo:
        return [0.0] * len(values)
    return [-1.0 + 2.0 * (v - lo) / (hi - lo) for v in values]


def classify(entries: Iterable[tuple[str, float, float]]) -> list[ClassificationPoint]:
    """Place ``(label, effort_months, t_average)`` entries on the [-1, 1] square.

    Effort maps linearly to x (least effort at -1). Speed uses ``-t_average``
    so the fastest entry lands at y = +1. An axis with no spread maps to 0.
    """
    entries = list(entries)
    if not entries:
        raise ValueError("classify needs at least one entry")
    xs = _to_unit_interval([float(e) for _, e, _ in entries])
    ys = _to_unit_interval([-float(t) for _, _, t in entries])
    return [ClassificationPoint(label, x, y) for (label, _, _), x, y in zip(entries, xs, ys)]


# ---------------------------------------------------------------------------
# Basic COCOMO, organic mode

COCOMO_ORGANIC = {"a": 2.4, "b": 1.05, "c": 2.5, "d": 0.38}


@dataclass(frozen=True)
class CocomoEstimate:
    loc: int
    kloc: float
    effort_pm: float
    schedule_months: float


def cocomo(loc: int) -> CocomoEstimate:
    """Effort (person-months) and schedule (months) for ``loc`` source lines."""
    if loc < 0:
        raise ValueError(f"loc must be non-negative, got {loc}")
    c = COCOMO_ORGANIC
    kloc = loc / 1000
    effort = c["a"] * kloc ** c["b"]
    schedule = c["c"] * effort ** c["d"] if effort > 0 else 0.0
    return CocomoEstimate(loc, kloc, effort, schedule)


# ---------------------------------------------------------------------------
# line counting


@dataclass(frozen=True)
class CommentRule:
    line: tuple[str, ...] = ()
    block: tuple[tuple[str, str], ...] = ()


_C_STYLE = CommentRule(line=("//",), block=(("/*", "*/"),))
_HASH = CommentRule(line=("#",))

DEFAULT_COMMENT_RULES: dict[str, CommentRule] = {
    ".py": CommentRule(line=("#",), block=(('"""', '"""'), ("'''", "'''"))),
    ".jl": CommentRule(line=("#",), block=(("#=", "=#"),)),
    ".c": _C_STYLE,
    ".h": _C_STYLE,
    ".cc": _C_STYLE,
    ".cpp": _C_STYLE,
    ".cxx": _C_STYLE,
    ".hpp": _C_STYLE,
    ".ci": _C_STYLE,
    ".rs": _C_STYLE,
    ".go": _C_STYLE,
    ".java": _C_STYLE,
    ".swift": _C_STYLE,
    ".chpl": _C_STYLE,
    ".js": _C_STYLE,
    ".ts": _C_STYLE,
    ".sh": _HASH,
    ".cmake": _HASH,
}


@dataclass
class FileCount:
    code: int = 0
    comment: int = 0
    blank: int = 0


@dataclass
class LocReport:
    files: dict[str, FileCount] = field(default_factory=dict)
    errors: list[tuple[str, str]] = field(default_factory=list)

    @property
    def total(self) -> int:
        return sum(f.code for f in self.files.values())

    def by_extension(self) -> dict[str, int]:
        out: dict[str, int] = defaultdict(int)
        for name, f in self.files.items():
            out[Path(name).suffix] += f.code
        return dict(out)


def count_lines(text: str, rule: CommentRule) -> FileCount:
    """Classify each line of ``text`` as code, comment or blank.

    A line is code if any non-blank character lies outside comments. Comment
    markers inside string literals are not recognised.
    """
    counts = FileCount()
    open_block: str | None = None  # closing delimiter while inside a block comment
    starts = [(s, None) for s in rule.line] + [(o, c) for o, c in rule.block]
    for line in text.splitlines():
        if not line.strip():
            counts.blank += 1
            continue
        has_code = False
        pos = 0
        while pos < len(line):
            if open_block is not None:
                end = line.find(open_block, pos)
                if end < 0:
                    break
                pos = end + len(open_block)
                open_block = None
                continue
            hit, hit_at = None, len(line)
            for opener, closer in starts:
                i = line.find(opener, pos)
                if 0 <= i < hit_at or (i == hit_at and hit is not None and len(opener) > len(hit[0])):
                    hit, hit_at = (opener, closer), i
            if line[pos:hit_at].strip():
                has_code = True
            if hit is None or hit[1] is None:
                break
            open_block = hit[1]
            pos = hit_at + len(hit[0])
        if has_code:
            counts.code += 1
        else:
            counts.comment += 1
    return counts


def _iter_sources(root: Path, rules: Mapping[str, CommentRule]):
    if root.is_file():
        yield root
        return
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames[:] = sorted(d for d in dirnames if not d.startswith(".") and d != "__pycache__")
        for name in sorted(filenames):
            path = Path(dirpath) / name
            if path.suffix in rules:
                yield path


def count_loc(source_root: str | os.PathLike, comment_rules: Mapping[str, CommentRule] | None = None) -> LocReport:
    """Count non-blank, non-comment lines under ``source_root``.

    ``comment_rules`` extends or overrides ``DEFAULT_COMMENT_RULES`` by file
    extension; files with unknown extensions are ignored. Unreadable files are
    recorded in ``errors`` and skipped.
    """
    rules = dict(DEFAULT_COMMENT_RULES)
    if comment_rules:
        rules.update(comment_rules)
    root = Path(source_root)
    if not root.exists():
        raise FileNotFoundError(f"no such file or directory: {root}")
    report = LocReport()
    for path in _iter_sources(root, rules):
        rule = rules.get(path.suffix)
        if rule is None:
            report.errors.append((str(path), "no comment rule for extension"))
            continue
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            report.errors.append((str(path), str(exc)))
            continue
        report.files[str(path)] = count_lines(text, rule)
    return report


# ---------------------------------------------------------------------------
# benchmark CSV -> fits / classification


def fits_by_strategy(records) -> dict[str, FitResult | DegenerateFit]:
    """Fit every strategy found in ``records`` (BenchRecord-like objects)."""
    samples: dict[str, list[tuple[int, float]]] = defaultdict(list)
    for r in records:
        samples[r.strategy].append((r.threads, r.elapsed_s))
    out: dict[str, FitResult | DegenerateFit] = {}
    for strategy, pts in samples.items():
        try:
            out[strategy] = fit_scaling(pts)
        except DegenerateFit as exc:
            out[strategy] = exc
    return out


def average_times(records) -> dict[str, AverageTime]:
    """Per-strategy mean elapsed time at 2, 20 and 40 threads, where all three exist."""
    times: dict[str, dict[int, list[float]]] = defaultdict(lambda: defaultdict(list))
    for r in records:
        times[r.strategy][r.threads].append(r.elapsed_s)
    out = {}
    for strategy, by_threads in times.items():
        if all(p in by_threads for p in (2, 20, 40)):
            means = [float(np.mean(by_threads[p])) for p in (2, 20, 40)]
            out[strategy] = AverageTime(*means)
    return out


def write_rows(rows: Sequence[Mapping], path: str | os.PathLike) -> None:
    """Write result rows as CSV (``.csv`` suffix) or JSON lines (anything else)."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        if path.suffix.lower() == ".csv":
            keys: list[str] = []
            for row in rows:
                keys.extend(k for k in row if k not in keys)
            writer = csv.DictWriter(fh, fieldnames=keys, lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
        else:
            for row in rows:
                fh.write(json.dumps(dict(row)) + "\n")


def fit_row(label: str, fit: FitResult) -> dict:
    return {"kind": "fit", "label": label, **asdict(fit)}


def point_row(point: ClassificationPoint) -> dict:
    return {"kind": "classification", **asdict(point)}
