"""Flat-file formats: RR CSV, feature CSV/JSON, reports and curve dumps."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import FEATURE_NAMES, ExerciseState, LabeledDataset, RRSeries, Window
from .errors import ParseError


def _fmt(v: float) -> str:
    return "" if not math.isfinite(v) else repr(float(v))


def _num(text: str, line: int, column: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"column {column!r}: not a number: {text!r}", line) from None


def _label_name(code: int) -> str:
    return "" if code < 0 else ExerciseState(code).name


def _parse_label(text: str, line: int) -> int:
    if text.strip() == "":
        return -1
    try:
        return int(ExerciseState.parse(text))
    except ValueError:
        raise ParseError(f"unknown label {text!r}", line) from None


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n")


# --------------------------------------------------------------------------
# RR input


def read_rr_csv(path, subject_age: int | None = None) -> list[tuple[str | None, int, RRSeries]]:
    """Read an RR file into ``(window_id, label, series)`` groups.

    Required column ``rr_ms``; optional ``t_ms`` (beat end times, else the
    cumulative sum is used), and optional ``window_id`` / ``label`` which
    group beats into pre-cut labelled windows. Without ``window_id`` the
    whole file is a single group with id ``None``.
    """
    groups: dict[str | None, tuple[int, list[float], list[float]]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError("empty file", 1) from None
        if "rr_ms" not in header:
            raise ParseError("header must contain an 'rr_ms' column", 1)
        col = {name: i for i, name in enumerate(header)}
        has_t = "t_ms" in col
        for line, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", line)
            rr = _num(row[col["rr_ms"]], line, "rr_ms")
            if not rr > 0:
                raise ParseError(f"rr_ms must be > 0, got {rr}", line)
            wid = row[col["window_id"]].strip() if "window_id" in col else None
            label = _parse_label(row[col["label"]], line) if "label" in col else -1
            entry = groups.setdefault(wid, (label, [], []))
            if entry[0] != label:
                raise ParseError(f"window {wid!r} mixes labels", line)
            entry[1].append(rr)
            if has_t:
                entry[2].append(_num(row[col["t_ms"]], line, "t_ms"))
    if not groups:
        raise ParseError("no RR rows", 2)
    out = []
    for wid, (label, rr, t) in groups.items():
        series = RRSeries(np.array(rr), subject_age=subject_age, times_ms=np.array(t) if has_t else None)
        out.append((wid, label, series))
    return out


def write_rr_csv(windows: Iterable[Window], path) -> None:
    """One row per beat: ``window_id,label,t_ms,rr_ms`` (t_ms restarts per window)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("window_id", "label", "t_ms", "rr_ms"))
        for w in windows:
            label = "" if w.label is None else w.label.name
            t = np.cumsum(w.series.intervals)
            for ti, rr in zip(t, w.series.intervals):
                writer.writerow((w.window_id, label, _fmt(ti), _fmt(rr)))


def read_hr_csv(path) -> np.ndarray:
    """``t_s,hr_bpm`` points as an (n, 2) array."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError("empty file", 1) from None
        if header[:2] != ["t_s", "hr_bpm"]:
            raise ParseError("header must be 't_s,hr_bpm'", 1)
        pts = []
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 2:
                raise ParseError("expected 2 fields", line)
            pts.append((_num(row[0], line, "t_s"), _num(row[1], line, "hr_bpm")))
    return np.array(pts, dtype=float).reshape(-1, 2)


# --------------------------------------------------------------------------
# Feature datasets


def write_features_csv(dataset: LabeledDataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("window_id", "label") + tuple(dataset.feature_names))
        for wid, label, row in zip(dataset.window_ids, dataset.y, dataset.X):
            writer.writerow([wid, _label_name(int(label))] + [_fmt(v) for v in row])


def read_features_csv(path, require_labels: bool = True) -> LabeledDataset:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError("empty file", 1) from None
        if "label" not in header:
            raise ParseError("missing 'label' column", 1)
        if not header or header[0] != "window_id":
            raise ParseError("first column must be 'window_id'", 1)
        li = header.index("label")
        names = tuple(h for i, h in enumerate(header) if i not in (0, li))
        if not names:
            raise ParseError("no feature columns", 1)
        ids, labels, rows = [], [], []
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", line)
            label = _parse_label(row[li], line)
            if require_labels and label < 0:
                raise ParseError("missing label", line)
            ids.append(row[0])
            labels.append(label)
            rows.append(
                [
                    math.nan if row[i].strip() == "" else _num(row[i], line, header[i])
                    for i in range(len(header))
                    if i not in (0, li)
                ]
            )
    X = np.array(rows, dtype=float).reshape(len(rows), len(names))
    return LabeledDataset(X, np.array(labels, dtype=int), names, tuple(ids))


def dataset_to_json(dataset: LabeledDataset) -> list[dict]:
    return [
        {
            "window_id": wid,
            "label": _label_name(int(label)) or None,
            "features": {
                n: (float(v) if math.isfinite(v) else None)
                for n, v in zip(dataset.feature_names, row)
            },
        }
        for wid, label, row in zip(dataset.window_ids, dataset.y, dataset.X)
    ]


def dataset_from_json(records: Sequence[dict]) -> LabeledDataset:
    if not records:
        raise ParseError("empty dataset")
    names = tuple(records[0]["features"])
    X = np.array(
        [[math.nan if r["features"][n] is None else r["features"][n] for n in names] for r in records],
        dtype=float,
    )
    y = np.array([-1 if r["label"] is None else int(ExerciseState.parse(r["label"])) for r in records])
    return LabeledDataset(X, y, names, tuple(str(r["window_id"]) for r in records))


# --------------------------------------------------------------------------
# Reports


def write_normality_csv(result, path) -> None:
    """``class,feature,chi2,df,alpha,critical,is_normal`` per tested pair."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("class", "feature", "chi2", "df", "alpha", "critical", "is_normal"))
        for (feature, cls), rep in sorted(result.normality.items(), key=lambda kv: (kv[0][1], FEATURE_NAMES.index(kv[0][0]) if kv[0][0] in FEATURE_NAMES else 99, kv[0][0])):
            writer.writerow(
                (_label_name(cls) or cls, feature, _fmt(rep.chi2_stat), rep.df, rep.alpha,
                 _fmt(rep.critical), str(rep.is_normal).lower())
            )


def write_spectrum_csv(spectrum, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("freq_hz", "psd_ms2_per_hz"))
        for f, p in zip(spectrum.frequencies, spectrum.density):
            writer.writerow((_fmt(f), _fmt(p)))


def write_curve_csv(times, values, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("t_s", "hr_bpm"))
        for t, v in zip(times, values):
            writer.writerow((_fmt(t), _fmt(v)))


def trend_to_json(model) -> dict:
    d = model.to_dict()
    d["t_range"] = [v if math.isfinite(v) else None for v in d["t_range"]]
    return d
