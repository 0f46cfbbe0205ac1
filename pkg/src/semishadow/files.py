"""CSV and JSON artifacts.

Trajectory files use the header ``t,point,generator_id,gap``: row t holds the
point at time t, the generator id and gap of step t (blank on the last row).
Floats are written with ``repr`` so a file reloads to the same bits.
JSON is written with sorted keys; non-finite floats become the strings
"inf", "-inf" and "nan".
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .core import DomainError, Space
from .semigroup import GeneratorSet, PseudoTrajectory, Trajectory, step_gaps

TRAJECTORY_HEADER = ["t", "point", "generator_id", "gap"]


def _fmt_point(space: Space, p) -> str:
    return repr(float(p)) if space.is_real else str(p)


def _parse_point(space: Space, text: str):
    if space.is_real:
        return float(text)
    for lab in space.labels:
        if str(lab) == text:
            return lab
    raise DomainError(f"unknown label {text!r}")


def write_trajectory_csv(path, seq, system=None) -> None:
    """Write a Trajectory or PseudoTrajectory.

    For a pseudo-trajectory the gap column is measured against ``system``
    (default: no gaps column values) and the generator column carries the
    reference word, or the best generator when there is none.
    """
    space = seq.space
    n = len(seq)
    if isinstance(seq, Trajectory):
        word, gaps = seq.word, [0.0] * (n - 1)
    elif system is not None:
        gaps, best = step_gaps(system, seq)
        word = seq.word if seq.word is not None else tuple(best)
    else:
        word, gaps = seq.word or ("",) * (n - 1), [""] * (n - 1)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJECTORY_HEADER)
        for i in range(n):
            t = seq.t_min + i
            if i < n - 1:
                g = gaps[i]
                w.writerow([t, _fmt_point(space, seq.points[i]), word[i],
                            repr(float(g)) if g != "" else ""])
            else:
                w.writerow([t, _fmt_point(space, seq.points[i]), "", ""])


def read_trajectory_csv(path, G: GeneratorSet, true: bool = False):
    """Reload a trajectory file; ``true=True`` re-validates it as a Trajectory."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise DomainError(f"{path}: empty trajectory file")
    times = [int(r["t"]) for r in rows]
    if times != list(range(times[0], times[0] + len(times))):
        raise DomainError(f"{path}: times are not consecutive")
    pts = G.space.as_array([_parse_point(G.space, r["point"]) for r in rows])
    word = tuple(r["generator_id"] for r in rows[:-1])
    if true:
        return Trajectory(G, times[0], pts, word)
    return PseudoTrajectory(G.space, times[0], pts, word if all(word) else None)


def jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def write_json(path, obj: Any) -> None:
    Path(path).write_text(json.dumps(jsonable(obj), indent=2, sort_keys=True) + "\n")


def write_rounds_csv(path, cert) -> None:
    """One row per gluing round of a certificate."""
    ks = sorted(cert.rounds[0].partial_sums) if cert.rounds else []
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["round", "segments", "moments", "gap_sup", "recursion_ok", "max_change",
                    "untouched_radius", "cauchy_ok"] + [f"R_{k}" for k in ks])
        for r in cert.rounds:
            w.writerow([r.round, len(r.segments), len(r.moments), repr(r.gap_sup),
                        "" if r.recursion_ok is None else int(r.recursion_ok), repr(r.max_change),
                        "" if r.untouched_radius is None else r.untouched_radius,
                        int(r.cauchy_ok)] + [repr(r.partial_sums[k]) for k in ks])


def write_rows_csv(path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
