#!/usr/bin/env python3
"""Utility functions for gammanano: console summaries and result files."""

import json
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import ConfigurationError
from .sync import Histogram, TacConfig


def print_stats(stats: Dict[str, object], title="SUMMARY"):
    """Print formatted statistics."""
    print("\n" + "="*60)
    print(title)
    print("="*60)

    for key, value in stats.items():
        label = key.replace('_', ' ').capitalize()
        if isinstance(value, float):
            print(f"{label:28s} {value:.6g}")
        else:
            print(f"{label:28s} {value}")
    print("="*60)


def provenance_line(digest: str, seed: int) -> str:
    return f"# gammanano config_digest={digest} seed={seed}"


def _prepare(path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_csv(path, header: Sequence[str], rows, digest: str, seed: int, fmt="%.10g") -> Path:
    """CSV with the provenance comment line and a header row."""
    path = _prepare(path)
    data = np.asarray(rows)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(provenance_line(digest, seed) + "\n")
        f.write(",".join(header) + "\n")
        if data.size:
            np.savetxt(f, data.reshape(len(data), -1), delimiter=",", fmt=fmt)
    return path


def read_csv(path) -> Tuple[List[str], np.ndarray, Dict[str, str]]:
    """Header, numeric rows and provenance fields of a file written by write_csv."""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"file not found: {path}")
    lines = path.read_text(encoding='utf-8').splitlines()
    provenance = {}
    body = []
    for line in lines:
        if line.startswith('#'):
            for token in line[1:].split():
                if '=' in token:
                    key, value = token.split('=', 1)
                    provenance[key] = value
        elif line.strip():
            body.append(line)
    if not body:
        raise ConfigurationError(f"{path}: no header row")
    header = body[0].split(',')
    rows = np.loadtxt(body[1:], delimiter=',', ndmin=2) if len(body) > 1 else np.zeros((0, len(header)))
    return header, rows, provenance


def write_json(path, payload: dict, digest: str, seed: int) -> Path:
    """JSON documents carry the provenance as keys."""
    path = _prepare(path)
    document = {"config_digest": digest, "seed": seed, **payload}
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(document, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def write_records(path, records: np.ndarray, digest: str, seed: int) -> Path:
    """Detection times as int64 nanoseconds."""
    stamps = np.rint(np.asarray(records)).astype(np.int64)
    return write_csv(path, ["t_abs_ns"], stamps, digest, seed, fmt="%d")


def read_records(path) -> np.ndarray:
    header, rows, _ = read_csv(path)
    if header != ["t_abs_ns"]:
        raise ConfigurationError(f"{path}: expected header t_abs_ns, got {','.join(header)}")
    return rows[:, 0].astype(np.int64)


def write_histogram(path, h: Histogram, tac: TacConfig, digest: str, seed: int) -> Path:
    rows = np.column_stack([np.arange(h.channel_count), h.channel_times(), h.counts])
    path = write_csv(path, ["channel", "time_ns", "counts"], rows, digest, seed, fmt=["%d", "%.6f", "%d"])
    write_json(path.with_suffix('.json'), {
        "tac": tac.model_dump(),
        "channel_width_ns": h.channel_width_ns,
        "total_starts": h.total_starts,
        "total_counts": h.total_counts,
    }, digest, seed)
    return path


def read_histogram(path) -> Histogram:
    """Histogram CSV; the JSON sidecar next to it supplies width and starts when present."""
    path = Path(path)
    header, rows, _ = read_csv(path)
    if header != ["channel", "time_ns", "counts"]:
        raise ConfigurationError(f"{path}: expected header channel,time_ns,counts")
    if rows.shape[0] == 0:
        raise ConfigurationError(f"{path}: histogram has no channels")
    counts = rows[:, 2].astype(np.int64)
    sidecar = path.with_suffix('.json')
    if sidecar.is_file():
        meta = json.loads(sidecar.read_text(encoding='utf-8'))
        return Histogram(counts, float(meta["channel_width_ns"]), int(meta.get("total_starts", 0)))
    width = float(rows[1, 1] - rows[0, 1]) if rows.shape[0] > 1 else 2.0 * float(rows[0, 1])
    return Histogram(counts, width)
