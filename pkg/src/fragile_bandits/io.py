"""Instance files and deterministic CSV/JSON writers.

Floats are written so they read back to the same double: ``repr`` in JSON,
17 significant digits in CSV.  JSON keys are sorted and no timestamps are
recorded, so identical inputs give identical bytes.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path

import numpy as np

from .geometry import Instance

INSTANCE_FORMAT = "fragile-bandits-instance/1"


def jsonable(x):
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, float) and not np.isfinite(x):
        return repr(x)  # "inf", "nan": keeps the file strict JSON
    return x


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj), encoding="utf-8")
    return path


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def csv_text(header, rows, config=None) -> str:
    """CSV with an optional leading ``# config=<json>`` line and a header row."""
    buf = io.StringIO()
    if config is not None:
        buf.write("# config=" + json.dumps(jsonable(config), sort_keys=True, separators=(",", ":")) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows, config=None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(csv_text(header, rows, config), encoding="utf-8")
    return path


def read_csv(path):
    """``(config, header, rows)``; rows are lists of strings."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    config = None
    if lines and lines[0].startswith("# config="):
        config = json.loads(lines[0][len("# config="):])
        lines = lines[1:]
    reader = list(csv.reader(lines))
    return config, reader[0], reader[1:]


def embedded_config(path):
    """Config stored in a JSON output (key ``config``) or a CSV comment line."""
    path = Path(path)
    if path.suffix == ".csv":
        cfg = read_csv(path)[0]
    else:
        cfg = read_json(path).get("config")
    if cfg is None:
        raise ValueError(f"{path} carries no embedded config")
    return cfg


def instance_to_dict(inst: Instance) -> dict:
    return {
        "format": INSTANCE_FORMAT,
        "d": inst.d,
        "beta": inst.beta,
        "actions": inst.actions,
        "parameters": inst.parameters,
        "prior": inst.prior,
        "optimal_map": inst.optimal_map,
        "meta": inst.meta,
    }


def instance_from_dict(data: dict) -> Instance:
    """Inverse of :func:`instance_to_dict`.

    ``prior`` may be the string ``"uniform"`` and ``optimal_map`` may be
    omitted, in which case it is derived from the vectors.
    """
    fmt_tag = data.get("format", INSTANCE_FORMAT)
    if fmt_tag != INSTANCE_FORMAT:
        raise ValueError(f"unknown instance format {fmt_tag!r}")
    params = np.array(data["parameters"], dtype=float)
    if "d" in data and params.ndim == 2 and params.shape[1] != int(data["d"]):
        raise ValueError(f"declared d={data['d']} but parameters have dimension {params.shape[1]}")
    prior = data.get("prior", "uniform")
    omap = data.get("optimal_map")
    return Instance.create(
        np.array(data["actions"], dtype=float),
        params,
        float(data["beta"]),
        prior if isinstance(prior, str) else np.array(prior, dtype=float),
        None if omap is None else np.array(omap, dtype=np.int64),
        data.get("meta", {}),
    )


def save_instance(inst: Instance, path) -> Path:
    return write_json(path, instance_to_dict(inst))


def load_instance(path) -> Instance:
    return instance_from_dict(read_json(path))


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
