"""
Result files.

Rows go to CSV (RFC 4180 via the csv module) or JSON lines. Run metadata
(configuration, its hash, seeds, tool version) is written next to the data
as ``<path>.meta.json``, which is enough to regenerate every row.
"""

import csv
import dataclasses
import hashlib
import json
import math
from pathlib import Path

from .experiments import ResultRow

FIELDS = [f.name for f in dataclasses.fields(ResultRow)]
_FLOATS = ('sweep_value', 'total_power_db', 'weighted_objective', 'dual_objective',
           'duality_gap')
_LISTS = ('user_powers_db', 'empirical_sinr_db')


def _fmt(x):
    return f"{x:.6g}"


def config_hash(config):
    blob = json.dumps(config.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def build_metadata(spec, version):
    return {
        'tool': 'txrx_duality', 'version': version, 'kind': spec.kind, 'name': spec.name,
        'config': spec.config.to_dict(), 'config_hash': config_hash(spec.config),
        'values': list(spec.values), 'seed0': spec.seed0, 'trials': spec.trials,
        'seeds': spec.seeds, 'backoff': spec.backoff, 'max_retries': spec.max_retries,
        'n_sym': spec.n_sym, 'mean_db': spec.mean_db,
        'options': dataclasses.asdict(spec.options),
    }


def _csv_record(row):
    rec = {}
    for name in FIELDS:
        v = getattr(row, name)
        if name in _LISTS:
            rec[name] = ';'.join(_fmt(x) for x in v)
        elif name in _FLOATS:
            rec[name] = _fmt(v)
        else:
            rec[name] = v
    return rec


def _json_record(row):
    rec = {}
    for name in FIELDS:
        v = getattr(row, name)
        if name in _LISTS:
            v = [float(_fmt(x)) for x in v]
        elif name in _FLOATS:
            v = float(_fmt(v)) if math.isfinite(v) else None
        rec[name] = v
    return rec


def emit_results(rows, path, fmt='csv', metadata=None):
    """
    Write result rows to ``path`` in ``'csv'`` or ``'jsonl'`` format.

    Raises
    ------
    OSError
        With the offending path in the message.
    """
    if not rows:
        raise ValueError("nothing to write")
    if fmt not in ('csv', 'jsonl'):
        raise ValueError(f"unknown format {fmt!r}")
    path = Path(path)
    try:
        with open(path, 'w', newline='') as fh:
            if fmt == 'csv':
                writer = csv.DictWriter(fh, fieldnames=FIELDS)
                writer.writeheader()
                for row in rows:
                    writer.writerow(_csv_record(row))
            else:
                for row in rows:
                    fh.write(json.dumps(_json_record(row)) + '\n')
        if metadata is not None:
            with open(meta_path(path), 'w') as fh:
                json.dump(metadata, fh, indent=2)
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc.strerror or exc}") from exc


def meta_path(path):
    path = Path(path)
    return path.with_name(path.name + '.meta.json')


def read_metadata(path):
    with open(meta_path(path)) as fh:
        return json.load(fh)


def _parse_float(v):
    return float('nan') if v in (None, '') else float(v)


def read_results(path, fmt=None):
    """Parse a file written by `emit_results` back into `ResultRow` objects."""
    path = Path(path)
    fmt = fmt or ('jsonl' if path.suffix in ('.jsonl', '.json') else 'csv')
    rows = []
    with open(path, newline='') as fh:
        if fmt == 'csv':
            records = list(csv.DictReader(fh))
            for rec in records:
                for name in _LISTS:
                    rec[name] = [x for x in rec[name].split(';') if x]
        else:
            records = [json.loads(line) for line in fh if line.strip()]
    for rec in records:
        for name in _FLOATS:
            rec[name] = _parse_float(rec[name])
        for name in _LISTS:
            rec[name] = tuple(float(x) for x in rec[name])
        rec['seed'] = int(rec['seed'])
        rec['iterations'] = int(rec['iterations'])
        rows.append(ResultRow(**rec))
    return rows
