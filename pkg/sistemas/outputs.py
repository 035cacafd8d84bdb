# sistemas/outputs.py

import csv
import json
import logging
from pathlib import Path

import numpy as np
from django.core.serializers.json import DjangoJSONEncoder

logger = logging.getLogger(__name__)


class ResultEncoder(DjangoJSONEncoder):
    """DjangoJSONEncoder que também entende tipos do numpy."""

    def default(self, o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, (tuple, set)):
            return list(o)
        return super().default(o)


def _target(path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_json(path, payload):
    path = _target(path)
    text = json.dumps(payload, cls=ResultEncoder, indent=2, sort_keys=True, ensure_ascii=False)
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        handle.write(text + '\n')
    logger.info(f"JSON gravado em {path}")
    return path


def _write_rows(path, header, rows):
    path = _target(path)
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(header)
        writer.writerows(rows)
    logger.info(f"CSV gravado em {path} ({len(rows)} linhas)")
    return path


def _cell(value):
    if value is None:
        return ''
    return repr(float(value))


def write_field_csv(path, domain, u):
    """Uma linha por nó (fronteira incluída): coord1[,coord2],u1,...,um."""
    u = np.atleast_2d(np.asarray(u, dtype=float))
    full = domain.extend(u)
    header = list(domain.coord_labels) + [f"u{i + 1}" for i in range(full.shape[0])]
    rows = [[_cell(c) for c in domain.coords[k]] + [_cell(v) for v in full[:, k]]
            for k in range(domain.n_nodes)]
    return _write_rows(path, header, rows)


def write_hypersurface_csv(path, samples):
    samples = sorted(samples, key=lambda s: tuple(s.sigma))
    width = samples[0].sigma.size if samples else 1
    header = [f"sigma{i + 1}" for i in range(width)] + [
        'lambda_star', 'lambda_lo', 'lambda_hi', 'eta1_near_star', 'l1_last']
    rows = []
    for sample in samples:
        l1_last = sample.l1_history[-1][1] if sample.l1_history else None
        rows.append([_cell(s) for s in sample.sigma] + [
            _cell(sample.lambda_star_est), _cell(sample.lambda_lo), _cell(sample.lambda_hi),
            _cell(sample.eta1_near_star), _cell(l1_last)])
    return _write_rows(path, header, rows)
