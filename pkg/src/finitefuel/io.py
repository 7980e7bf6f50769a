"""CSV and JSON writers.  Floats are written with 17 significant digits so
that reading a file back and writing it again reproduces it exactly."""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable, Sequence

import numpy as np

from .boundary import BoundaryTable
from .model import DerivedConstants, ModelParams


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_value(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_json_value(x) for x in v]
    return v


def to_json(obj) -> str:
    return json.dumps(_json_value(obj), indent=2) + "\n"


def to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def read_csv(text: str):
    """Header and rows with numeric cells parsed as floats."""
    rows = list(csv.reader(io.StringIO(text)))
    out = []
    for r in rows[1:]:
        cells = []
        for v in r:
            try:
                cells.append(float(v))
            except ValueError:
                cells.append(v)
        out.append(cells)
    return rows[0], out


# -- per-object serializers ------------------------------------------------------------

def constants_dict(p: ModelParams, d: DerivedConstants) -> dict:
    out = p.to_dict()
    out.update(d.to_dict())
    return out


def constants_csv(p: ModelParams, d: DerivedConstants) -> str:
    row = constants_dict(p, d)
    return to_csv(list(row), [["" if v is None else v for v in row.values()]])


BOUNDARY_HEADER = ["c", "F", "G", "A", "B", "G_prime"]


def boundary_csv(table: BoundaryTable) -> str:
    return to_csv(BOUNDARY_HEADER,
                  ([bp.c, bp.F, bp.G, bp.A, bp.B, bp.G_prime] for bp in table.points))


def boundary_json(table: BoundaryTable) -> str:
    return to_json({
        "params": table.params.to_dict(),
        "c0": table.c0,
        "c2": table.c2,
        # c2 is null when no crossing was found below the scan ceiling
        "c2_infinite": table.c2 is not None and math.isinf(table.c2),
        "points": [bp.to_dict() for bp in table.points],
    })


VALUE_HEADER = ["x", "v_tilde", "v", "obstacle", "region"]


def value_csv(profile) -> str:
    return to_csv(VALUE_HEADER, profile.rows())


def value_json(profile) -> str:
    return to_json(profile.to_dict())


def minorant_csv(res) -> str:
    return to_csv(["y", "w"], zip(res.y_grid, res.w))


def minorant_json(res) -> str:
    return to_json({
        "n_points": len(res.x_grid),
        "x_max": res.x_grid[-1],
        "contact_left_y": res.contact_left,
        "contact_right_y": res.contact_right,
        "contact_left_x": res.x_grid[res.i_left],
        "contact_right_x": None if res.i_right is None else res.x_grid[res.i_right],
        "slope": res.slope,
        "intercept": res.intercept,
    })


def psor_csv(res) -> str:
    return to_csv(["x", "v", "stop"], zip(res.x_grid, res.v, res.stop_mask))


def psor_json(res) -> str:
    cont = res.x_grid[~res.stop_mask]
    return to_json({
        "n_nodes": len(res.x_grid),
        "x_min": res.x_grid[0],
        "x_max": res.x_grid[-1],
        "h": res.h,
        "continuation_min": cont.min() if cont.size else None,
        "continuation_max": cont.max() if cont.size else None,
        "policy_iterations": res.iterations,
        "psor_sweeps": res.psor_sweeps,
        "residual": res.residual,
    })


SIM_KEYS = ["mean_cost", "std_error", "n_paths", "dt", "horizon", "n_jumped",
            "n_stopped_left", "truncated", "tail_bound"]


def sim_json(res) -> str:
    d = res.to_dict()
    return to_json({k: d[k] for k in SIM_KEYS})


def sim_csv(res) -> str:
    d = res.to_dict()
    return to_csv(SIM_KEYS, [[d[k] for k in SIM_KEYS]])


REPORT_HEADER = ["name", "passed", "worst_violation", "location", "tolerance", "statement",
                 "reason"]


def report_json(reports) -> str:
    return to_json([r.to_dict() for r in reports])


def report_csv(reports) -> str:
    return to_csv(REPORT_HEADER,
                  ([r.name, r.passed, r.worst_violation,
                    "" if r.location is None else r.location, r.tolerance, r.statement,
                    r.reason] for r in reports))
