"""Parameter sweeps and figure-data regeneration.

A sweep walks one parameter axis, evaluates the requested information
quantities at every point, and never aborts: per-point failures become
NaN entries plus a message in the error column.  Figure bundles rebuild
the data behind the six reference plots as CSV with a JSON manifest.
"""

from __future__ import annotations

import json
import os
import warnings
from dataclasses import dataclass
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np

from . import __version__
from .chain import PARAM_TAGS, ChainParams
from .fisher import fisher_point
from .multiparam import qfi_matrix, qfim_det, uhlmann_matrix
from .quadrature import DEFAULT_QUAD, QuadratureConfig

__all__ = [
    "SWEEP_QUANTITIES",
    "CriticalNudgeWarning",
    "SweepSpec",
    "SweepTable",
    "sweep",
    "figure_bundle",
    "FIGURES",
]

SWEEP_QUANTITIES = ("F", "H", "S", "QFIM", "U", "det")

# column layout per quantity
_QFIM_COLS = tuple(
    "QFIM_%s_%s" % (a, b)
    for i, a in enumerate(PARAM_TAGS) for b in PARAM_TAGS[i:]
)
_U_COLS = ("U_J_gamma", "U_J_D", "U_gamma_D")
_COLUMNS = {
    "F": ("F",),
    "H": ("H",),
    "S": ("S",),
    "QFIM": _QFIM_COLS,
    "U": _U_COLS,
    "det": ("det", "condition_ratio"),
}


class CriticalNudgeWarning(UserWarning):
    """A sweep point sat on |J| = 1 and was moved off the divergence."""


@dataclass(frozen=True)
class SweepSpec:
    """One axis, fixed values for the other two, quantities to evaluate."""

    axis: str
    range: Tuple[float, float, int]
    fixed: Mapping[str, float]
    quantities: Tuple[str, ...] = ("F", "H", "S")
    wrt: str = "J"

    def __post_init__(self) -> None:
        if self.axis not in PARAM_TAGS:
            raise ValueError("axis must be one of %s" % (PARAM_TAGS,))
        lo, hi, points = self.range
        if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
            raise ValueError("range must satisfy lo < hi")
        if int(points) < 2:
            raise ValueError("need at least 2 sweep points")
        others = tuple(t for t in PARAM_TAGS if t != self.axis)
        if set(self.fixed) != set(others):
            raise ValueError("fixed must provide exactly %s" % (others,))
        object.__setattr__(self, "fixed", dict(self.fixed))
        qs = tuple(self.quantities)
        if not qs or any(q not in SWEEP_QUANTITIES for q in qs):
            raise ValueError("quantities must be a nonempty subset of %s"
                             % (SWEEP_QUANTITIES,))
        object.__setattr__(self, "quantities", qs)
        if self.wrt not in PARAM_TAGS:
            raise ValueError("wrt must be one of %s" % (PARAM_TAGS,))

    def axis_values(self) -> np.ndarray:
        lo, hi, points = self.range
        values = np.linspace(lo, hi, int(points))
        if self.axis == "J":
            on_line = np.abs(np.abs(values) - 1.0) <= 1e-9
            if np.any(on_line):
                warnings.warn(
                    "sweep hits |J| = 1; nudged to ±0.999",
                    CriticalNudgeWarning,
                )
                values = np.where(on_line, np.sign(values) * (1.0 - 1e-3), values)
        return values

    def to_dict(self) -> dict:
        return {
            "axis": self.axis,
            "range": [self.range[0], self.range[1], int(self.range[2])],
            "fixed": dict(sorted(self.fixed.items())),
            "quantities": list(self.quantities),
            "wrt": self.wrt,
        }


@dataclass(frozen=True)
class SweepTable:
    """Columnar sweep output; axis column first, error column last."""

    spec: SweepSpec
    axis_values: np.ndarray
    columns: Dict[str, np.ndarray]
    errors: Tuple[str, ...]

    def header(self) -> List[str]:
        return [self.spec.axis] + list(self.columns) + ["error"]

    def to_csv(self) -> str:
        lines = [",".join(self.header())]
        cols = list(self.columns.values())
        for i, v in enumerate(self.axis_values):
            cells = ["%.17g" % v] + ["%.17g" % c[i] for c in cols]
            cells.append(self.errors[i])
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        payload = {
            "spec": self.spec.to_dict(),
            "axis": [float(v) for v in self.axis_values],
            "columns": {k: [float(x) for x in v] for k, v in self.columns.items()},
            "errors": list(self.errors),
        }
        return json.dumps(payload, sort_keys=True, indent=1) + "\n"


def _evaluate_point(params: ChainParams, quantities, wrt,
                    quad: QuadratureConfig) -> Tuple[Dict[str, float], str]:
    out: Dict[str, float] = {}
    messages: List[str] = []

    want_fhs = [q for q in ("F", "H", "S") if q in quantities]
    if want_fhs:
        try:
            fp = fisher_point(params, wrt, quad)
            values = {"F": fp.F, "H": fp.H, "S": fp.S}
            for q in want_fhs:
                out[q] = float(values[q])
        except Exception as exc:  # per-point failures must not abort
            for q in want_fhs:
                out[q] = np.nan
            messages.append("%s: %s" % (type(exc).__name__, exc))

    if "QFIM" in quantities or "U" in quantities or "det" in quantities:
        try:
            qm = qfi_matrix(params, quad)
            if "QFIM" in quantities:
                k = 0
                for i in range(3):
                    for j in range(i, 3):
                        out[_QFIM_COLS[k]] = float(qm.matrix[i, j])
                        k += 1
            if "U" in quantities:
                um = uhlmann_matrix(params, quad)
                out["U_J_gamma"] = float(um.matrix[0, 1])
                out["U_J_D"] = float(um.matrix[0, 2])
                out["U_gamma_D"] = float(um.matrix[1, 2])
            if "det" in quantities:
                rep = qfim_det(params, quad)
                out["det"] = float(rep.det)
                out["condition_ratio"] = float(rep.condition_ratio)
        except Exception as exc:
            for q in ("QFIM", "U", "det"):
                if q in quantities:
                    for col in _COLUMNS[q]:
                        out[col] = np.nan
            messages.append("%s: %s" % (type(exc).__name__, exc))

    return out, "; ".join(messages)


def sweep(spec: SweepSpec, quad: QuadratureConfig = DEFAULT_QUAD) -> SweepTable:
    """Evaluate the requested quantities along the axis; never aborts."""
    values = spec.axis_values()
    col_names: List[str] = []
    for q in spec.quantities:
        col_names.extend(_COLUMNS[q])
    columns = {name: np.full(len(values), np.nan) for name in col_names}
    errors: List[str] = []

    for i, v in enumerate(values):
        kwargs = dict(spec.fixed)
        kwargs[spec.axis] = float(v)
        try:
            params = ChainParams(J=kwargs["J"], gamma=kwargs["gamma"],
                                 D=kwargs["D"])
        except Exception as exc:
            errors.append("%s: %s" % (type(exc).__name__, exc))
            continue
        point, message = _evaluate_point(params, spec.quantities, spec.wrt, quad)
        for name, value in point.items():
            columns[name][i] = value
        errors.append(message)

    return SweepTable(spec=spec, axis_values=values, columns=columns,
                      errors=tuple(errors))


# ---------------------------------------------------------------------------
# figure bundles

GAMMA_SET = (0.2, 0.5, 0.7, 1.0)
D_SET = (0.0, 0.02, 0.1, 0.2, 0.3)
_J_GRID = (-2.0, 2.0, 400)       # misses |J| = 1 by construction
_J_GRID_QFIM = (-2.0, 2.0, 160)
_D_GRID = (-0.4, 0.4, 81)
_J_NEAR_CRITICAL = 0.999
FIGURES = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6")


def _merge(tables: Sequence[Tuple[str, SweepTable]], axis_name: str):
    """Join sweeps sharing an axis into suffixed columns."""
    axis = tables[0][1].axis_values
    columns: Dict[str, np.ndarray] = {}
    errors = ["" for _ in axis]
    for suffix, table in tables:
        if not np.array_equal(table.axis_values, axis):
            raise ValueError("figure sweeps must share the axis grid")
        for name, data in table.columns.items():
            columns["%s_%s" % (name, suffix)] = data
        for i, msg in enumerate(table.errors):
            if msg:
                tagged = "%s: %s" % (suffix, msg)
                errors[i] = (errors[i] + "; " + tagged) if errors[i] else tagged
    return axis, columns, errors


def _figure_tables(name: str, quad: QuadratureConfig):
    if name == "fig1":
        specs = [("g%g" % g, SweepSpec("J", _J_GRID, {"gamma": g, "D": 0.0}))
                 for g in GAMMA_SET]
    elif name == "fig2":
        specs = [("D%g" % d, SweepSpec("J", _J_GRID, {"gamma": 0.7, "D": d}))
                 for d in D_SET]
    elif name == "fig3":
        specs = [("D%g" % d, SweepSpec("J", _J_GRID, {"gamma": 0.2, "D": d}))
                 for d in D_SET]
    elif name == "fig4":
        specs = [("", SweepSpec("D", _D_GRID,
                                {"J": _J_NEAR_CRITICAL, "gamma": 0.2},
                                quantities=("QFIM", "U")))]
    elif name == "fig5":
        specs = [("g%g" % g, SweepSpec("D", _D_GRID,
                                       {"J": _J_NEAR_CRITICAL, "gamma": g},
                                       quantities=("det",)))
                 for g in GAMMA_SET]
    elif name == "fig6":
        specs = [("D%g" % d, SweepSpec("J", _J_GRID_QFIM,
                                       {"gamma": 1.0, "D": d},
                                       quantities=("QFIM", "U", "det")))
                 for d in (0.01, 0.1, 0.2, 0.3)]
    else:
        raise ValueError("unknown figure %r; expected one of %s"
                         % (name, FIGURES))
    tables = [(suffix, sweep(s, quad)) for suffix, s in specs]
    return specs, tables


def figure_bundle(name: str, out_dir: str,
                  quad: QuadratureConfig = DEFAULT_QUAD) -> List[str]:
    """Regenerate one figure's data as CSV plus a JSON manifest."""
    specs, tables = _figure_tables(name, quad)
    if len(tables) == 1 and specs[0][0] == "":
        table = tables[0][1]
        axis_name = table.spec.axis
        axis, columns, errors = table.axis_values, table.columns, table.errors
    else:
        axis_name = tables[0][1].spec.axis
        axis, columns, errors = _merge(tables, axis_name)

    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "%s.csv" % name)
    lines = [",".join([axis_name] + list(columns) + ["error"])]
    for i, v in enumerate(axis):
        cells = ["%.17g" % v] + ["%.17g" % columns[c][i] for c in columns]
        cells.append(errors[i])
        lines.append(",".join(cells))
    with open(csv_path, "w") as fh:
        fh.write("\n".join(lines) + "\n")

    manifest = {
        "figure": name,
        "library_version": __version__,
        "quadrature": {"abs_tol": quad.abs_tol, "rel_tol": quad.rel_tol,
                       "max_subdivisions": quad.max_subdivisions},
        "sweeps": [
            {"suffix": suffix, "spec": s.to_dict()} for suffix, s in specs
        ],
        "columns": [axis_name] + list(columns) + ["error"],
        "rows": len(axis),
    }
    json_path = os.path.join(out_dir, "%s.json" % name)
    with open(json_path, "w") as fh:
        fh.write(json.dumps(manifest, sort_keys=True, indent=1) + "\n")
    return [csv_path, json_path]
