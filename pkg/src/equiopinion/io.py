"""File formats: states (CSV/JSON), model files, scenarios, plot data and a
small SVG line-chart writer."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Sequence

import jsonschema
import numpy as np

from .constants import SCHEMA_VERSION
from .dynamics import HomogeneousModel, ModelParams, Model, TensorModel, perturb
from .errors import DimensionMismatch, SchemaError
from .state import DeviationState, OpinionState


# --------------------------------------------------------------------------- states


def write_state_csv(x, path) -> None:
    values = np.asarray(x.values if hasattr(x, "values") else x, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["agent"] + [f"opt{j}" for j in range(1, values.shape[1] + 1)])
        for i, row in enumerate(values, start=1):
            w.writerow([i] + [repr(float(v)) for v in row])


def read_state_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "agent":
        raise SchemaError("state CSV must start with an 'agent,opt1,...' header")
    expected = ["agent"] + [f"opt{j}" for j in range(1, len(rows[0]))]
    if rows[0] != expected:
        raise SchemaError(f"unexpected header {rows[0]}")
    body = rows[1:]
    if [int(r[0]) for r in body] != list(range(1, len(body) + 1)):
        raise SchemaError("agent column must count 1, 2, ...")
    try:
        return np.array([[float(v) for v in r[1:]] for r in body])
    except ValueError as exc:
        raise SchemaError(str(exc)) from None


def state_to_json(x) -> dict:
    values = np.asarray(x.values if hasattr(x, "values") else x, dtype=float)
    return {"na": values.shape[0], "no": values.shape[1], "values": values.tolist()}


def state_from_json(obj: dict, deviation: bool = False):
    """Rebuild an :class:`OpinionState` (or :class:`DeviationState`)."""
    try:
        values = np.asarray(obj["values"], dtype=float)
        na, no = int(obj["na"]), int(obj["no"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad state object: {exc}") from None
    if values.shape != (na, no):
        raise DimensionMismatch(f"values have shape {values.shape}, header says ({na}, {no})")
    return DeviationState(values) if deviation else OpinionState(values)


# --------------------------------------------------------------------------- models

_NUMBER = {"type": "number"}
_MATRIX = {"type": "array", "items": {"type": "array", "items": _NUMBER}}

MODEL_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["na", "no", "alpha", "beta", "gamma", "delta"],
    "properties": {
        "na": {"type": "integer", "minimum": 1},
        "no": {"type": "integer", "minimum": 2},
        "alpha": _NUMBER, "beta": _NUMBER, "gamma": _NUMBER, "delta": _NUMBER,
        "lambda": _NUMBER,
        "k_hto": _NUMBER,
        "bias": {"oneOf": [_NUMBER, _MATRIX]},
        "tensor": {"type": "array"},
        "perturb": {
            "type": "object",
            "additionalProperties": False,
            "required": ["epsilon", "seed"],
            "properties": {"epsilon": {"type": "number", "minimum": 0}, "seed": {"type": "integer"}},
        },
    },
}


def _validate(obj: Any, schema: dict, what: str) -> None:
    try:
        jsonschema.validate(obj, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"{what}: {where}: {exc.message}") from None


def model_from_json(obj: dict, epsilon: Optional[float] = None, seed: Optional[int] = None) -> Model:
    """Build a model from its JSON description, applying ``perturb`` if present.

    ``epsilon`` and ``seed`` override the file's perturbation settings.
    """
    _validate(obj, MODEL_SCHEMA, "model")
    na, no = obj["na"], obj["no"]
    params = ModelParams(obj["alpha"], obj["beta"], obj["gamma"], obj["delta"],
                         obj.get("lambda", 0.0), obj.get("k_hto", ModelParams.k_hto))
    bias = obj.get("bias")
    if bias is not None and not np.isscalar(bias) and np.shape(bias) != (na, no):
        raise DimensionMismatch(f"bias has shape {np.shape(bias)}, expected ({na}, {no})")
    if "tensor" in obj:
        tensor = np.asarray(obj["tensor"], dtype=float)
        if tensor.shape != (na, na, no, no):
            raise DimensionMismatch(f"tensor has shape {tensor.shape}, expected {(na, na, no, no)}")
        model: Model = TensorModel(tensor, bias, params.lam, params.k_hto, nominal=params)
    else:
        model = HomogeneousModel(na, no, params, bias)
    spec = obj.get("perturb", {})
    eps = spec.get("epsilon", 0.0) if epsilon is None else epsilon
    pseed = spec.get("seed", 0) if seed is None else seed
    if eps > 0:
        model = perturb(model, eps, pseed)
    return model


def model_to_json(model: Model, perturbation: Optional[dict] = None) -> dict:
    if isinstance(model, HomogeneousModel):
        p = model.params
        out = {"na": model.na, "no": model.no}
    else:
        if model.nominal is None:
            raise ValueError("tensor models need nominal gains to be written as model files")
        p = model.nominal
        out = {"na": model.na, "no": model.no}
    out.update({"alpha": p.alpha, "beta": p.beta, "gamma": p.gamma, "delta": p.delta,
                "lambda": model.lam, "k_hto": model.k_hto})
    if np.any(model.bias):
        out["bias"] = model.bias.tolist()
    if isinstance(model, TensorModel):
        out["tensor"] = model.tensor.tolist()
    if perturbation:
        out["perturb"] = dict(perturbation)
    return out


# --------------------------------------------------------------------------- scenarios

SCENARIO_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["model"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "description": {"type": "string"},
        "model": MODEL_SCHEMA,
        "seed": {"type": "integer"},
        "output_dir": {"type": "string"},
        "analysis": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "equivariance_samples": {"type": "integer", "minimum": 1},
                "fd_step": {"type": "number", "exclusiveMinimum": 0},
                "numeric_check": {"type": "boolean"},
            },
        },
        "simulation": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dt": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "t_max": {"type": "number", "exclusiveMinimum": 0},
                "steady_tol": {"type": "number", "exclusiveMinimum": 0},
                "init_scale": {"type": "number", "minimum": 0},
                "divergence_bound": {"type": "number", "exclusiveMinimum": 0},
                "record_every": {"type": "number", "exclusiveMinimum": 0},
                "theta": {"type": "number", "minimum": 0},
                "initial_state": _MATRIX,
                "csv_stride": {"type": "integer", "minimum": 1},
            },
        },
        "ramp": {
            "type": "object",
            "additionalProperties": False,
            "required": ["lambda_knots"],
            "properties": {
                "lambda_knots": {"type": "array", "minItems": 1,
                                 "items": {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2}},
                "delta_knots": {"type": "array", "minItems": 1,
                                "items": {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2}},
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "lambdas": {"type": "array", "items": _NUMBER, "minItems": 1},
                "start": _NUMBER, "stop": _NUMBER,
                "num": {"type": "integer", "minimum": 1},
                "n_random": {"type": "integer", "minimum": 0},
            },
        },
        "axials": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"mode": {"enum": ["consensus", "dissensus"]}},
        },
    },
}


@dataclass(frozen=True)
class Scenario:
    raw: dict
    path: Optional[Path] = None

    @classmethod
    def from_dict(cls, obj: dict, path: Optional[Path] = None) -> "Scenario":
        _validate(obj, SCENARIO_SCHEMA, "scenario")
        sweep = obj.get("sweep", {})
        if "lambdas" in sweep and any(k in sweep for k in ("start", "stop", "num")):
            raise SchemaError("scenario: sweep: give either 'lambdas' or 'start/stop/num', not both")
        if any(k in sweep for k in ("start", "stop", "num")) and not all(k in sweep for k in ("start", "stop", "num")):
            raise SchemaError("scenario: sweep: 'start', 'stop' and 'num' go together")
        return cls(obj, path)

    @classmethod
    def load(cls, path) -> "Scenario":
        path = Path(path)
        try:
            obj = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON: {exc}") from None
        return cls.from_dict(obj, path)

    def section(self, name: str) -> dict:
        return dict(self.raw.get(name, {}))

    @property
    def seed(self) -> int:
        return int(self.raw.get("seed", 0))

    @property
    def model_spec(self) -> dict:
        return dict(self.raw["model"])

    def sweep_lambdas(self) -> list[float]:
        sweep = self.section("sweep")
        if "lambdas" in sweep:
            return [float(x) for x in sweep["lambdas"]]
        if "num" in sweep:
            return np.linspace(sweep["start"], sweep["stop"], sweep["num"]).tolist()
        raise SchemaError("scenario: sweep grid missing")


# --------------------------------------------------------------------------- output helpers


def dump_json(obj: dict, path) -> None:
    """Deterministic JSON (sorted keys, fixed indentation, trailing newline)."""
    if "schema_version" not in obj:
        obj = {"schema_version": SCHEMA_VERSION, **obj}
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def write_plot_data(path, columns: dict[str, Sequence[float]]) -> None:
    """Whitespace-separated columns with a '#' header line (gnuplot layout)."""
    names = list(columns)
    data = np.column_stack([np.asarray(columns[n], dtype=float) for n in names])
    with open(path, "w") as fh:
        fh.write("# " + " ".join(names) + "\n")
        for row in data:
            fh.write(" ".join(f"{v:.10g}" for v in row) + "\n")


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def write_svg_lines(path, x: Sequence[float], series: dict[str, Sequence[float]], title: str = "",
                    xlabel: str = "", width: int = 640, height: int = 360) -> None:
    """Minimal line chart: axes box, min/max tick labels, one polyline per series."""
    x = np.asarray(x, dtype=float)
    ys = {k: np.asarray(v, dtype=float) for k, v in series.items()}
    left, right, top, bottom = 60, 20, 30, 40
    pw, ph = width - left - right, height - top - bottom
    x0, x1 = float(x.min()), float(x.max())
    allv = np.concatenate(list(ys.values())) if ys else np.zeros(1)
    y0, y1 = float(allv.min()), float(allv.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def px(v):
        return left + (v - x0) / (x1 - x0) * pw

    def py(v):
        return top + ph - (v - y0) / (y1 - y0) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#000"/>',
        f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="13">{_escape(title)}</text>',
        f'<text x="{width / 2:.1f}" y="{height - 6}" text-anchor="middle" font-size="11">{_escape(xlabel)}</text>',
        f'<text x="{left}" y="{top + ph + 14}" text-anchor="middle" font-size="10">{x0:.4g}</text>',
        f'<text x="{left + pw}" y="{top + ph + 14}" text-anchor="middle" font-size="10">{x1:.4g}</text>',
        f'<text x="{left - 4}" y="{top + ph}" text-anchor="end" font-size="10">{y0:.4g}</text>',
        f'<text x="{left - 4}" y="{top + 8}" text-anchor="end" font-size="10">{y1:.4g}</text>',
    ]
    for n, (name, y) in enumerate(ys.items()):
        color = _PALETTE[n % len(_PALETTE)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"/>')
        parts.append(f'<text x="{left + 8}" y="{top + 14 + 13 * n}" font-size="11" fill="{color}">'
                     f'{_escape(name)}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
