"""Model files, PIE files and the registry of bundled example models.

A model file is a JSON object::

    {
      "name": "heat",
      "domain": [0, 1],
      "n": [0, 0, 1],
      "ode": {"A": [[-1]], ...},
      "bc":  {"B": [[1, 0, 0, 0], [0, 0, 0, 1]]},
      "pde": {"A0": [["0", "0", "1"]]},
      "signals": {"w": ["sin(t)"], "w_dot": ["cos(t)"]},
      "simulation": {"dt": 0.001, "t_end": 1, "M": 32, "xf0": ["-sin(pi*s)"]},
      "reference": {"B_T": [[...]]}
    }

Matrix entries are numbers, fraction strings such as ``"1/2"`` or polynomial
expressions in ``s`` and ``th``.  Omitted matrices default to zeros.
"""
from __future__ import annotations

import json
import re
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .converter import PieSystem
from .gpde import BC_FIELDS, ODE_FIELDS, PDE_FIELDS, SIGNALS, ContinuityVector, GpdeModel
from .polyalg import PolyMat, PolyParseError
from .simulate import SignalSpec, SimConfig

__all__ = ["ModelFileError", "load", "load_model", "load_builtin", "builtin_ids", "save_model",
           "save_pie", "load_pie", "model_to_json", "parse_model", "parse_run_sections",
           "run_sections", "read_json", "is_pie_data", "resolve"]

TOP_KEYS = {"name", "description", "domain", "n", "ode", "bc", "pde", "dims", "signals",
            "simulation", "reference", "feedback"}
SIGNAL_KEYS = {"w", "w_dot", "u", "u_dot"}
SIM_KEYS = {"dt", "t_end", "M", "stride", "x0", "xf0", "primal0"}
FEEDBACK_KEYS = {"K_x", "k_xf"}
PIE_FORMAT = "pieforge-pie/1"


class ModelFileError(ValueError):
    """Malformed model file; ``location`` names the offending key and line."""

    def __init__(self, message, location=""):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location


def _line_of(text: str, key: str) -> str:
    if not text:
        return ""
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    if not m:
        return ""
    return f" (line {text.count(chr(10), 0, m.start()) + 1})"


def _matrix(raw, where, text):
    if isinstance(raw, (int, Fraction, str)) or (isinstance(raw, float)):
        raw = [[raw]]
    if not isinstance(raw, list) or any(not isinstance(r, list) for r in raw):
        raise ModelFileError("matrix must be a list of rows", where + _line_of(text, where.split(".")[-1]))
    try:
        return PolyMat([[_entry(e) for e in row] for row in raw])
    except (PolyParseError, ValueError, TypeError) as exc:
        raise ModelFileError(str(exc), where + _line_of(text, where.split(".")[-1])) from exc


def _entry(e):
    if isinstance(e, str):
        from .polyalg import parse_poly

        return parse_poly(e)
    return e


def parse_model(data: dict, text: str = "", source: str = "") -> tuple:
    """Build ``(model, sim_config, signals, feedback)`` from a decoded model file."""
    if not isinstance(data, dict):
        raise ModelFileError("model file must contain a JSON object", source)
    unknown = set(data) - TOP_KEYS
    if unknown:
        key = sorted(unknown)[0]
        raise ModelFileError(f"unknown key {key!r}", f"{source}{_line_of(text, key)}")
    if "n" not in data:
        raise ModelFileError("missing continuity vector 'n'", source)
    dom = data.get("domain", [0, 1])
    try:
        cv = ContinuityVector(tuple(data["n"]), Fraction(str(dom[0])), Fraction(str(dom[1])))
    except (ValueError, TypeError, IndexError) as exc:
        raise ModelFileError(str(exc), f"{source}: n/domain") from exc
    fields = {}
    for section, allowed in (("ode", ODE_FIELDS), ("bc", BC_FIELDS), ("pde", PDE_FIELDS)):
        sec = data.get(section, {}) or {}
        if not isinstance(sec, dict):
            raise ModelFileError("section must be an object", f"{source}: {section}")
        for key, raw in sec.items():
            if raw is None or raw == []:
                continue
            if key not in allowed:
                raise ModelFileError(f"unknown {section} field {key!r}", f"{source}: {section}.{key}{_line_of(text, key)}")
            fields[key] = _matrix(raw, f"{section}.{key}", text)
    dims = data.get("dims")
    if dims is not None:
        bad = set(dims) - set(SIGNALS) - {"bc"}
        if bad:
            raise ModelFileError(f"unknown signal names {sorted(bad)}", f"{source}: dims")
    model = GpdeModel.build(cv, name=data.get("name", Path(source).stem if source else ""),
                            reference=data.get("reference", {}), dims=dims, **fields)
    return (model,) + parse_run_sections(data, source)


def parse_run_sections(data: dict, source: str = "") -> tuple:
    """``(sim_config, signals, feedback)`` from the run-time sections of a file.

    Both model files and PIE files written by :func:`save_pie` may carry
    ``simulation``, ``signals`` and ``feedback`` sections.
    """
    sim = data.get("simulation", {}) or {}
    bad = set(sim) - SIM_KEYS
    if bad:
        raise ModelFileError(f"unknown simulation key {sorted(bad)[0]!r}", f"{source}: simulation")
    try:
        cfg = SimConfig(**{k: (float(v) if k in ("dt", "t_end") else _plain(v)) for k, v in sim.items()})
    except (TypeError, ValueError) as exc:
        raise ModelFileError(str(exc), f"{source}: simulation") from exc
    sig = data.get("signals", {}) or {}
    bad = set(sig) - SIGNAL_KEYS
    if bad:
        raise ModelFileError(f"unknown signal key {sorted(bad)[0]!r}", f"{source}: signals")
    signals = {}
    for name in ("w", "u"):
        if name in sig:
            signals[name] = SignalSpec(_plain(sig[name]), _plain(sig.get(name + "_dot")))
    fb = data.get("feedback")
    if fb is not None:
        bad = set(fb) - FEEDBACK_KEYS
        if bad:
            raise ModelFileError(f"unknown feedback key {sorted(bad)[0]!r}", f"{source}: feedback")
        fb = {k: _plain(v) for k, v in fb.items()}
    return cfg, signals, fb


def run_sections(data: dict) -> dict:
    """The raw ``simulation``/``signals``/``feedback`` sections, JSON-ready."""
    return {k: _plain(data[k]) for k in ("simulation", "signals", "feedback") if data.get(k)}


def _plain(v):
    # JSON floats are decoded as fractions; signals want floats
    if isinstance(v, Fraction):
        return float(v)
    if isinstance(v, list):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    return v


def _decode(text: str, source: str):
    try:
        return json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise ModelFileError(exc.msg, f"{source} (line {exc.lineno}, column {exc.colno})") from exc


def load(path) -> tuple:
    """Load a model file: ``(model, sim_config, signals, feedback)``."""
    text = Path(path).read_text()
    return parse_model(_decode(text, str(path)), text, str(path))


def load_model(path) -> GpdeModel:
    return load(path)[0]


def _models_dir():
    return resources.files("pieforge") / "models"


def builtin_ids() -> list:
    return sorted(p.name[:-5] for p in _models_dir().iterdir() if p.name.endswith(".json"))


def builtin_path(name: str):
    p = _models_dir() / f"{name}.json"
    if not p.is_file():
        raise ModelFileError(f"no builtin model {name!r}; available: {', '.join(builtin_ids())}")
    return p


def load_builtin(name: str, full: bool = False):
    p = builtin_path(name)
    text = p.read_text()
    out = parse_model(_decode(text, f"{name}.json"), text, f"{name}.json")
    return out if full else out[0]


def resolve(spec):
    """Load a path, or a builtin id when no such file exists."""
    if Path(str(spec)).exists():
        return load(spec)
    return load_builtin(str(spec), full=True)


def resolve_raw(spec) -> dict:
    """Decoded JSON of a model path or builtin id."""
    p = Path(str(spec))
    return read_json(p if p.exists() else builtin_path(str(spec)))


# ----------------------------------------------------------------- writing
def _mat_json(m: PolyMat):
    return m.to_strings()


def model_to_json(model: GpdeModel, extra: dict = None) -> dict:
    """Serialize a model with every matrix written as expression strings."""
    out = {"name": model.name, "domain": [str(model.n.a), str(model.n.b)], "n": list(model.n.n)}
    for section, names in (("ode", ODE_FIELDS), ("bc", BC_FIELDS), ("pde", PDE_FIELDS)):
        sec = {k: _mat_json(model.params[k]) for k in names if not model.params[k].is_zero}
        if section == "bc" and "B" not in sec:
            sec["B"] = _mat_json(model.params["B"])
        out[section] = sec
    out["dims"] = {k: v for k, v in model.dims.items()}
    if model.reference:
        out["reference"] = model.reference
    if extra:
        out.update(extra)
    return out


def save_model(model: GpdeModel, path, extra: dict = None) -> None:
    Path(path).write_text(json.dumps(model_to_json(model, extra), indent=2, default=str) + "\n")


def save_pie(pie: PieSystem, path, extra: dict = None) -> None:
    Path(path).write_text(json.dumps(pie.to_json(extra), indent=2, default=str) + "\n")


def read_json(path):
    """Decode a JSON file with floats read as exact fractions."""
    return _decode(Path(path).read_text(), str(path))


def is_pie_data(data) -> bool:
    return isinstance(data, dict) and data.get("format") == PIE_FORMAT


def load_pie(path, full: bool = False):
    """Read a PIE file.  With ``full=True`` also return its run sections as
    ``(pie, sim_config, signals, feedback)``."""
    data = read_json(path)
    if not is_pie_data(data):
        raise ModelFileError("not a PIE file (missing format tag)", str(path))
    try:
        pie = PieSystem.from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFileError(f"malformed PIE file: {exc}", str(path)) from exc
    return (pie,) + parse_run_sections(data, str(path)) if full else pie
