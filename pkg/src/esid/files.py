"""JSON file formats for channels, wiretap pairs and codes, plus atomic writes."""
from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Union

import numpy as np

from .errors import ValidationError
from .probability import Alphabet, Channel, Distribution, WiretapChannel

PathLike = Union[str, os.PathLike]


def _alphabet(symbols: Any, what: str) -> Alphabet:
    if not isinstance(symbols, list) or not symbols:
        raise ValidationError(f"{what} must be a non-empty list of symbols")
    return Alphabet(tuple(str(s) for s in symbols))


def _rows(data: Any) -> np.ndarray:
    try:
        rows = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"rows are not a numeric matrix: {exc}") from None
    if rows.ndim != 2:
        raise ValidationError("rows must be a matrix")
    return rows


def channel_to_dict(w: Channel) -> dict:
    return {"input": list(w.input.symbols), "output": list(w.output.symbols), "rows": w.rows.tolist()}


def channel_from_dict(data: dict) -> Channel:
    if not isinstance(data, dict):
        raise ValidationError("a channel must be a JSON object")
    missing = {"input", "output", "rows"} - set(data)
    if missing:
        raise ValidationError(f"channel is missing {sorted(missing)}")
    return Channel(_alphabet(data["input"], "input"), _alphabet(data["output"], "output"), _rows(data["rows"]))


def wiretap_to_dict(w: WiretapChannel) -> dict:
    return {
        "input": list(w.input.symbols),
        "legit": channel_to_dict(w.legit),
        "eaves": channel_to_dict(w.eaves),
    }


def wiretap_from_dict(data: dict) -> WiretapChannel:
    if not isinstance(data, dict) or "legit" not in data or "eaves" not in data:
        raise ValidationError("a wiretap file needs 'legit' and 'eaves' channels")
    legit = channel_from_dict(data["legit"])
    eaves = channel_from_dict(data["eaves"])
    inp = _alphabet(data["input"], "input") if "input" in data else legit.input
    return WiretapChannel(inp, legit, eaves)


def distribution_to_dict(p: Distribution) -> dict:
    return {"alphabet": list(p.alphabet.symbols), "mass": p.mass.tolist()}


def read_json(path: PathLike) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from None


def load_channel(path: PathLike) -> Channel:
    return channel_from_dict(read_json(path))


def load_wiretap(path: PathLike) -> WiretapChannel:
    return wiretap_from_dict(read_json(path))


def parse_vector(text: str) -> np.ndarray:
    """``"0.5,0.5"`` -> array; the string may also name a JSON file holding a list."""
    if os.path.exists(text):
        data = read_json(text)
        if isinstance(data, dict):
            data = data.get("mass")
        return np.asarray(data, dtype=float)
    try:
        return np.asarray([float(t) for t in text.split(",") if t.strip()], dtype=float)
    except ValueError:
        raise ValidationError(f"cannot parse {text!r} as a comma-separated vector") from None


def write_atomic(path: PathLike, text: str) -> None:
    """Write via a temporary file in the target directory and rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(data: Any) -> str:
    """Strict JSON: non-finite numbers (an empty polytope's residual, say) become null."""
    return json.dumps(_finite(data), indent=2, sort_keys=False, default=_default, allow_nan=False) + "\n"


def _finite(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _finite(obj.tolist())
    if isinstance(obj, (float, np.floating)) and not math.isfinite(obj):
        return None
    return obj


def _default(obj: Any):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")
