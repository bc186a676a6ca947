"""JSON encodings of states, channels, POVM sets and ensembles.

Every matrix uses ``{"rows", "cols", "data": [[re, im], ...]}``.  Objects:

* state:    ``{"type": "state", "matrix": <matrix>}`` (a bare matrix is also accepted)
* channel:  ``{"type": "channel", "dim_in", "dim_out", "choi": <matrix>}``
* povm_set: ``{"type": "povm_set", "dim", "m", "n", "effects": [[<matrix>, ...], ...]}``
* ensemble: ``{"type": "ensemble", "probs": [...], "states": [<matrix>, ...]}``
"""
import json
import math

import numpy as np

from .errors import ConfigurationError, DomainError
from .linalg import matrix_from_json, matrix_to_json
from .objects import Channel, Ensemble, PovmSet, density


def dumps(obj):
    """Deterministic JSON text (sorted keys, fixed indentation, ``inf`` as a string)."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    return x


def state_to_json(rho):
    return {"type": "state", "matrix": matrix_to_json(rho)}


def state_from_json(obj):
    if "matrix" in obj:
        obj = obj["matrix"]
    return density(matrix_from_json(obj))


def channel_to_json(ch):
    return {"type": "channel", "dim_in": ch.dim_in, "dim_out": ch.dim_out, "choi": matrix_to_json(ch.choi)}


def channel_from_json(obj):
    try:
        return Channel(int(obj["dim_in"]), int(obj["dim_out"]), matrix_from_json(obj["choi"]))
    except KeyError as exc:
        raise ConfigurationError(f"channel JSON is missing {exc}") from exc


def povm_set_to_json(ms):
    return {
        "type": "povm_set",
        "dim": ms.dim,
        "m": ms.m,
        "n": ms.n,
        "effects": [[matrix_to_json(E) for E in row] for row in ms.effects],
    }


def povm_set_from_json(obj):
    try:
        E = np.array([[matrix_from_json(M) for M in row] for row in obj["effects"]])
    except KeyError as exc:
        raise ConfigurationError(f"povm_set JSON is missing {exc}") from exc
    ms = PovmSet(E)
    for key, val in (("dim", ms.dim), ("m", ms.m), ("n", ms.n)):
        if key in obj and int(obj[key]) != val:
            raise DomainError(f"povm_set field {key}={obj[key]} does not match the effects ({val})")
    return ms


def ensemble_to_json(ens):
    return {"type": "ensemble", "probs": [float(p) for p in ens.probs], "states": [matrix_to_json(s) for s in ens.states]}


def ensemble_from_json(obj):
    try:
        return Ensemble(np.array(obj["probs"], dtype=float), np.array([matrix_from_json(s) for s in obj["states"]]))
    except KeyError as exc:
        raise ConfigurationError(f"ensemble JSON is missing {exc}") from exc


_LOADERS = {
    "state": state_from_json,
    "channel": channel_from_json,
    "povm_set": povm_set_from_json,
    "povm": povm_set_from_json,
    "ensemble": ensemble_from_json,
}


def object_from_json(obj, kind=None):
    """Decode using ``kind`` (or the object's own ``"type"``; a bare matrix is a state)."""
    if not isinstance(obj, dict):
        raise ConfigurationError("expected a JSON object")
    kind = (kind or obj.get("type") or ("state" if "rows" in obj else None))
    if kind is not None:
        kind = kind.replace("-", "_")
    if kind not in _LOADERS:
        raise ConfigurationError(f"unknown object kind {kind!r}")
    return _LOADERS[kind](obj)


def object_to_json(x):
    if isinstance(x, Channel):
        return channel_to_json(x)
    if isinstance(x, PovmSet):
        return povm_set_to_json(x)
    if isinstance(x, Ensemble):
        return ensemble_to_json(x)
    return state_to_json(x)


def load(path, kind=None):
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: invalid JSON ({exc})") from exc
    return object_from_json(data, kind)
