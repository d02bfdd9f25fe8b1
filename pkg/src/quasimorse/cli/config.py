"""Experiment configuration: loading, dotted-key expansion, schema validation, defaults."""
from __future__ import annotations

import copy
import json
from pathlib import Path

import jsonschema

from ..errors import ConfigError
from ..functionals.explicit import FIXTURES
from ..functionals.nonlinearity import FACTORIES

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_int1 = {"type": "integer", "minimum": 1}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


SCHEMA = _obj(
    {
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "output": {"type": "string"},
        "backend": {"enum": ["galerkin", "explicit"]},
        "explicit": _obj({"name": {"enum": sorted(FIXTURES) + ["truncated_sequence"]}, "order": _int1}, ["name"]),
        "psi": _obj({
            "kind": {"enum": ["area-kappa", "p-power-plus-quadratic"]},
            "p": _num,
            "kappa": _pos,
            "mu1": _pos,
            "mu2": _pos,
        }, ["p"]),
        "g": _obj({"kind": {"enum": sorted(FACTORIES)}, "params": {"type": "object"}}, ["kind"]),
        "mesh": _obj({
            "dim": {"enum": [1, 2]},
            "domain": {"type": "array", "items": _num, "minItems": 2, "maxItems": 4},
            "resolution": {"oneOf": [_int1, {"type": "array", "items": _int1, "minItems": 2, "maxItems": 2}]},
        }),
        "quadrature": _obj({"order": {"type": "integer", "minimum": 1, "maximum": 12}}),
        "solver": _obj({
            "tol": _pos,
            "max_iter": _int1,
            "seed_grid": _obj({
                "amplitudes": {"type": "array", "items": _num},
                "modes": _int1,
                "lo": _num,
                "hi": _num,
                "n": _int1,
            }),
        }),
        "spectral": _obj({"zero_tol": {"oneOf": [_pos, {"type": "null"}]}, "rel_tol": _pos, "window": _pos}),
        "nondeg": _obj({
            "samples": _int1,
            "delta": {"oneOf": [_pos, {"type": "null"}]},
            "max_halvings": {"type": "integer", "minimum": 0},
        }),
        "flow": _obj({
            "enabled": {"type": "boolean"},
            "profile": {"enum": ["smoothstep", "cinf"]},
            "n_shoot": {"type": "integer", "minimum": 3},
            "pairs": {"oneOf": [{"const": "all"},
                                {"type": "array", "items": {"type": "array", "items": {"type": "integer"},
                                                            "minItems": 2, "maxItems": 2}}]},
            "sphere_radius": {"oneOf": [_pos, {"type": "null"}]},
            "horizon": _pos,
            "tol": _pos,
            "band": {"oneOf": [{"type": "null"}, {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}]},
            "r0": {"oneOf": [_pos, {"type": "null"}]},
            "epsilon_samples": _int1,
            "containment_starts": {"type": "integer", "minimum": 0},
            "perturb": {"type": "boolean"},
        }),
        "homology": _obj({"P": _obj({"kind": {"enum": ["empty", "sublevel"]}, "a": _num}, ["kind"])}),
        "cerami": _obj({"length": {"oneOf": [_pos, {"type": "null"}]}, "k_max": _int1}),
    },
    required=["seed"],
)

DEFAULTS = {
    "output": "out",
    "backend": "galerkin",
    "psi": {"kind": "area-kappa", "kappa": 1.0},
    "g": {"kind": "zero", "params": {}},
    "mesh": {"dim": 1, "domain": [0.0, 1.0], "resolution": 32},
    "quadrature": {"order": 4},
    "solver": {"tol": 1e-10, "max_iter": 100, "seed_grid": {}},
    "spectral": {"zero_tol": None, "rel_tol": 1e-6, "window": 0.1},
    "nondeg": {"samples": 1000, "delta": None, "max_halvings": 10},
    "flow": {"enabled": True, "profile": "smoothstep", "n_shoot": 16, "pairs": "all", "sphere_radius": None,
             "horizon": 1e3, "tol": 1e-6, "band": None, "r0": None, "epsilon_samples": 4000,
             "containment_starts": 8, "perturb": True},
    "homology": {"P": {"kind": "empty"}},
    "cerami": {"length": None, "k_max": 5},
}


def expand_dotted(raw):
    """Turn {"psi.p": 3} into {"psi": {"p": 3}}; nested and dotted keys may be mixed."""
    out = {}
    for key, value in raw.items():
        if isinstance(value, dict):
            value = expand_dotted(value)
        parts = key.split(".")
        node = out
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError("conflicting keys", key)
        leaf = parts[-1]
        if isinstance(value, dict) and isinstance(node.get(leaf), dict):
            node[leaf] = _merge(node[leaf], value)
        else:
            node[leaf] = value
    return out


def _merge(base, extra):
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k != "params":
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _path(err):
    return ".".join(str(p) for p in err.absolute_path) or "<root>"


def validate(cfg):
    p = cfg.get("psi", {}).get("p")
    if isinstance(p, (int, float)) and not isinstance(p, bool) and not p > 2:
        raise ConfigError(f"p must satisfy p > 2 (standing hypothesis), got {p}", "psi.p")
    errors = sorted(jsonschema.Draft202012Validator(SCHEMA).iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        if err.validator == "additionalProperties":
            extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
            path = ".".join([str(x) for x in err.absolute_path] + [extra[0]]) if extra else _path(err)
            raise ConfigError("unknown key", path)
        if err.validator == "required":
            raise ConfigError(err.message, _path(err))
        raise ConfigError(err.message, _path(err))
    if cfg.get("backend") == "explicit" and "explicit" not in cfg:
        raise ConfigError("explicit backend needs an 'explicit' block", "explicit")
    dim = cfg.get("mesh", {}).get("dim", 1)
    dom = cfg.get("mesh", {}).get("domain")
    if dom is not None and len(dom) != 2 * dim:
        raise ConfigError(f"domain needs {2 * dim} numbers for dim={dim}", "mesh.domain")


def normalize(raw, seed=None, output=None):
    """Validated config with defaults filled in; CLI overrides applied first."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    cfg = expand_dotted(raw)
    if seed is not None:
        cfg["seed"] = int(seed)
    if output is not None:
        cfg["output"] = str(output)
    if "backend" not in cfg and "explicit" in cfg:
        cfg["backend"] = "explicit"
    validate(cfg)
    full = _merge(DEFAULTS, cfg)
    if full["backend"] == "galerkin" and "p" not in full["psi"]:
        raise ConfigError("required for the galerkin backend", "psi.p")
    return full


def read_raw(path):
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError("file not found", str(path)) from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON ({exc.msg} at line {exc.lineno})", str(path)) from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object", str(path))
    return raw


def load(path, seed=None, output=None):
    return normalize(read_raw(path), seed, output)
