"""JSON configuration for every command, with field-path error messages.

A scheme spec looks like::

    {"scheme": "I",
     "p_s": [0.8, 0.2],
     "p_u_given_s": [[1, 0], [0, 1]],
     "p_x_given_su": {"rows": [...]},
     "p_yz_given_x": {"y": {"bsc": {"p": 0.0}}, "z": {"bsc": {"p": 0.3}}},
     "phi": [[0, 1], [0, 1]],
     "dist": "hamming"}

Channels are explicit row-major matrices. The only shortcut is the
``{"bsc": {"p": x}}`` expander; a broadcast channel is either explicit rows
with ``output_shape`` or a ``{"y": ..., "z": ...}`` pair of marginals that
are conditionally independent given X.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .infotheory import Channel, DistortionMeasure, JointDist, Pmf, build_joint, mutual_information
from .optimize import SearchConfig, SweepConfig
from .regions import SchemeIISpec, SchemeISpec, SchemeOSpec

MANIFEST_KEY = "manifest_version"


class ConfigError(ValueError):
    """Malformed configuration; the message names the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path or '<root>'}: {message}")


def read_json(path) -> Any:
    """Load a config file; a run manifest is unwrapped to its resolved config."""
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}")
    if isinstance(obj, dict) and MANIFEST_KEY in obj:
        return obj["config"]
    return obj


def _field(obj: dict, key: str, path: str, parse: Callable = lambda v: v, default=...):
    where = f"{path}.{key}" if path else key
    if not isinstance(obj, dict):
        raise ConfigError(path, "expected an object")
    if key not in obj:
        if default is ...:
            raise ConfigError(where, "missing required field")
        return default
    try:
        return parse(obj[key])
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError, IndexError) as exc:
        raise ConfigError(where, str(exc) or type(exc).__name__)


def _optional_int(v):
    return None if v is None else int(v)


def _check_keys(obj: dict, allowed: set, path: str) -> None:
    extra = set(obj) - allowed
    if extra:
        raise ConfigError(path, f"unknown fields {sorted(extra)}")


# ---------------------------------------------------------------- schemes

_SCHEME_FIELDS = {
    "I": ("p_s", "p_u_given_s", "p_x_given_su", "p_yz_given_x", "phi", "dist"),
    "O": ("p_s", "p_shat_given_s", "p_u1_given_shat", "p_u2", "p_v2_given_u2",
          "p_x_given_v2", "p_yz_given_x", "dist"),
    "II": ("p_s", "p_v_given_s", "p_u_given_v", "p_x_given_suv", "p_yz_given_x", "phi", "dist"),
}
_SPEC_TYPES = {"I": SchemeISpec, "O": SchemeOSpec, "II": SchemeIISpec}


def _parse_field(name: str, value):
    if name in ("p_s", "p_u2"):
        return Pmf.from_json(value)
    if name == "dist":
        return DistortionMeasure.from_json(value)
    if name == "phi":
        return np.asarray(value, dtype=np.int64)
    return Channel.from_json(value)


def parse_scheme_spec(obj: dict, path: str = ""):
    scheme = _field(obj, "scheme", path, str)
    if scheme not in _SCHEME_FIELDS:
        raise ConfigError(f"{path}.scheme" if path else "scheme",
                          f"expected one of {sorted(_SCHEME_FIELDS)}, got {scheme!r}")
    names = _SCHEME_FIELDS[scheme]
    _check_keys(obj, {"scheme", "eps_rate", *names}, path)
    kwargs = {n: _field(obj, n, path, lambda v, n=n: _parse_field(n, v)) for n in names}
    try:
        return _SPEC_TYPES[scheme](**kwargs)
    except ValueError as exc:
        raise ConfigError(path, str(exc))


def _phi_json(phi: np.ndarray) -> list:
    return np.asarray(phi).tolist()


def spec_to_json(spec) -> dict:
    for scheme, cls in _SPEC_TYPES.items():
        if isinstance(spec, cls):
            break
    else:
        raise TypeError(f"not a scheme spec: {type(spec).__name__}")
    out: dict = {"scheme": scheme}
    for name in _SCHEME_FIELDS[scheme]:
        value = getattr(spec, name)
        out[name] = _phi_json(value) if name == "phi" else value.to_json()
    return out


# ---------------------------------------------------------------- commands


def parse_region_eval(obj: dict) -> tuple:
    spec = parse_scheme_spec(obj)
    eps = _field(obj, "eps_rate", "", float, 0.0)
    return spec, eps


@dataclass
class OptimizeJob:
    search: SearchConfig
    p_s: Pmf
    p_yz_given_x: Channel
    dist: DistortionMeasure


def _dataclass_field(obj, key, path, cls, default=...):
    def parse(v):
        if not isinstance(v, dict):
            raise ValueError("expected an object")
        try:
            return cls.from_json(v)
        except TypeError as exc:
            raise ValueError(str(exc))
    return _field(obj, key, path, parse, default)


def parse_optimize(obj: dict) -> OptimizeJob:
    _check_keys(obj, {"search", "p_s", "p_yz_given_x", "dist"}, "")
    return OptimizeJob(
        search=_dataclass_field(obj, "search", "", SearchConfig),
        p_s=_field(obj, "p_s", "", Pmf.from_json),
        p_yz_given_x=_field(obj, "p_yz_given_x", "", Channel.from_json),
        dist=_field(obj, "dist", "", DistortionMeasure.from_json, DistortionMeasure.hamming(2)),
    )


@dataclass
class SweepJob:
    sweep: SweepConfig
    scheme_i: SearchConfig
    scheme_o: SearchConfig


def parse_sweep(obj: dict) -> SweepJob:
    _check_keys(obj, {"sweep", "scheme_i", "scheme_o"}, "")
    return SweepJob(
        sweep=_dataclass_field(obj, "sweep", "", SweepConfig),
        scheme_i=_dataclass_field(obj, "scheme_i", "", SearchConfig, SearchConfig(scheme="I")),
        scheme_o=_dataclass_field(obj, "scheme_o", "", SearchConfig, SearchConfig(scheme="O")),
    )


_SIM_KEYS = {"spec", "n", "rate_r", "trials", "codebook_redraws", "seed", "budget"}


def parse_simulate(obj: dict) -> dict:
    """Keyword arguments for SimulationConfig, so callers can override before validation."""
    _check_keys(obj, _SIM_KEYS, "")
    spec = _field(obj, "spec", "", lambda v: parse_scheme_spec(v, "spec"))
    if not isinstance(spec, SchemeISpec):
        raise ConfigError("spec.scheme", "simulation supports scheme I only")
    return dict(
        spec=spec,
        n=_field(obj, "n", "", int),
        rate_r=_field(obj, "rate_r", "", float),
        trials=_field(obj, "trials", "", int, 100),
        codebook_redraws=_field(obj, "codebook_redraws", "", int, 1),
        seed=_field(obj, "seed", "", int, 0),
        budget=_field(obj, "budget", "", _optional_int, None),
    )


@dataclass
class SoftcoverJob:
    p_uxz: JointDist
    rates: list
    n_values: list
    k_fraction: float
    codebook_samples: int
    seed: int
    budget: int | None


def _parse_uxz(v) -> JointDist:
    if isinstance(v, dict) and "mass" in v:
        return JointDist.from_json(v)
    if not isinstance(v, dict):
        raise ValueError("expected an object with mass or p_u/x_given_u/z_given_ux")
    return build_joint(
        [
            (Pmf.from_json(v["p_u"]), ()),
            (Channel.from_json(v["x_given_u"]), (0,)),
            (Channel.from_json(v["z_given_ux"]), (0, 1)),
        ],
        ["U", "X", "Z"],
    )


def parse_softcover(obj: dict) -> SoftcoverJob:
    _check_keys(obj, {"p_uxz", "rates", "rate_offsets", "n_values", "k_fraction",
                      "codebook_samples", "seed", "budget"}, "")
    joint = _field(obj, "p_uxz", "", _parse_uxz)
    if joint.mass.ndim != 3:
        raise ConfigError("p_uxz", "expected a joint over exactly (U, X, Z)")
    rates = [float(r) for r in _field(obj, "rates", "", list, [])]
    offsets = _field(obj, "rate_offsets", "", list, [])
    if offsets:
        mi = mutual_information(joint, 0, 1)
        rates += [mi + float(o) for o in offsets]
    if not rates:
        raise ConfigError("rates", "give rates or rate_offsets")
    k_fraction = _field(obj, "k_fraction", "", float, 0.25)
    if not 0 <= k_fraction <= 1:
        raise ConfigError("k_fraction", "must lie in [0, 1]")
    return SoftcoverJob(
        p_uxz=joint,
        rates=rates,
        n_values=[int(n) for n in _field(obj, "n_values", "", list)],
        k_fraction=k_fraction,
        codebook_samples=_field(obj, "codebook_samples", "", int, 200),
        seed=_field(obj, "seed", "", int, 0),
        budget=_field(obj, "budget", "", _optional_int, None),
    )
