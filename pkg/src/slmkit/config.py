"""Run configuration: nested JSON documents merged over explicit defaults."""

from __future__ import annotations

import copy
import json
from pathlib import Path

from .errors import ConfigError
from .experiment import ExperimentConfig, config_echo
from .rbf import RandomSpec
from .vanderpol import VdpConfig

# Sub-documents replaced wholesale; their keys depend on the distribution kind.
_OPAQUE = {"center_dist", "width_dist", "init_dist"}
_INT_KEYS = {"h_slm", "h_elm", "repetitions", "base_seed", "seed", "steps", "n_trajectories"}


def defaults() -> dict:
    return config_echo(ExperimentConfig())


def _merge(base: dict, update: dict, path: str) -> dict:
    if not isinstance(update, dict):
        raise ConfigError(f"{path or 'config'} must be a mapping")
    out = copy.deepcopy(base)
    for key, val in update.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(base[key], dict) and key not in _OPAQUE:
            out[key] = _merge(base[key], val, where)
        else:
            out[key] = val
    return out


def merge(base: dict, update: dict) -> dict:
    """Overlay `update` on `base`, rejecting keys `base` does not have."""
    return _merge(base, update, "")


def load(path=None) -> dict:
    """Defaults, overlaid with the JSON document at `path` if given."""
    cfg = defaults()
    if path is None:
        return cfg
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return merge(cfg, doc)


def set_path(cfg: dict, dotted: str, value) -> dict:
    """Return a copy of `cfg` with ``a.b.c`` set to `value` (keys must exist)."""
    update: dict = {}
    node = update
    parts = dotted.split(".")
    for p in parts[:-1]:
        node[p] = {}
        node = node[p]
    node[parts[-1]] = value
    return merge(cfg, update)


def parse_assignment(text: str):
    """``key.path=value`` with a JSON value; bare words are taken as strings."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key.path=value")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def _check_ints(d: dict, path=""):
    for k, v in d.items():
        where = f"{path}.{k}" if path else k
        if isinstance(v, dict) and k not in _OPAQUE:
            _check_ints(v, where)
        elif k in _INT_KEYS:
            if isinstance(v, bool) or not isinstance(v, int):
                raise ConfigError(f"{where} must be an integer, got {v!r}")


def build(cfg: dict) -> ExperimentConfig:
    """Validate a resolved config document and construct the typed config."""
    _check_ints(cfg)
    try:
        exp = cfg["experiment"]
        return ExperimentConfig(
            model_kind=exp["model_kind"],
            h_slm=exp["h_slm"],
            h_elm=exp["h_elm"],
            random_spec=RandomSpec.from_dict(cfg["random_spec"]),
            vdp=VdpConfig.from_dict(cfg["vdp"]),
            repetitions=exp["repetitions"],
            rank_tol=None if exp["rank_tol"] is None else float(exp["rank_tol"]),
            base_seed=exp["base_seed"],
            ridge=float(exp["ridge"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid config: {exc}") from None
