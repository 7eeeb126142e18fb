"""Model files: one JSON document per trained model.

Floats are written with ``repr`` precision, so a save/load cycle reproduces
every parameter bit for bit. Matrices are nested row-major lists.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import InputError
from .models import ElmParams, SlmParams, predict_elm, predict_slm
from .rbf import RbfBank
from .vanderpol import vdp_step

FORMAT = "slmkit-model"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class ExactVdp:
    """Stand-in model that applies the true Euler step; useful as a reference."""

    lam: float
    dt: float

    def __call__(self, x):
        return vdp_step(x, self.lam, self.dt)


def evaluator(model):
    """Batch predictor (N, n) -> (N, m) for any loadable model."""
    if isinstance(model, SlmParams):
        return lambda x: predict_slm(model, x)
    if isinstance(model, ElmParams):
        return lambda x: predict_elm(model, x)
    if isinstance(model, ExactVdp):
        return model
    raise TypeError(f"unsupported model type {type(model).__name__}")


def model_to_dict(model, config: Optional[dict] = None) -> dict:
    doc = {"format": FORMAT, "format_version": FORMAT_VERSION}
    if isinstance(model, ExactVdp):
        doc.update(kind="vdp", dims={"n": 2, "m": 2, "h": 0}, **{"lambda": model.lam, "dt": model.dt})
    elif isinstance(model, (SlmParams, ElmParams)):
        slm = isinstance(model, SlmParams)
        doc.update(
            kind="slm" if slm else "elm",
            dims={"n": model.bank.dim_in, "m": model.dim_out, "h": model.bank.count_models},
            layout="row-major",
            bank=model.bank.to_dict(),
        )
        key, mat = ("gamma", model.gamma) if slm else ("b_matrix", model.b_matrix)
        doc[key] = mat.tolist()
    else:
        raise TypeError(f"unsupported model type {type(model).__name__}")
    if config is not None:
        doc["config"] = config
    return doc


def model_from_dict(doc: dict):
    if doc.get("format") != FORMAT:
        raise InputError(f"not a {FORMAT} document")
    if doc.get("format_version") != FORMAT_VERSION:
        raise InputError(f"unsupported format_version {doc.get('format_version')!r}")
    kind = doc.get("kind")
    try:
        if kind == "vdp":
            return ExactVdp(float(doc["lambda"]), float(doc["dt"]))
        bank = RbfBank.from_dict(doc["bank"])
        dims = doc["dims"]
        if kind == "slm":
            mat = np.asarray(doc["gamma"], dtype=np.float64).reshape(-1, dims["m"])
            model = SlmParams(bank, mat)
        elif kind == "elm":
            mat = np.asarray(doc["b_matrix"], dtype=np.float64).reshape(-1, dims["m"])
            model = ElmParams(bank, mat)
        else:
            raise InputError(f"unknown model kind {kind!r}")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"malformed model document: {exc}") from None
    if (bank.dim_in, bank.count_models) != (dims["n"], dims["h"]):
        raise InputError("model dims do not match the stored bank")
    return model


def dumps(model, config: Optional[dict] = None) -> str:
    return json.dumps(model_to_dict(model, config), sort_keys=True) + "\n"


def save_model(model, path, config: Optional[dict] = None) -> None:
    Path(path).write_text(dumps(model, config), encoding="utf-8")


def load_model(path):
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read model {path}: {exc}") from None
    return model_from_dict(doc)
