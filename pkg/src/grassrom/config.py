"""Run configuration: JSON document plus dotted-path overrides."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

from .bicitsgm import BiCitsgmConfig
from .errors import StorageError, ValidationError
from .oracle import AnalyticFamilyConfig, BurgersConfig

DEFAULTS = {
    "oracle": "analytic",
    "analytic": {},
    "burgers": {},
    "training_parameters": [0.5, 1.0, 1.5, 2.0, 2.5],
    "q": None,
    "ric_threshold": 0.9999,
    "bicitsgm": {},
    "query_parameters": [0.75, 1.25, 1.75, 2.25],
    "truth_on_demand": True,
    "output_dir": "run",
}


@dataclass
class RunConfig:
    oracle: str
    oracle_config: object
    training_parameters: list
    q: int | None
    ric_threshold: float | None
    bicitsgm: BiCitsgmConfig
    query_parameters: list
    truth_on_demand: bool = True
    output_dir: str = "run"
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, doc):
        merged = copy.deepcopy(DEFAULTS)
        merged.update(copy.deepcopy(doc))
        oracle = merged["oracle"]
        try:
            if oracle == "analytic":
                sub = dict(merged["analytic"])
                if "mu_range" in sub:
                    sub["mu_range"] = tuple(sub["mu_range"])
                oracle_config = AnalyticFamilyConfig(**sub)
            elif oracle == "burgers":
                sub = dict(merged["burgers"])
                if "nu_range" in sub:
                    sub["nu_range"] = tuple(sub["nu_range"])
                oracle_config = BurgersConfig(**sub)
            else:
                raise ValidationError(f"unknown oracle {oracle!r} (expected 'analytic' or 'burgers')")
            bic = BiCitsgmConfig.from_dict(merged["bicitsgm"])
        except TypeError as exc:
            raise ValidationError(f"bad configuration: {exc}") from exc
        train = [float(p) for p in merged["training_parameters"]]
        if any(b <= a for a, b in zip(train, train[1:])):
            raise ValidationError(f"training parameters must be sorted and distinct: {train}")
        if len(train) < 3:
            raise ValidationError("at least 3 training parameters are required")
        q = merged["q"]
        ric = merged["ric_threshold"] if q is None else None
        if q is None and ric is None:
            raise ValidationError("set either q or ric_threshold")
        return cls(
            oracle=oracle, oracle_config=oracle_config, training_parameters=train,
            q=None if q is None else int(q), ric_threshold=ric, bicitsgm=bic,
            query_parameters=[float(p) for p in merged["query_parameters"]],
            truth_on_demand=bool(merged["truth_on_demand"]),
            output_dir=str(merged["output_dir"]), raw=merged,
        )


def load_config_document(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise StorageError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path} is not valid JSON: {exc}") from exc


def apply_override(doc, assignment):
    """Set ``a.b.c=value`` in ``doc``; the value is parsed as JSON when possible."""
    if "=" not in assignment:
        raise ValidationError(f"override {assignment!r} must look like key=value")
    key, text = assignment.split("=", 1)
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text
    parts = key.strip().split(".")
    target = doc
    for part in parts[:-1]:
        node = target.get(part)
        if node is None:
            node = target[part] = {}
        if not isinstance(node, dict):
            raise ValidationError(f"cannot set {key}: {part} is not a mapping")
        target = node
    target[parts[-1]] = value
    return doc


def write_config(doc, path):
    Path(path).write_text(json.dumps(doc, indent=2))
