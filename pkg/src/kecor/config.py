"""Run configuration: JSON schema, defaults, and named profiles.

A config document is validated against a closed schema (unknown keys are
rejected everywhere), overlaid onto the defaults of an optional profile,
and returned as a plain dict.  Profiles bundle the published
hyperparameter sets: the generic profile and the two dataset-sized ones.
"""

from __future__ import annotations

import copy
import json

import jsonschema

from .errors import ConfigInvalid

_KERNEL_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": ["linear", "rbf", "last", "ntk",
                          "laplace-rbf", "last-layer"]},
        "rbf_sigma": {"type": "number", "exclusiveMinimum": 0},
        "normalize": {"type": "boolean"},
    },
}

_PROXY_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "layers": {
            "type": "array",
            "items": {"type": "integer", "minimum": 1},
        },
        "beta": {"type": "number", "minimum": 0},
        "activation": {"enum": ["relu", "identity"]},
        "epochs": {"type": "integer", "minimum": 0},
        "lr": {"type": "number", "exclusiveMinimum": 0},
    },
}

_PATHS_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "features": {"type": "string"},
        "logits": {"type": "string"},
        "labeled_indices": {"type": "string"},
        "output": {"type": "string"},
        "targets": {"type": "string"},
        "proxy_checkpoint": {"type": "string"},
        "report": {"type": "string"},
    },
}

_SIMULATE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "pool_size": {"type": "integer", "minimum": 2},
        "feature_dim": {"type": "integer", "minimum": 1},
        "classes": {"type": "integer", "minimum": 2},
        "target_dim": {"type": "integer", "minimum": 1},
        "initial_labeled": {"type": "integer", "minimum": 1},
        "rounds": {"type": "integer", "minimum": 0},
        "budget": {"type": "integer", "minimum": 0},
        "separation": {"type": "number", "exclusiveMinimum": 0},
        "noise": {"type": "number", "minimum": 0},
        "box_rate": {"type": "number", "minimum": 0},
        "test_fraction": {"type": "number", "exclusiveMinimum": 0},
        "oracle_width": {"type": "integer", "minimum": 1},
        "classifier_epochs": {"type": "integer", "minimum": 0},
        "classifier_lr": {"type": "number", "exclusiveMinimum": 0},
    },
}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "strategy": {"enum": ["kecor", "random", "entropy", "coreset"]},
        "kernel": _KERNEL_SCHEMA,
        "epsilon": {"type": "number", "exclusiveMinimum": 0},
        "sigma_ent": {"type": "number", "minimum": 0},
        "batch_size": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "proxy": _PROXY_SCHEMA,
        "paths": _PATHS_SCHEMA,
        "simulate": _SIMULATE_SCHEMA,
        "timing": {"type": "boolean"},
    },
}

DEFAULTS = {
    "strategy": "kecor",
    "kernel": {"kind": "ntk", "rbf_sigma": 1.0, "normalize": False},
    "epsilon": 0.5,
    "sigma_ent": 0.1,
    "batch_size": 10,
    "seed": 0,
    "proxy": {"layers": [256, 256], "beta": 0.1, "activation": "relu",
              "epochs": 10, "lr": 0.05},
    "paths": {},
    "simulate": {
        "pool_size": 400, "feature_dim": 16, "classes": 4, "target_dim": 4,
        "initial_labeled": 20, "rounds": 4, "separation": 3.0, "noise": 0.05,
        "box_rate": 5.0, "test_fraction": 0.25, "oracle_width": 32,
        "classifier_epochs": 200, "classifier_lr": 0.5,
    },
    "timing": False,
}

# profile overlays on top of DEFAULTS; explicit user keys win over both
PROFILES = {
    "generic": {},
    "kitti": {
        "sigma_ent": 0.1,
        "batch_size": 100,
        "proxy": {"epochs": 10},
        "simulate": {"initial_labeled": 100, "rounds": 6},
    },
    "waymo": {
        "sigma_ent": 0.5,
        "batch_size": 400,
        "proxy": {"epochs": 20},
        "simulate": {"initial_labeled": 400, "rounds": 5},
    },
}


def _deep_merge(base, overlay):
    out = copy.deepcopy(base)
    for key, value in overlay.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def validate_config(document):
    """Schema-check a raw config dict; raises ConfigInvalid."""
    try:
        jsonschema.validate(document, SCHEMA)
    except jsonschema.ValidationError as err:
        path = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigInvalid("config key %s: %s" % (path, err.message)) from err


def resolve_config(document=None, profile="generic"):
    """Defaults <- profile overlay <- user document, validated."""
    if profile not in PROFILES:
        raise ConfigInvalid(
            "unknown profile %r; expected one of %s"
            % (profile, ", ".join(sorted(PROFILES)))
        )
    document = {} if document is None else document
    if not isinstance(document, dict):
        raise ConfigInvalid("config root must be a JSON object")
    validate_config(document)
    merged = _deep_merge(DEFAULTS, PROFILES[profile])
    return _deep_merge(merged, document)


def load_config(path, profile="generic"):
    """Read, parse, and resolve a JSON config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            document = json.load(fh)
    except FileNotFoundError as err:
        raise ConfigInvalid("config file not found: %s" % (path,)) from err
    except json.JSONDecodeError as err:
        raise ConfigInvalid("config is not valid JSON: %s" % (err,)) from err
    return resolve_config(document, profile=profile)
