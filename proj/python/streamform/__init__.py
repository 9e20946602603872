"""Formation control with stream-function obstacle avoidance."""

import json

from ._core import (
    Actor,
    Env,
    Trainer,
    circumcenter,
    evaluate,
    map_action,
    step_agent,
    stream_value,
    wrap_angle,
)
from ._core import Config as _Config

__all__ = [
    "Actor",
    "Env",
    "Trainer",
    "circumcenter",
    "config",
    "config_keys",
    "evaluate",
    "map_action",
    "step_agent",
    "stream_value",
    "wrap_angle",
]


def config(document=None, **overrides):
    """Builds a run configuration.

    `document` is a dict (flat dotted keys or nested) or a path to a JSON
    file. Keyword overrides use double underscores for dots, e.g.
    ``env__n_followers=2``.
    """
    if isinstance(document, str):
        with open(document) as f:
            document = json.load(f)
    text = json.dumps(document or {})
    pairs = [k.replace("__", ".") + "=" + json.dumps(v) for k, v in overrides.items()]
    return _Config(text, pairs)


def config_keys():
    """Every recognized configuration key."""
    return _Config.keys()
