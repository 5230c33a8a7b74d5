"""Reinforcement-learning test generation for a 2D driving microworld."""

import json

from ._core import (
    ConfigError,
    __version__,
    auc,
    contextual_bandit,
    dunn,
    friedman,
    reward,
    selftest,
    state_key,
    summarize,
)
from . import _core


def run(out=None, **config):
    """Run a campaign. Keyword arguments are flat config keys (budget_steps, reps, technique, ...)."""
    return _core.run_campaign(json.dumps(config), "" if out is None else str(out))


def config(**overrides):
    return json.loads(_core.config_json(json.dumps(overrides)))


def compare(dirs, metric="violations"):
    return json.loads(_core.compare([str(d) for d in dirs], metric))


__all__ = [
    "ConfigError",
    "__version__",
    "auc",
    "compare",
    "config",
    "contextual_bandit",
    "dunn",
    "friedman",
    "reward",
    "run",
    "selftest",
    "state_key",
    "summarize",
]
