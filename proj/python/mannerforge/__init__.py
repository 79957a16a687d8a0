"""Python access to the mannerforge gridworld, adverb programs, generator and scorer."""

import json
import os

from ._core import (
    MannerError,
    builtin_adverbs,
    exact_match,
    format_percent,
    parse_program,
    sample_registry,
    stats,
)
from . import _core

__all__ = [
    "MannerError",
    "apply_program",
    "builtin_adverbs",
    "evaluate",
    "exact_match",
    "execute",
    "format_percent",
    "generate",
    "ground",
    "parse_program",
    "read_examples",
    "sample_registry",
    "solve",
    "stats",
    "transform",
]


def _tokens(seq):
    return seq.split() if isinstance(seq, str) else list(seq)


def _world(world):
    return world if isinstance(world, str) else json.dumps(world)


def ground(symbols, heading):
    """Egocentric actions for a symbol sequence (list or space-separated string)."""
    return _core.ground(_tokens(symbols), heading)


def apply_program(program, symbols, max_depth=8):
    """Rewrite `symbols` with a builtin adverb name or program text."""
    return _core.apply_program(program, _tokens(symbols), max_depth)


def transform(program, symbols, heading, max_depth=8):
    return _core.transform(program, _tokens(symbols), heading, max_depth)


def solve(world, command, registry=""):
    """Oracle action sequence for `command` in `world` (dict or JSON text)."""
    return _core.solve(_world(world), command, registry)


def execute(world, actions):
    """Final world state after running `actions`, as a dict."""
    return json.loads(_core.execute(_world(world), _tokens(actions)))


def generate(config, out_dir, jobs=1, **overrides):
    """Generate a dataset into `out_dir` and return its manifest as a dict.

    Keyword overrides (seed, num_examples, extra_adverbs, ...) replace
    top-level config keys.
    """
    cfg = dict(config or {})
    cfg.update(overrides)
    return json.loads(_core.generate(json.dumps(cfg), os.fspath(out_dir), jobs))


def read_examples(dataset_dir):
    return [json.loads(e) for e in _core.read_examples(os.fspath(dataset_dir))]


def evaluate(dataset_dir, predictions, splits=(), jobs=1):
    """Score predictions given as a {index: tokens} mapping or (index, tokens) pairs."""
    items = predictions.items() if isinstance(predictions, dict) else predictions
    pairs = [(int(i), _tokens(p)) for i, p in items]
    return json.loads(_core.evaluate(os.fspath(dataset_dir), pairs, list(splits), jobs))
