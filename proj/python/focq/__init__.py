"""Counting first-order evaluation over sparse structures.

Structures are passed around as JSON text in the same format the command
line tool reads: {"universe": [...], "relations": {"E": {"arity": 2, "tuples": [...]}}}.
"""

import json

from . import _core
from ._core import InputError, evaluate

__all__ = [
    "InputError",
    "evaluate",
    "generate",
    "decompose",
    "cover",
    "splitter_game",
    "remove",
    "transform",
    "encode_tree",
    "rewrite_tree_formula",
    "run",
]


def _text(structure):
    return structure if isinstance(structure, str) else json.dumps(structure)


def generate(family, n, seed=1, unary=(), p=0.4):
    return json.loads(_core.generate(family, n, seed, list(unary), p))


def decompose(text, signature):
    return json.loads(_core.decompose(text, dict(signature)))


def cover(structure, r):
    return json.loads(_core.cover(_text(structure), r))


def splitter_game(n, edges, radius, max_rounds=0):
    return json.loads(_core.splitter_game(n, list(edges), radius, max_rounds))


def remove(structure, element, r):
    return json.loads(_core.remove(_text(structure), element, r))


def transform(text, signature, variables, r):
    return _core.transform(text, dict(signature), list(variables), r)


def encode_tree(n, edges):
    tree, height = _core.encode_tree(n, list(edges))
    return json.loads(tree), height


def rewrite_tree_formula(text):
    return _core.rewrite_tree_formula(text)


def run(text, structure, mode="local", **kwargs):
    """Evaluate text (sentence, ground term or query) on a structure dict or JSON string."""
    return evaluate(text, _text(structure), mode, **kwargs)
