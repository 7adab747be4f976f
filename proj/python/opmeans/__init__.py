"""Operator means of positive definite matrices.

Specifications are plain dicts in the same JSON shape the command-line tool reads,
for example ``{"kind": "Karcher", "weights": [0.5, 0.5]}``.
"""

import json

import numpy as np

from . import _opmeans
from ._opmeans import OpmeansError, kantorovich, random_spd, thompson_distance

__all__ = [
    "OpmeansError",
    "deformed_rep",
    "kantorovich",
    "mean",
    "random_spd",
    "rep_eval",
    "run_campaign",
    "search",
    "thompson_distance",
    "two_var_mean",
]


def _dump(spec):
    return spec if isinstance(spec, str) else json.dumps(spec)


def _arrays(matrices):
    return [np.asarray(m, dtype=float) for m in matrices]


def rep_eval(spec, t):
    """Value of a representing function at t > 0."""
    return _opmeans.rep_eval(_dump(spec), t)


def deformed_rep(tau, sigma, t):
    """Representing function of tau deformed by sigma, at t."""
    return _opmeans.deformed_rep(_dump(tau), _dump(sigma), t)


def two_var_mean(spec, a, b):
    """A sigma B for the two-variable mean with the given representing function."""
    return _opmeans.two_var_mean(_dump(spec), np.asarray(a, float), np.asarray(b, float))


def mean(spec, matrices, tol=None, max_iters=None):
    """Evaluates a multivariate mean; returns value, iterations, residual_dt, enclosure_gap."""
    return _opmeans.mean(_dump(spec), _arrays(matrices), tol, max_iters)


def run_campaign(config, threads=1):
    """Runs a verification campaign; returns (report lines as dicts, summary, exit code)."""
    text, code = _opmeans.run_campaign(_dump(config), threads)
    lines = [json.loads(line) for line in text.splitlines()]
    return lines[:-1], lines[-1]["summary"], code


def search(tau, r, mode):
    """Optimality counterexample search; returns a dict or None."""
    found = _opmeans.search(_dump(tau), r, mode)
    return None if found is None else json.loads(found)
