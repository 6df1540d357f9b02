"""Entanglement-assisted capacities of random-parameter channels with side information.

Channel arguments accept a path, a JSON string or an already parsed dict.
Results come back as plain dicts with the same keys as the CLI output.
"""

import json
import os

from ._eacsi import (
    NumericError,
    __version__,
    canonical_spec,
    heisenberg_weyl,
    mutual_info,
    ricochet_residual,
)
from . import _eacsi

__all__ = [
    "NumericError",
    "__version__",
    "baseline",
    "canonical_spec",
    "capacity",
    "heisenberg_weyl",
    "mutual_info",
    "ricochet_residual",
    "simulate",
    "verify",
]


def _text(spec):
    if isinstance(spec, dict):
        return json.dumps(spec)
    if isinstance(spec, os.PathLike) or (isinstance(spec, str) and not spec.lstrip().startswith("{")):
        with open(spec) as f:
            return f.read()
    return spec


def capacity(channel, scenario="none", *, restarts=8, max_iters=400, dim_k=0, dim_ref=0, dim_env=1, seed=0):
    return json.loads(
        _eacsi.capacity_json(_text(channel), scenario, restarts, max_iters, dim_k, dim_ref, dim_env, seed)
    )


def simulate(
    channel,
    *,
    family=None,
    scheme="causal",
    n=1,
    messages=4,
    bin_rate=0.0,
    delta=0.2,
    layout="auto",
    decoder="projector",
    seed=0,
    cap=4096,
    mc_samples=4096,
):
    fam = None if family is None else _text(family)
    return json.loads(
        _eacsi.simulate_json(
            _text(channel), fam, scheme, n, messages, bin_rate, delta, layout, decoder, seed, cap, mc_samples
        )
    )


def baseline(channel, *, u_size=0):
    return json.loads(_eacsi.baseline_json(_text(channel), u_size))


def verify(suite, *, n=0, delta=-1.0, trials=10000, seed=0, inject_fault=False):
    """List of {"name", "passed", "detail"} for the algebra, packing or covering suite."""
    return _eacsi.verify(suite, n, delta, trials, seed, inject_fault)
