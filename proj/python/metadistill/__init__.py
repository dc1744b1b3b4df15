"""Anchored recursive distillation laboratory.

Thin wrapper over the C++ core. Configs and reports cross the boundary as
JSON; this module converts to and from plain dicts.
"""

import json as _json

from metadistill._core import (  # noqa: F401
    __version__,
    convex_combine,
    divergence,
    effective_anchor,
    normalize,
)
from metadistill import _core


def generation_weights(scheme, g):
    """Weights v_0..v_g for a generation-weight scheme dict."""
    return list(_core.generation_weights(_json.dumps(scheme), g))


def build_meta_teacher(operator, alpha_g, teachers, students):
    """Build the meta-teacher q_g; `operator` is a config dict."""
    return list(_core.build_meta_teacher(_json.dumps(operator), alpha_g, teachers, students))


def check_axioms(operator, trials=1000, seed=1):
    """Run the axiom conformance harness; returns the report as a dict."""
    return _json.loads(_core.check_axioms(_json.dumps(operator), trials, seed))


def run(scenario):
    """Simulate a scenario dict; returns the trace (with diagnostics) as a dict."""
    return _json.loads(_core.run_scenario(_json.dumps(scenario)))


def fixed_point_residual(operator, t0, candidate):
    return _core.fixed_point_residual(_json.dumps(operator), t0, candidate)


def reference_anchored_scenario():
    return _json.loads(_core.reference_anchored_scenario())


def reference_drift_scenario():
    return _json.loads(_core.reference_drift_scenario())
