"""Procedural indoor scene construction: layout, placement tools, physics
feasibility and metrics over a JSON scene format."""

import json as _json

from . import _core
from ._core import Error, Scene, op_names, select_style

__all__ = ["Error", "Scene", "op_names", "select_style", "apply", "run_script", "metrics_report", "apply_noise"]


def apply(scene, op, args=None, seed=0, style="none", prompt=""):
    """Run one operation on `scene` in place and return its report as a dict."""
    return _json.loads(_core.apply_op(scene, op, _json.dumps(args or {}), seed, style, prompt))


def run_script(script, scene=None, style=None):
    """Execute a build script (dict). Returns (final scene, step log dict)."""
    final, log = _core.run_script(_json.dumps(script), scene if scene is not None else Scene(), style)
    return final, _json.loads(log)


def metrics_report(scene, hr=0.35, seed=0, samples=256):
    return _json.loads(_core.metrics_report(scene, hr, seed, samples))


def apply_noise(x, y, theta_deg, category, style, seed=0):
    return _core.apply_noise(x, y, theta_deg, category, style, seed)
