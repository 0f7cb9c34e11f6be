"""Composite Gauss-Legendre rules on [0, cutoff] for exponentially weighted integrals."""

from dataclasses import dataclass
from functools import lru_cache
import os

import numpy as np

from .errors import ValidationError

__all__ = [
    "RayQuadrature",
    "uniform_panels",
    "graded_panels",
    "default_rule",
    "quad_profile",
]

PROFILES = {
    # nodes per panel, number of geometric levels towards s = 0, panel width, cutoff
    "fast": dict(nodes=16, levels=24, width=2.0, cutoff=40.0),
    "accurate": dict(nodes=24, levels=34, width=2.0, cutoff=40.0),
}


@dataclass(frozen=True)
class RayQuadrature:
    """Nodes and weights in the ray parameter s.

    ``nodes`` are strictly increasing in (0, truncation) and ``weights``
    are positive.  ``direction`` records the unit complex direction of the
    ray the rule is used on (informational only).
    """

    nodes: np.ndarray
    weights: np.ndarray
    truncation: float
    direction: complex = 1.0 + 0.0j

    def __post_init__(self):
        n = np.asarray(self.nodes, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if n.shape != w.shape or n.ndim != 1:
            raise ValueError("nodes and weights must be 1-d arrays of equal length")
        if np.any(np.diff(n) <= 0) or np.any(w <= 0):
            raise ValueError("nodes must increase strictly and weights must be positive")
        n.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "nodes", n)
        object.__setattr__(self, "weights", w)

    def integrate(self, values):
        """Apply the rule to sampled values (last axis runs over the nodes)."""
        return np.asarray(values) @ self.weights

    def __len__(self):
        return len(self.nodes)


@lru_cache(maxsize=None)
def _legendre(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _from_edges(edges, nodes_per_panel, truncation):
    x, w = _legendre(nodes_per_panel)
    s, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        half = 0.5 * (b - a)
        s.append(half * x + 0.5 * (a + b))
        ws.append(half * w)
    return RayQuadrature(np.concatenate(s), np.concatenate(ws), float(truncation))


def uniform_panels(cutoff=40.0, width=2.0, nodes=64):
    """Panels of equal width on [0, cutoff]."""
    npan = int(round(cutoff / width))
    edges = np.linspace(0.0, npan * width, npan + 1)
    return _from_edges(edges, nodes, npan * width)


def graded_panels(cutoff=40.0, width=2.0, nodes=20, levels=30):
    """Geometrically graded panels towards s = 0 followed by uniform panels.

    The first panel is [0, 2**-levels]; panels then double in length up to
    s = 1, after which they have constant ``width``.  Grading resolves
    integrands like 1/(s + s0) with small s0 and factors e^{-Ms} with
    large M.
    """
    edges = [0.0] + [2.0 ** (-k) for k in range(levels, -1, -1)]
    a = 1.0
    while a < cutoff - 1e-12:
        a = min(a + width, cutoff)
        edges.append(a)
    return _from_edges(np.array(edges), nodes, cutoff)


def quad_profile():
    """Name of the active quadrature profile (env var BPSOSC_QUAD_PROFILE)."""
    name = os.environ.get("BPSOSC_QUAD_PROFILE", "accurate").strip().lower()
    if name not in PROFILES:
        raise ValidationError(f"must be one of {sorted(PROFILES)}, got {name!r}", "BPSOSC_QUAD_PROFILE")
    return name


@lru_cache(maxsize=None)
def _cached_rule(nodes, levels, width, cutoff):
    return graded_panels(cutoff=cutoff, width=width, nodes=nodes, levels=levels)


def default_rule(profile=None, **overrides):
    """Graded rule for the given profile, with optional overrides."""
    params = dict(PROFILES[profile or quad_profile()])
    params.update({k: v for k, v in overrides.items() if v is not None})
    return _cached_rule(int(params["nodes"]), int(params["levels"]),
                        float(params["width"]), float(params["cutoff"]))
