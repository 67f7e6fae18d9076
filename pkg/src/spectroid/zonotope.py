"""The image of the unit cube under the operator, as a zonotope.

Z = { sum_k f_k g_k : f_k in [0,1] } with generators g_k = width_k * value_k.
Provides the support function, an exact interior-membership test for
responses (m <= 3 via facet-normal enumeration), and the complementary
involution y -> white_point - y.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedDimension
from .stepfn import ResponseVector, StepFunction

__all__ = ["ZonotopeModel"]

# Relative strictness margin for the interior test: a response numerically
# on the boundary must be rejected.
MEMBERSHIP_RTOL = 1e-9

# Generator pairs more parallel than this (relative cross-product norm)
# do not span a facet and are skipped.
DEGENERATE_PAIR_RTOL = 1e-12


@dataclass(frozen=True)
class ZonotopeModel:
    """Zonotope spanned by per-cell generator vectors."""

    generators: np.ndarray  # shape (N, m)

    def __post_init__(self):
        g = np.atleast_2d(np.asarray(self.generators, dtype=float))
        object.__setattr__(self, "generators", g)

    @staticmethod
    def from_responsivity(w: StepFunction) -> "ZonotopeModel":
        return ZonotopeModel(w.widths[:, None] * w.values)

    @property
    def m(self) -> int:
        return self.generators.shape[1]

    @property
    def white_point(self) -> np.ndarray:
        return self.generators.sum(axis=0)

    def support(self, u) -> float:
        """Support function: sup over Z of <u, z> = sum_k max(<u, g_k>, 0)."""
        u = np.asarray(u, dtype=float)
        if not np.any(u):
            raise ValueError("support direction must be nonzero")
        return float(np.maximum(self.generators @ u, 0.0).sum())

    def _facet_normals(self) -> np.ndarray:
        g = self.generators
        m = self.m
        if m == 1:
            return np.array([[1.0]])
        norms = np.linalg.norm(g, axis=1)
        live = g[norms > 0]
        if m == 2:
            perp = np.stack([-live[:, 1], live[:, 0]], axis=1)
            lens = np.linalg.norm(perp, axis=1)
            return perp / lens[:, None]
        if m == 3:
            normals = []
            n = live.shape[0]
            scale = np.linalg.norm(live, axis=1)
            for i in range(n):
                cross = np.cross(live[i], live[i + 1 :])
                lens = np.linalg.norm(cross, axis=1)
                keep = lens > DEGENERATE_PAIR_RTOL * scale[i] * scale[i + 1 :]
                normals.append(cross[keep] / lens[keep][:, None])
            if not normals:
                raise ValueError("all generator pairs degenerate")
            return np.concatenate(normals, axis=0)
        raise UnsupportedDimension(
            f"exact membership implemented for m <= 3, got m={self.m}; "
            "rely on solver divergence diagnostics instead"
        )

    def contains_interior(self, y: ResponseVector | np.ndarray) -> bool:
        """Strict interior test: <u,y> < support(u) for every facet normal +-u."""
        yv = y.components if isinstance(y, ResponseVector) else np.asarray(y, float)
        for u in self._facet_normals():
            for sgn in (1.0, -1.0):
                psi = self.support(sgn * u)
                margin = MEMBERSHIP_RTOL * (1.0 + abs(psi))
                if sgn * float(u @ yv) >= psi - margin:
                    return False
        return True

    def involute(self, y: ResponseVector) -> ResponseVector:
        """Complement about the center: white_point - y; an involution."""
        return ResponseVector(self.white_point - y.components, y.channel_labels)
