"""Joint measurability of unbiased qubit POVMs and the incompatibility bound.

Three unbiased POVMs with vectors ``n1, n2, n3`` are jointly measurable iff the
Fermat-Torricelli point ``q_F`` of their four derived vertices satisfies
``sum_k |q_F - q_k| <= 4``. Applied to a target triple the same geometry gives
the lower bound ``(sum_k |p_k - p_F| - 4) / 2`` on the total worst-case
approximation error of any jointly measurable triple.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bloch import make_bloch, make_triple
from .fermat import FtResult, fermat_torricelli, quad_from_triple

JM_TOL = 1e-9


@dataclass(frozen=True)
class JmVerdict:
    jointly_measurable: bool
    margin: float
    ft: FtResult


@dataclass(frozen=True)
class BoundReport:
    """Incompatibility bound of a target triple.

    ``raw_bound`` is reported unclamped; it is negative for strictly compatible
    triples and its magnitude is then half the compatibility margin.
    """

    raw_bound: float
    bound: float
    ft: FtResult
    quad: np.ndarray


def jm_margin(n):
    """``4 - sum_k |q_F - q_k|`` together with the Fermat-Torricelli result."""
    ft = fermat_torricelli(quad_from_triple(n))
    return 4.0 - ft.total_distance, ft


def is_jointly_measurable_triple(n, *, tol=JM_TOL):
    margin, ft = jm_margin(n)
    return JmVerdict(margin >= -tol, margin, ft)


def is_jointly_measurable_pair(m1, m2, *, tol=JM_TOL):
    """Two unbiased POVMs are compatible iff ``|m1 + m2| + |m1 - m2| <= 2``.

    Returns ``(jointly_measurable, margin)``.
    """
    m1, m2 = make_bloch(m1), make_bloch(m2)
    margin = 2.0 - float(np.linalg.norm(m1 + m2) + np.linalg.norm(m1 - m2))
    return margin >= -tol, margin


def incompatibility_bound(m):
    m = make_triple(m)
    quad = quad_from_triple(m)
    ft = fermat_torricelli(quad)
    raw = 0.5 * (ft.total_distance - 4.0)
    return BoundReport(raw_bound=raw, bound=max(0.0, raw), ft=ft, quad=quad)
