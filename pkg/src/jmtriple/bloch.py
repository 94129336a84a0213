"""Bloch vectors, effect operators and the state-dependent distance.

An unbiased two-outcome qubit POVM has effects ``(1 +- m.sigma)/2`` and is
described entirely by its Bloch vector ``m`` with ``|m| <= 1``. Qubit states
``(1 + r.sigma)/2`` use the same representation. Vectors are plain float
arrays of shape ``(3,)``; a triple of measurements is an array of shape
``(3, 3)`` whose rows are ``m1, m2, m3``.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import NonFinite, NormExceeded

NORM_SLACK = 1e-12

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

# (1,-1,-1) < (1,-1,1) < (1,1,-1) < (1,1,1); only s1 = +1 is needed since
# s and -s give the same norm.
SIGN_PATTERNS = np.array(
    sorted(p for p in itertools.product((1, -1), repeat=3) if p[0] == 1),
    dtype=float,
)

_TIE_TOL = 1e-12


def make_bloch(v, *, slack=NORM_SLACK):
    """Validate ``v`` as a Bloch vector and return it as a float array.

    The stored vector is not renormalized; ``|v|`` may exceed one by at most
    ``slack`` so that analytically unit vectors survive round-off.
    """
    arr = np.array(v, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise ValueError(f"a Bloch vector needs 3 components, got shape {np.shape(v)}")
    if not np.all(np.isfinite(arr)):
        raise NonFinite(f"non-finite Bloch vector {arr.tolist()}")
    norm = float(np.linalg.norm(arr))
    if norm > 1.0 + slack:
        raise NormExceeded(f"Bloch vector norm {norm!r} exceeds 1")
    arr.setflags(write=False)
    return arr


def make_triple(rows, *, slack=NORM_SLACK):
    """Validate three Bloch vectors and stack them into a ``(3, 3)`` array."""
    rows = np.asarray(rows, dtype=float)
    if rows.shape != (3, 3):
        raise ValueError(f"a measurement triple must have shape (3, 3), got {rows.shape}")
    out = np.stack([make_bloch(r, slack=slack) for r in rows])
    out.setflags(write=False)
    return out


def effects(m):
    """Return the effect pair ``(M+, M-)`` of the unbiased POVM with vector ``m``."""
    m = make_bloch(m)
    msig = np.tensordot(m, PAULI, axes=1)
    eye = np.eye(2, dtype=complex)
    return 0.5 * (eye + msig), 0.5 * (eye - msig)


def stat_distance_sq(r, m, n):
    """Squared distance ``2|r.(m - n)|`` between two POVMs on the state ``r``."""
    r, m, n = make_bloch(r), make_bloch(m), make_bloch(n)
    return 2.0 * abs(float(np.dot(r, m - n)))


def _unit_or_zero(v):
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        return np.zeros(3)
    return v / norm


def pair_worst_case(m, n):
    """Maximize ``2|r.(m - n)|`` over all states.

    Returns ``(value, r)``; ``r`` is the zero vector when ``m == n`` since every
    state is then maximizing.
    """
    d = make_bloch(m) - make_bloch(n)
    return 2.0 * float(np.linalg.norm(d)), _unit_or_zero(d)


def worst_case_value(diffs):
    """``max_r sum_i 2|r.d_i|`` for a ``(3, 3)`` array of difference rows.

    No validation, for use in inner loops.
    """
    sums = SIGN_PATTERNS @ diffs
    return 2.0 * float(np.sqrt(np.max(np.einsum("ij,ij->i", sums, sums))))


def total_worst_case(M, N):
    """Maximum over states of the summed distances between two triples.

    The map ``r -> sum_i 2|r.d_i|`` is convex, so its maximum over the unit
    ball sits on the sphere at one of the directions ``s1 d1 + s2 d2 + s3 d3``.
    Returns ``(value, r)``; ties between sign patterns go to the
    lexicographically smallest one.
    """
    diffs = make_triple(M) - make_triple(N)
    sums = SIGN_PATTERNS @ diffs
    norms = np.linalg.norm(sums, axis=1)
    best = float(norms.max())
    if best == 0.0:
        return 0.0, np.zeros(3)
    idx = int(np.flatnonzero(norms >= best * (1.0 - _TIE_TOL))[0])
    return 2.0 * best, sums[idx] / norms[idx]
