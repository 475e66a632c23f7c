"""Finite-difference derivatives of vector-valued functions.

All stencils are fourth-order central differences.  The step is relative,
``h = step * (1 + |point|)``, so the same code serves points near the origin
and far away from it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FD_STEP = 1e-4
"""Default relative step for first derivatives."""

FD_STEP_NESTED = 1e-3
"""Relative step for second derivatives and nested stencils (h^(1/2) balancing)."""

_W1 = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0
_O1 = np.array([-2.0, -1.0, 1.0, 2.0])

_W2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
_O2 = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])


@dataclass(frozen=True)
class DerivativeEngine:
    """Settings shared by the differential operators.

    ``mode`` is ``"analytic"`` (use stem jets when available, fall back to
    finite differences otherwise) or ``"finite-difference"`` (always use
    stencils, even when jets exist).
    """

    mode: str = "analytic"
    fd_order: int = 4
    fd_step: float = FD_STEP

    def __post_init__(self):
        if self.mode not in ("analytic", "finite-difference"):
            raise ValueError(f"unknown derivative mode {self.mode!r}")
        if self.fd_order != 4:
            raise ValueError("only fourth-order stencils are implemented")
        if not self.fd_step > 0:
            raise ValueError("fd_step must be positive")

    @property
    def analytic(self) -> bool:
        return self.mode == "analytic"


DEFAULT_ENGINE = DerivativeEngine()
FD_ENGINE = DerivativeEngine(mode="finite-difference")


def _step(point, step):
    point = np.asarray(point, dtype=float)
    mag = np.sqrt(np.sum(point * point, axis=-1))
    return step * (1.0 + mag)


def partial(func, point, axis, step=FD_STEP):
    """``d func / d point[..., axis]`` for ``func`` mapping ``(..., n)`` to ``(..., m)``.

    ``point`` carries its coordinates on the last axis.  The result has the
    shape of ``func(point)``.
    """
    point = np.asarray(point, dtype=float)
    h = _step(point, step)
    total = None
    for w, o in zip(_W1, _O1):
        shifted = point.copy()
        shifted[..., axis] += o * h
        term = w * np.asarray(func(shifted))
        total = term if total is None else total + term
    return total / _expand(h, total)


def gradient(func, point, axes=None, step=FD_STEP):
    """Stack of partials along ``axes`` (default: every coordinate) on a new leading axis."""
    point = np.asarray(point, dtype=float)
    if axes is None:
        axes = range(point.shape[-1])
    return np.stack([partial(func, point, a, step) for a in axes])


def second_partial(func, point, axis_a, axis_b, step=FD_STEP_NESTED):
    """Second derivative along two coordinates (pure or mixed)."""
    point = np.asarray(point, dtype=float)
    h = _step(point, step)
    total = None
    if axis_a == axis_b:
        for w, o in zip(_W2, _O2):
            shifted = point.copy()
            shifted[..., axis_a] += o * h
            term = w * np.asarray(func(shifted))
            total = term if total is None else total + term
        return total / _expand(h * h, total)
    for wa, oa in zip(_W1, _O1):
        for wb, ob in zip(_W1, _O1):
            shifted = point.copy()
            shifted[..., axis_a] += oa * h
            shifted[..., axis_b] += ob * h
            term = (wa * wb) * np.asarray(func(shifted))
            total = term if total is None else total + term
    return total / _expand(h * h, total)


def _expand(h, like):
    h = np.asarray(h, dtype=float)
    return h.reshape(h.shape + (1,) * (np.ndim(like) - h.ndim))


def derivative_1d(func, t, step=FD_STEP):
    """Derivative of ``func`` of one real variable (vectorized over ``t``)."""
    t = np.asarray(t, dtype=float)
    return partial(lambda p: func(p[..., 0]), t[..., None], 0, step)
