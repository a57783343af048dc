"""Globally adaptive Gauss-Legendre quadrature.

Each interval is integrated with two fixed panels of different order; the
difference between them serves as the local error estimate. The interval with
the largest estimated error is split until the summed error meets the
requested tolerance. Integrands must accept an ndarray of abscissae and
return an ndarray of values, so panel evaluation stays vectorized.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np

from .errors import ConvergenceError, InvalidParameterError

# panel orders for the embedded error estimate
_N_LO = 10
_N_HI = 21


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and subdivision budget for adaptive integration."""

    rel_tol: float = 1e-6
    abs_tol: float = 1e-12
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not (self.rel_tol > 0.0):
            raise InvalidParameterError(f"rel_tol must be > 0, got {self.rel_tol}")
        if not (self.abs_tol > 0.0):
            raise InvalidParameterError(f"abs_tol must be > 0, got {self.abs_tol}")
        if self.max_subdivisions < 1:
            raise InvalidParameterError("max_subdivisions must be >= 1")


DEFAULT_QUADRATURE = QuadratureConfig()


@lru_cache(maxsize=None)
def _panel(n: int) -> Tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def _eval_interval(f: Callable[[np.ndarray], np.ndarray], a: float, b: float) -> Tuple[float, float]:
    """Integral estimate over [a, b] plus local error estimate."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x_lo, w_lo = _panel(_N_LO)
    x_hi, w_hi = _panel(_N_HI)
    i_lo = half * float(np.dot(w_lo, f(mid + half * x_lo)))
    i_hi = half * float(np.dot(w_hi, f(mid + half * x_hi)))
    return i_hi, abs(i_hi - i_lo)


def adaptive_quad(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> Tuple[float, float]:
    """Integrate f over [a, b]; returns (value, error_bound).

    Raises ConvergenceError (carrying the best estimate and its bound) if the
    tolerance is not met within cfg.max_subdivisions splits.
    """
    if not b > a:
        if b == a:
            return 0.0, 0.0
        raise InvalidParameterError(f"integration bounds reversed: [{a}, {b}]")

    val, err = _eval_interval(f, a, b)
    # heap entries: (-err, seq, a, b, val, err); seq breaks ties deterministically
    seq = 0
    heap = [(-err, seq, a, b, val, err)]
    total_val, total_err = val, err

    for _ in range(cfg.max_subdivisions):
        if total_err <= max(cfg.abs_tol, cfg.rel_tol * abs(total_val)):
            return total_val, total_err
        neg_err, _, ia, ib, ival, ierr = heapq.heappop(heap)
        mid = 0.5 * (ia + ib)
        if mid <= ia or mid >= ib:
            # interval at floating-point resolution; cannot split further
            heapq.heappush(heap, (0.0, seq + 1, ia, ib, ival, ierr))
            seq += 1
            continue
        v1, e1 = _eval_interval(f, ia, mid)
        v2, e2 = _eval_interval(f, mid, ib)
        total_val += v1 + v2 - ival
        total_err += e1 + e2 - ierr
        heapq.heappush(heap, (-e1, seq + 1, ia, mid, v1, e1))
        heapq.heappush(heap, (-e2, seq + 2, mid, ib, v2, e2))
        seq += 2

    if total_err <= max(cfg.abs_tol, cfg.rel_tol * abs(total_val)):
        return total_val, total_err
    raise ConvergenceError(
        f"quadrature did not converge within {cfg.max_subdivisions} subdivisions "
        f"(estimate {total_val!r}, error bound {total_err!r})",
        estimate=total_val,
        error_bound=total_err,
    )


def adaptive_quad_2d(
    f: Callable[[float, np.ndarray], np.ndarray],
    x_lo: float,
    x_hi: float,
    r_hi_of_x: Callable[[float], float],
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> Tuple[float, float]:
    """Nested adaptive integral of f(x, r) over x in [x_lo, x_hi], r in [0, r_hi(x)].

    The outer integral adapts in x; each outer abscissa triggers an inner
    adaptive integral in r, run at a tenth of the outer tolerance so the
    inner error stays negligible against the outer estimate.
    """
    inner_cfg = QuadratureConfig(
        rel_tol=0.1 * cfg.rel_tol,
        abs_tol=0.1 * cfg.abs_tol,
        max_subdivisions=cfg.max_subdivisions,
    )

    def outer(xs: np.ndarray) -> np.ndarray:
        out = np.empty_like(xs)
        for i, x in enumerate(xs):
            r_hi = r_hi_of_x(float(x))
            if r_hi <= 0.0:
                out[i] = 0.0
                continue
            out[i], _ = adaptive_quad(lambda r: f(float(x), r), 0.0, r_hi, inner_cfg)
        return out

    return adaptive_quad(outer, x_lo, x_hi, cfg)
