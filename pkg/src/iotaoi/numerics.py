"""Special functions, series, quadrature and root finding.

Quadrature is delegated to QUADPACK (``scipy.integrate.quad``) behind a small
contract: every call either meets ``max(abs_tol, rel_tol*|result|)`` or raises
:class:`~iotaoi.errors.NumericalError` with code ``TOLERANCE_NOT_MET``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

import numpy as np
from scipy import integrate, special

from .errors import NumericalError

SERIES_MAX_TERMS = 100_000


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-8
    abs_tol: float = 0.0
    max_subdivisions: int = 200
    semi_infinite_map: str = "rational"  # u/(1-u) or "exponential": -log(1-u)

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if not self.abs_tol >= 0:
            raise ValueError("abs_tol must be non-negative")
        if self.max_subdivisions < 10:
            raise ValueError("max_subdivisions must be at least 10")
        if self.semi_infinite_map not in ("rational", "exponential"):
            raise ValueError(f"unknown semi_infinite_map {self.semi_infinite_map!r}")


SPECIAL = QuadratureSpec(rel_tol=1e-8)
NESTED = QuadratureSpec(rel_tol=1e-6)


# -- special functions -------------------------------------------------------

def sinc_delta(delta: float) -> float:
    """sin(pi*delta)/(pi*delta) for delta in (0, 1)."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta={delta} outside (0, 1)")
    return float(np.sinc(delta))


def lower_incomplete_gamma(s, x, normalized=True):
    """Lower incomplete gamma function gamma(s, x).

    Normalized by Gamma(s) unless ``normalized=False``.
    """
    s = np.asarray(s, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(s <= 0):
        raise ValueError("s must be positive")
    if np.any(x < 0):
        raise ValueError("x must be non-negative")
    out = special.gammainc(s, x)
    if not normalized:
        out = out * special.gamma(s)
    return out[()] if out.ndim == 0 else out


def lower_incomplete_gamma_unnormalized(s, x):
    return lower_incomplete_gamma(s, x, normalized=False)


def gen_binomial(b: float, k: int) -> float:
    """Generalized binomial coefficient prod_{j<k}(b-j)/k!."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if float(b).is_integer() and b >= 0:
        return float(math.comb(int(b), k))
    out = 1.0
    for j in range(k):
        out *= (b - j) / (j + 1)
    return out


# -- the C(b) series ---------------------------------------------------------

def _series_terms(b, zeta, delta):
    """Yield sum terms binom(b,k)*binom(delta-1,k-1)*zeta**k for k = 1, 2, ..."""
    cb = b  # binom(b, 1)
    cd = 1.0  # binom(delta-1, 0)
    zk = zeta
    k = 1
    while True:
        yield k, cb * cd * zk
        cb *= (b - k) / (k + 1)
        cd *= (delta - 1 - (k - 1)) / k
        zk *= zeta
        k += 1


def series_C(b, zeta, delta, scale, rel_tol=1e-14, validate=None):
    """Moment kernel of an ALOHA-thinned Poisson interference field.

    Returns ``scale**delta / sinc(delta) * sum_k binom(b,k) binom(delta-1,k-1) zeta**k``
    where ``scale`` is the threshold-times-power-ratio seen by the link
    (``beta_b * p_d / p_b`` for the update link). Equivalent to
    :func:`series_C_integral`.

    For negative ``b`` the result is cross-checked against the integral form
    (``validate`` defaults to True there); a discrepancy above 1e-6 raises.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if not scale > 0:
        raise ValueError("scale must be positive")
    if not 0.0 <= zeta <= 1.0:
        raise ValueError("zeta must lie in [0, 1]")
    if zeta == 0.0 or b == 0:
        return 0.0
    if b < 0 and zeta >= 1.0:
        raise NumericalError("series diverges for b<0 and zeta=1", code="NONCONVERGENT")
    pref = scale**delta / sinc_delta(delta)
    finite = float(b).is_integer() and b > 0
    total = 0.0
    comp = 0.0  # Kahan compensation
    quiet = 0
    for k, t in _series_terms(b, zeta, delta):
        y = t - comp
        s = total + y
        comp = (s - total) - y
        total = s
        if finite and k >= b:
            break
        if k > abs(b) + 1:
            # beyond k ~ |b| the term ratio tends to zeta from above, so the
            # remainder is bounded by a geometric tail once it settles.
            if abs(t) <= rel_tol * abs(total) * (1 - zeta):
                quiet += 1
                if quiet >= 3:
                    break
            else:
                quiet = 0
        if k >= SERIES_MAX_TERMS:
            raise NumericalError(
                f"C(b) series did not converge in {SERIES_MAX_TERMS} terms",
                code="NONCONVERGENT",
                partial_sum=pref * total,
            )
    result = pref * total
    if validate is None:
        validate = b < 0
    if validate:
        ref = series_C_integral(b, zeta, delta, scale)
        if abs(result - ref) > 1e-6 * max(abs(ref), 1e-300):
            raise NumericalError(
                f"C(b) series ({result!r}) disagrees with integral form ({ref!r})",
                code="NONCONVERGENT",
            )
    return result


def series_C_integral(b, zeta, delta, scale, rel_tol=1e-11):
    """Radial-integral form of :func:`series_C`.

    ``int_0^inf [1 - (1 - zeta/(1 + r**alpha/scale))**b] 2r dr`` with
    ``alpha = 2/delta``.
    """
    if zeta == 0.0 or b == 0:
        return 0.0

    # t = r^2 / scale^delta turns the kernel into 1/(1 + t^(1/delta))
    def g(t):
        p = zeta / (1.0 + t ** (1.0 / delta))
        return -math.expm1(b * math.log1p(-p))

    spec = QuadratureSpec(rel_tol=rel_tol, abs_tol=0.0, max_subdivisions=500)
    head = integrate_1d(g, 0.0, 1.0, spec)
    tail = integrate_1d(g, 1.0, math.inf, spec)
    return scale**delta * (head + tail)


# -- quadrature --------------------------------------------------------------

def _check(val, err, spec, what):
    bound = max(spec.abs_tol, spec.rel_tol * abs(val))
    if not np.isfinite(val) or err > bound:
        raise NumericalError(
            f"{what}: error estimate {err:.3g} exceeds tolerance {bound:.3g}",
            code="TOLERANCE_NOT_MET",
            estimate=val,
            error=err,
        )


_MIN_EPSREL = 50 * np.finfo(float).eps * 1.01


def _quad(f, a, b, spec):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        # QUADPACK refuses epsrel below 50 machine epsilons; the requested
        # tolerance is still enforced by _check
        return integrate.quad(
            f, a, b, epsabs=spec.abs_tol, epsrel=max(spec.rel_tol, _MIN_EPSREL), limit=spec.max_subdivisions
        )


def integrate_1d(f: Callable[[float], float], a: float, b: float, spec: QuadratureSpec = SPECIAL):
    """Integrate ``f`` over ``[a, b]``; ``b`` may be ``inf``."""
    if b == math.inf:
        if spec.semi_infinite_map == "rational":
            def g(u):
                w = 1.0 - u
                return f(a + u / w) / (w * w) if w > 0 else 0.0
        else:
            def g(u):
                w = 1.0 - u
                return f(a - math.log(w)) / w if w > 0 else 0.0
        val, err = _quad(g, 0.0, 1.0, spec)
    else:
        val, err = _quad(f, a, b, spec)
    _check(val, err, spec, "integrate_1d")
    return val


Bound = Union[float, Callable[[float], float]]


@dataclass(frozen=True)
class Region2D:
    """``{(u, v): u0 <= u <= u1, v0(u) <= v <= v1(u)}``."""

    u0: float
    u1: float
    v0: Bound
    v1: Bound

    def bounds(self, u):
        lo = self.v0(u) if callable(self.v0) else self.v0
        hi = self.v1(u) if callable(self.v1) else self.v1
        return lo, hi


def triangle(side: float) -> Region2D:
    """``{0 <= u <= side, 0 <= v <= side - u}``."""
    return Region2D(0.0, side, 0.0, lambda u: side - u)


def integrate_2d(f: Callable[[float, float], float], region: Region2D, spec: QuadratureSpec = NESTED):
    """Iterated adaptive integral of ``f(u, v)`` over ``region``.

    The inner integral runs at a tenth of the outer tolerance so that its
    error does not dominate the outer estimate.
    """
    inner = QuadratureSpec(
        rel_tol=spec.rel_tol / 10,
        abs_tol=spec.abs_tol / 10,
        max_subdivisions=spec.max_subdivisions,
    )

    def outer(u):
        lo, hi = region.bounds(u)
        if hi <= lo:
            return 0.0
        val, err = _quad(lambda v: f(u, v), lo, hi, inner)
        return val

    val, err = _quad(outer, region.u0, region.u1, spec)
    _check(val, err, spec, "integrate_2d")
    return val


@lru_cache(maxsize=None)
def _gl(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1) / 2, w / 2


def gauss_legendre(n: int, a: float = 0.0, b: float = 1.0):
    """Nodes and weights of the n-point Gauss-Legendre rule on [a, b]."""
    x, w = _gl(n)
    return a + (b - a) * x, (b - a) * w


# -- root finding ------------------------------------------------------------

def _jacobian(F, x, fx, h=1e-7):
    J = np.empty((2, 2))
    for j in range(2):
        step = h * max(1.0, abs(x[j]))
        xp = x.copy()
        xp[j] += step
        J[:, j] = (np.asarray(F(*xp), dtype=float) - fx) / step
    return J


def _bisect_coordinate(g, x0, lo, hi, tol, max_iter=200):
    glo, ghi = g(lo), g(hi)
    if np.sign(glo) == np.sign(ghi):
        return None
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm == 0 or hi - lo < tol * max(1.0, abs(mid)):
            return mid
        if np.sign(gm) == np.sign(glo):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _expand_bracket(g, x0, span=1.0, grow=2.0, tries=40):
    lo, hi = x0 - span, x0 + span
    for _ in range(tries):
        try:
            if np.sign(g(lo)) != np.sign(g(hi)):
                return lo, hi
        except (ValueError, FloatingPointError, ZeroDivisionError, OverflowError):
            pass
        span *= grow
        lo, hi = x0 - span, x0 + span
    return None


def solve_2d_root(F, init, tol=1e-12, max_iter=100, fallback_sweeps=200):
    """Find ``(x, y)`` with ``||F(x, y)|| <= tol``.

    Damped Newton with a finite-difference Jacobian and residual
    backtracking; if that stalls, alternate one-dimensional bisections on each
    coordinate (Gauss-Seidel style).
    """
    x = np.array(init, dtype=float)
    fx = np.asarray(F(*x), dtype=float)
    norm = np.linalg.norm(fx)
    for _ in range(max_iter):
        if norm <= tol:
            return float(x[0]), float(x[1])
        try:
            step = np.linalg.solve(_jacobian(F, x, fx), -fx)
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        while lam > 1e-10:
            xn = x + lam * step
            try:
                fn = np.asarray(F(*xn), dtype=float)
                nn = np.linalg.norm(fn)
            except (ValueError, FloatingPointError, ZeroDivisionError, OverflowError):
                nn = np.inf
            if np.isfinite(nn) and nn < norm:
                break
            lam *= 0.5
        else:
            break
        x, fx, norm = xn, fn, nn
    if norm <= tol:
        return float(x[0]), float(x[1])

    # coordinate-wise bisection fallback
    for _ in range(fallback_sweeps):
        for i in range(2):
            def g(t, i=i):
                z = x.copy()
                z[i] = t
                return float(F(*z)[i])
            br = _expand_bracket(g, x[i])
            if br is None:
                continue
            root = _bisect_coordinate(g, x[i], br[0], br[1], tol * 1e-3)
            if root is not None:
                x[i] = root
        fx = np.asarray(F(*x), dtype=float)
        norm = np.linalg.norm(fx)
        if norm <= tol:
            return float(x[0]), float(x[1])
    raise NumericalError(
        f"no root found; last residual {norm:.3g}",
        code="NO_CONVERGENCE",
        last=(float(x[0]), float(x[1])),
        residual=float(norm),
    )
