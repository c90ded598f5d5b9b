"""Fractional Laplacian on the plane.

``apply_pv`` evaluates

    -(-Delta)^{a/2} f(x) = c_{2,a} p.v. int (f(x+z) - f(x) - z.grad f(x) 1_{|z|<=rho}) |z|^{-2-a} dz

on a polar grid around ``x``.  The disc ``|z| <= rho`` uses the Taylor-compensated
integrand with Gauss-Jacobi nodes carrying the ``r^{1-a}`` weight, the annulus
up to ``outer_radius`` uses graded Gauss-Legendre panels, and the rest of the
plane is mapped onto ``(0, 1]`` by ``v = r_far / r`` and integrated with a
tanh-sinh rule, so functions of polynomial growth need no truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import expit, gamma, roots_jacobi, roots_legendre

from .errors import AccuracyError, DomainError

Field = Callable[[np.ndarray], np.ndarray]

_PANEL_NODES = 8


def c_norm(a: float) -> float:
    """Normalization c_{2,a} making the singular integral equal to -|k|^a on e^{ik.x}."""
    if not 0.0 < a < 2.0:
        raise DomainError(f"c_norm needs 0 < a < 2, got {a}")
    # -2^a G(1+a/2) / (pi G(-a/2)), with G(-a/2) = G(2-a/2) / ((a/2)(a/2-1)) to keep away from the pole
    first = 2.0**a * a * (2.0 - a) * gamma(1.0 + a / 2.0) / (4.0 * math.pi * gamma(2.0 - a / 2.0))
    second = c_norm_sine_form(a)
    if abs(first - second) > 1e-12 * abs(first):
        raise AccuracyError(f"closed forms of c_2,a disagree at a={a}: {first!r} vs {second!r}")
    return float(first)


def _sin_half_pi(a: float) -> float:
    # sin(a pi/2) = sin((2-a) pi/2), the latter is accurate as a -> 2
    return math.sin(a * math.pi / 2.0) if a <= 1.0 else math.sin((2.0 - a) * math.pi / 2.0)


def c_norm_sine_form(a: float) -> float:
    return float(2.0**a * a * a * gamma(a / 2.0) ** 2 * _sin_half_pi(a) / (4.0 * math.pi**2))


def power_law_coefficient(a: float, eps: float) -> float:
    """C with -(-Delta)^{a/2} |x|^eps = C |x|^{eps - a} in two dimensions.

    Riesz-potential identity.  Positive for 0 < eps < a < 2.
    """
    if not (0.0 < eps < a < 2.0):
        raise DomainError(f"need 0 < eps < a < 2, got a={a}, eps={eps}")
    return float(
        -(2.0**a)
        * gamma((2.0 + eps) / 2.0)
        * gamma((a - eps) / 2.0)
        / (gamma(-eps / 2.0) * gamma((2.0 + eps - a) / 2.0))
    )


def power_law_coefficient_swapped(a: float, eps: float) -> float:
    """The same Gamma ratio with Gamma((2+a-eps)/2) in the denominator.

    Not the action of the operator; kept to quantify how far this common
    variant of the identity is from the true coefficient.
    """
    if not (0.0 < eps < a < 2.0):
        raise DomainError(f"need 0 < eps < a < 2, got a={a}, eps={eps}")
    return float(
        -(2.0**a)
        * gamma((2.0 + eps) / 2.0)
        * gamma((a - eps) / 2.0)
        / (gamma(-eps / 2.0) * gamma((2.0 + a - eps) / 2.0))
    )


def exact_power_law(a: float, eps: float, x) -> float:
    """Exact value of -(-Delta)^{a/2}(|.|^eps) at the nonzero point x."""
    r = float(np.hypot(*np.asarray(x, dtype=float)))
    if r == 0.0:
        raise DomainError("exact_power_law is singular at x = 0")
    return power_law_coefficient(a, eps) * r ** (eps - a)


@dataclass(frozen=True)
class PvQuadratureParams:
    """Polar quadrature layout.

    ``inner_radius=None`` picks ``min(1, |x|/2)`` (1 at the origin).
    ``radial_nodes // 8`` Gauss-Jacobi nodes cover the inner disc and about
    ``radial_nodes // 4`` tanh-sinh nodes the mapped exterior; the exterior
    error estimate (full vs. half rule) must stay below ``tail_rtol`` times
    the result or AccuracyError is raised.  Annulus panels
    grow geometrically by ``panel_ratio`` and are capped at
    ``max_panel_width`` when given (needed for oscillatory integrands).
    """

    inner_radius: float | None = None
    outer_radius: float = 1.0e3
    radial_nodes: int = 512
    angular_nodes: int = 128
    panel_ratio: float = 1.25
    max_panel_width: float | None = None
    tail_rtol: float = 1e-4

    def validate(self):
        if self.inner_radius is not None and not 0.0 < self.inner_radius < self.outer_radius:
            raise DomainError("need 0 < inner_radius < outer_radius")
        if self.radial_nodes < 32 or self.angular_nodes < 16:
            raise DomainError("need radial_nodes >= 32 and angular_nodes >= 16")
        if self.angular_nodes % 2:
            raise DomainError("angular_nodes must be even")
        if self.panel_ratio <= 1.0:
            raise DomainError("panel_ratio must exceed 1")


DEFAULT_PV = PvQuadratureParams()


@lru_cache(maxsize=64)
def _jacobi01(n: int, beta: float):
    """Nodes/weights on (0,1) for the weight s^beta."""
    t, w = roots_jacobi(n, 0.0, beta)
    s = 0.5 * (t + 1.0)
    return s, w * 0.5 ** (1.0 + beta)


@lru_cache(maxsize=4)
def _legendre01(n: int):
    t, w = roots_legendre(n)
    return 0.5 * (t + 1.0), 0.5 * w


def _annulus_breaks(r0: float, r1: float, dist: float, q: PvQuadratureParams) -> np.ndarray:
    """Panel edges on [r0, r1], graded geometrically from r0 and toward r = dist."""
    ratio = q.panel_ratio
    pts = [r0]
    while pts[-1] * ratio < r1:
        pts.append(pts[-1] * ratio)
    pts.append(r1)
    if r0 < dist < r1:
        # the origin sits at radius |x| along the direction -x/|x|
        d = r0 * 0.5
        while d < r1:
            for p in (dist - d, dist + d):
                if r0 < p < r1:
                    pts.append(p)
            d *= ratio
        pts.append(dist)
    edges = np.unique(np.asarray(pts))
    if q.max_panel_width is not None:
        fine = [edges[0]]
        for lo, hi in zip(edges[:-1], edges[1:]):
            m = max(1, int(math.ceil((hi - lo) / q.max_panel_width)))
            fine.extend(np.linspace(lo, hi, m + 1)[1:])
        edges = np.asarray(fine)
    return edges


def _directions(n: int) -> np.ndarray:
    th = 2.0 * np.pi * np.arange(n) / n
    return np.stack([np.cos(th), np.sin(th)], axis=-1)


def pv_integral(
    f: Field,
    grad_f: Callable[[np.ndarray], np.ndarray] | None,
    x,
    a: float,
    q: PvQuadratureParams = DEFAULT_PV,
    return_tail: bool = False,
):
    """p.v. int (f(x+z) - f(x) - z.grad f(x) 1_{|z|<=rho}) |z|^{-2-a} dz, no c_{2,a} factor.

    ``f`` maps arrays of shape (..., 2) to (...).  ``grad_f`` may be None, in
    which case the gradient term is dropped; it integrates to zero over each
    circle and the symmetric angular rule cancels it exactly.
    """
    if not 0.0 < a < 2.0:
        raise DomainError(f"need 0 < a < 2, got {a}")
    q.validate()
    x = np.asarray(x, dtype=float)
    dist = float(np.hypot(*x))
    rho = q.inner_radius if q.inner_radius is not None else (min(1.0, dist / 2.0) if dist > 0 else 1.0)
    r_far = max(q.outer_radius, 2.0 * dist + rho)
    omega = _directions(q.angular_nodes)
    dtheta = 2.0 * np.pi / q.angular_nodes
    fx = float(f(x[None, :])[0])
    g = np.zeros(2) if grad_f is None else np.asarray(grad_f(x), dtype=float)

    # inner disc: (f(x+r w) - f(x) - r w.g) / r^2 against r^{1-a} dr
    s, w = _jacobi01(max(q.radial_nodes // 8, 16), 1.0 - a)
    r = rho * s
    z = r[:, None, None] * omega[None, :, :]
    vals = f(x + z) - fx - z @ g
    inner = rho ** (2.0 - a) * np.sum(w * vals.sum(axis=1) / r**2) * dtheta

    # annulus [rho, r_far]: uncompensated difference; the z.g term averages out
    edges = _annulus_breaks(rho, r_far, dist, q)
    t, wt = _legendre01(_PANEL_NODES)
    lo, hi = edges[:-1], edges[1:]
    r = (lo[:, None] + (hi - lo)[:, None] * t[None, :]).ravel()
    wr = ((hi - lo)[:, None] * wt[None, :]).ravel()
    angular = _angular_sum(f, x, r, omega) * dtheta
    mid = np.sum(wr * r ** (-1.0 - a) * angular) - 2.0 * np.pi * fx * (rho**-a - r_far**-a) / a

    # exterior r > r_far with v = r_far / r: int_0^1 v^{a-1} G(r_far/v) dv / r_far^a
    ext, ext_half, cut = _exterior(f, x, omega, a, r_far, q.radial_nodes)
    ext *= dtheta
    ext_half *= dtheta
    const_tail = 2.0 * np.pi * fx * r_far**-a / a
    outer = ext - const_tail
    total = inner + mid + outer
    tail_err = abs(ext - ext_half) + cut * dtheta
    if tail_err > q.tail_rtol * max(abs(total), 1e-300) and tail_err > 1e-14:
        raise AccuracyError(
            f"exterior quadrature not converged at x={x.tolist()}: "
            f"estimate {tail_err:.3e} vs result {total:.3e}"
        )
    if return_tail:
        return total, tail_err
    return total


def _angular_sum(f: Field, x: np.ndarray, r: np.ndarray, omega: np.ndarray) -> np.ndarray:
    out = np.empty(r.shape[0])
    step = max(1, 2_000_000 // (omega.shape[0] * 2))
    for i in range(0, r.shape[0], step):
        rr = r[i : i + step]
        out[i : i + step] = f(x + rr[:, None, None] * omega[None, :, :]).sum(axis=1)
    return out


@lru_cache(maxsize=8)
def _tanh_sinh01(n: int):
    """Tanh-sinh nodes on (0, 1), reaching far towards 0; every other node forms the half rule."""
    t = np.linspace(-4.5, 3.5, 2 * (n // 2) + 1)
    h = t[1] - t[0]
    u = np.pi * np.sinh(t)
    v = expit(u)
    w = h * np.pi * np.cosh(t) * expit(u) * expit(-u)
    keep = v > _V_FLOOR
    return v, w, keep


_V_FLOOR = 1e-40


def _exterior(f, x, omega, a, r_far, n_nodes):
    """Returns (full, half, cut) where cut estimates the piece below the smallest node."""
    v, w, keep = _tanh_sinh01(max(n_nodes // 4, 32))
    vals = np.zeros_like(v)
    r = r_far / v[keep]
    vals[keep] = v[keep] ** (a - 1.0) * _angular_sum(f, x, r, omega)
    full = float(np.sum(w * vals))
    half = float(2.0 * np.sum(w[::2] * vals[::2]))
    # integrand ~ C v^p near 0: add int_0^{v0} C v^p dv
    i0 = int(np.argmax(keep))
    v0, v1, g0, g1 = v[i0], v[i0 + 1], vals[i0], vals[i0 + 1]
    cut = 0.0
    if g0 != 0.0 and g0 * g1 > 0.0:
        p = math.log(g1 / g0) / math.log(v1 / v0)
        if p <= -1.0:
            raise AccuracyError("integrand grows too fast at infinity for the singular integral to converge")
        cut = g0 * v0 / (p + 1.0)
    scale = r_far**-a
    return (full + cut) * scale, (half + cut) * scale, abs(cut) * scale


def apply_pv(f: Field, grad_f, x, a: float, q: PvQuadratureParams = DEFAULT_PV) -> float:
    """-(-Delta)^{a/2} f(x) by principal-value quadrature."""
    return c_norm(a) * pv_integral(f, grad_f, x, a, q)


def lemma_constant(a: float, eps: float) -> float:
    """C_{eps,a} of the smoothed power lower bound."""
    return (2.0 - eps) / (math.sqrt(4.0 - eps) * (3.0 - a) * eps) + 1.0 / (a * eps)


def smoothed_power(eps: float, eta: float):
    def phi(p):
        return (np.sum(p * p, axis=-1) + eta * eta) ** (eps / 2.0)

    def grad(p):
        p = np.asarray(p, dtype=float)
        return eps * (p @ p + eta * eta) ** (eps / 2.0 - 1.0) * p

    return phi, grad


def smoothed_power_lower_bound(a: float, eps: float, eta: float, x, q: PvQuadratureParams = DEFAULT_PV):
    """(lhs, rhs) of the lower bound for phi_eta(x) = (|x|^2 + eta^2)^{eps/2}.

    lhs is the bare singular integral (no c_{2,a}); the contract is lhs >= rhs.
    """
    if not (1.0 < a < 2.0 and 0.0 < eps < 1.0 and eta > 0.0):
        raise DomainError(f"need 1<a<2, 0<eps<1, eta>0; got a={a}, eps={eps}, eta={eta}")
    x = np.asarray(x, dtype=float)
    r = float(np.hypot(*x))
    if r == 0.0:
        raise DomainError("x must be nonzero")
    phi, grad = smoothed_power(eps, eta)
    lhs = pv_integral(phi, grad, x, a, q)
    rhs = (eps**2 * math.pi / (2.0 * (2.0 - a))) * (r * r + eta * eta) ** ((eps - 4.0) / 2.0) * r ** (
        4.0 - a
    ) - eps * 2.0 * math.pi * lemma_constant(a, eps) * r ** (eps - a)
    return lhs, rhs


def japanese_power(eps: float):
    """m_eps(x) = <x>^eps = (1 + |x|^2)^{eps/2} and its gradient."""
    return smoothed_power(eps, 1.0)


def moment_symbol_bound(a: float, eps: float, x, q: PvQuadratureParams = DEFAULT_PV):
    """(lhs, rhs_shape) = (-(-Delta)^{a/2} m_eps(x), <x>^{eps-a})."""
    if not 0.0 < eps < a < 2.0:
        raise DomainError(f"need 0 < eps < a < 2, got a={a}, eps={eps}")
    x = np.asarray(x, dtype=float)
    phi, grad = japanese_power(eps)
    lhs = apply_pv(phi, grad, x, a, q)
    return lhs, (1.0 + x @ x) ** ((eps - a) / 2.0)
