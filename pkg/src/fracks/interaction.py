"""Attractive power kernels, their cutoff version, and the dissipation integrand.

K(x) = -x / |x|^alpha is minus the gradient of W(x) = |x|^{2-alpha} / (2-alpha).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularityError


@dataclass(frozen=True)
class KernelParams:
    alpha: float
    chi: float = 1.0
    eta: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise DomainError(f"kernel exponent must lie in (0, 2), got {self.alpha}")
        if not self.chi >= 0.0:
            raise DomainError(f"sensitivity must be nonnegative, got {self.chi}")
        if not self.eta >= 0.0:
            raise DomainError(f"cutoff must be nonnegative, got {self.eta}")


def _norm(x: np.ndarray) -> np.ndarray:
    return np.hypot(x[..., 0], x[..., 1])


def k_alpha(x, p: KernelParams) -> np.ndarray:
    """-x / |x|^alpha, or -x / max(|x|, eta)^alpha when eta > 0.  Vectorized over leading axes."""
    x = np.asarray(x, dtype=float)
    r = _norm(x)
    if p.eta > 0.0:
        r = np.maximum(r, p.eta)
    elif np.any(r == 0.0):
        raise SingularityError("kernel evaluated at the origin without cutoff")
    return -x * (r ** -p.alpha)[..., None]


def k_alpha_cutoff_gap(x, p: KernelParams, eps: float, a: float | None = None) -> np.ndarray:
    """|K(x) - K_eta(x)|, checked against 1_{|x|<=eta}|x|^{1-alpha} <= eta^{1-eps}|x|^{eps-a}.

    ``a`` defaults to alpha (the fair-competition case where the second bound
    is used).  Raises ArithmeticError if either inequality fails.
    """
    if not p.eta > 0.0:
        raise DomainError("cutoff gap needs eta > 0")
    if not 0.0 < eps < 1.0:
        raise DomainError("eps must lie in (0, 1)")
    a = p.alpha if a is None else a
    x = np.asarray(x, dtype=float)
    r = _norm(x)
    if np.any(r == 0.0):
        raise SingularityError("gap undefined at the origin")
    free = KernelParams(p.alpha, p.chi, 0.0)
    gap = _norm(k_alpha(x, free) - k_alpha(x, p))
    inner = np.where(r <= p.eta, r ** (1.0 - p.alpha), 0.0)
    outer = p.eta ** (1.0 - eps) * r ** (eps - a)
    tol = 1e-12 * np.maximum(1.0, inner)
    if np.any(gap > inner + tol) or np.any(inner > outer * (1 + 1e-12)):
        raise ArithmeticError("cutoff gap bound violated")
    return gap


def div_k_alpha(x, alpha: float) -> np.ndarray:
    """Divergence of -x/|x|^alpha in the plane: -(2 - alpha)|x|^{-alpha}."""
    x = np.asarray(x, dtype=float)
    r = _norm(x)
    if np.any(r == 0.0):
        raise SingularityError("divergence evaluated at the origin")
    return -(2.0 - alpha) * r**-alpha


def grad_k_alpha(x, alpha: float) -> np.ndarray:
    """Jacobian dK_i/dx_j = -(I - alpha x x^T/|x|^2)|x|^{-alpha}, shape (..., 2, 2)."""
    x = np.asarray(x, dtype=float)
    r = _norm(x)
    if np.any(r == 0.0):
        raise SingularityError("Jacobian evaluated at the origin")
    u = x / r[..., None]
    outer = u[..., :, None] * u[..., None, :]
    return -(np.eye(2) - alpha * outer) * (r**-alpha)[..., None, None]


def phi(x, y):
    """(x - y)(ln x - ln y), nonnegative, convex and 1-homogeneous on the open quadrant."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise DomainError("phi needs strictly positive arguments")
    return (x - y) * (np.log(x) - np.log(y))


def phi_log_inequality(a: float, b: float, alpha_w: float, beta_w: float) -> bool:
    """Check (alpha a - beta b)(ln a - ln b) >= (a - b)(alpha - beta).

    Raises ArithmeticError on violation.  Returns True iff equality holds,
    which for positive weights happens exactly when a = b.
    """
    if a <= 0 or b <= 0:
        raise DomainError("a and b must be positive")
    if alpha_w < 0 or beta_w < 0:
        raise DomainError("weights must be nonnegative")
    lhs = (alpha_w * a - beta_w * b) * (np.log(a) - np.log(b))
    rhs = (a - b) * (alpha_w - beta_w)
    scale = 1e-12 * max(1.0, abs(lhs), abs(rhs))
    if lhs < rhs - scale:
        raise ArithmeticError(f"log inequality violated: {lhs} < {rhs}")
    return bool(abs(lhs - rhs) <= scale)


def monotone_gradient_gap(x, y, kappa: float) -> np.ndarray:
    """(<x>^{kappa-2} x - <y>^{kappa-2} y).(x - y), nonnegative for kappa >= 1."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    jx = (1.0 + np.sum(x * x, axis=-1)) ** ((kappa - 2.0) / 2.0)
    jy = (1.0 + np.sum(y * y, axis=-1)) ** ((kappa - 2.0) / 2.0)
    return np.sum((jx[..., None] * x - jy[..., None] * y) * (x - y), axis=-1)
