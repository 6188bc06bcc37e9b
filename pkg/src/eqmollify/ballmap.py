"""Radial diffeomorphism onto the unit ball and compactly supported shifts.

A strictly increasing radial profile maps (0, 1) onto (0, infinity): it is
the identity near zero, blows up like ``exp(1/(1-r)^2)`` near one, and the
two regimes are joined by a smooth monotone bridge.  Compressing space
through the inverse profile gives a diffeomorphism ``ball_compress`` from
R^n onto the open unit ball which is the identity on a neighborhood of the
origin.  Conjugating a translation by that diffeomorphism yields a shift map
that moves points near the center by almost exactly the translation vector
while leaving the complement of the ball untouched.

Beyond ``R_IDENTITY`` (where the profile exceeds 1e12) a shift moves points
by less than double precision can resolve, so the maps return their input
bit for bit from that radius outward instead of round-tripping through the
profile.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BallDomainError",
    "ConvergenceError",
    "R_IDENTITY",
    "R_OVERFLOW",
    "BRIDGE_LO",
    "BRIDGE_HI",
    "smooth_step",
    "smooth_step_derivative",
    "radial_profile",
    "radial_profile_derivative",
    "radial_profile_inverse",
    "monotonicity_certificate",
    "ball_compress",
    "ball_expand",
    "shift_points",
    "shift_with_jacobian",
    "ShiftMap",
]


class BallDomainError(ValueError):
    """A point lies outside the domain where a ball map is representable."""


class ConvergenceError(RuntimeError):
    """The profile inversion did not converge; the profile would have to be
    non-monotone for this to happen, so it must abort rather than guess."""


# The profile is the identity up to BRIDGE_LO, pure exp growth from BRIDGE_HI
# on.  The window is [1/3 + 1/30, 2/3 - 1/30], strictly inside the nominal
# transition third so both regimes hold on closed neighborhoods.
BRIDGE_LO = 1.0 / 3.0 + 1.0 / 30.0
BRIDGE_HI = 2.0 / 3.0 - 1.0 / 30.0

# exp(1/(1-r)^2) at the end of the bridge window; start of the closed-form
# inverse branch.
_OUTER_AT_HI = math.exp(1.0 / (1.0 - BRIDGE_HI) ** 2)

# Where the profile passes 1e12: outward of this a shift changes points by
# less than 1 ulp, so maps return inputs unchanged.
R_IDENTITY = 1.0 - 1.0 / math.sqrt(math.log(1e12))

# Where exp(1/(1-r)^2) overflows double precision (with margin).
R_OVERFLOW = 0.96


def _flat_exp(u):
    """exp(-1/u) for u > 0, exact zero otherwise (all derivatives flat at 0)."""
    u = np.asarray(u, dtype=float)
    out = np.zeros(u.shape)
    pos = u > 0.0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def smooth_step(u):
    """C-infinity step: 0 for u <= 0, 1 for u >= 1, strictly monotone between."""
    u = np.asarray(u, dtype=float)
    scalar = u.ndim == 0
    u = np.atleast_1d(u)
    a = _flat_exp(u)
    b = _flat_exp(1.0 - u)
    out = np.where(u >= 1.0, 1.0, np.where(u <= 0.0, 0.0, a / np.where(a + b > 0, a + b, 1.0)))
    return float(out[0]) if scalar else out


def smooth_step_derivative(u):
    """Derivative of ``smooth_step``; zero outside (0, 1)."""
    u = np.asarray(u, dtype=float)
    scalar = u.ndim == 0
    u = np.atleast_1d(u)
    out = np.zeros(u.shape)
    inside = (u > 0.0) & (u < 1.0)
    ui = u[inside]
    a = np.exp(-1.0 / ui)
    b = np.exp(-1.0 / (1.0 - ui))
    da = a / ui ** 2
    db = b / (1.0 - ui) ** 2
    out[inside] = (da * b + a * db) / (a + b) ** 2
    return float(out[0]) if scalar else out


def _window(r):
    return (r - BRIDGE_LO) / (BRIDGE_HI - BRIDGE_LO)


def _outer(r):
    return np.exp(1.0 / (1.0 - r) ** 2)


def _outer_derivative(r):
    return _outer(r) * 2.0 / (1.0 - r) ** 3


def _bridge(r):
    # convex blend of the two branch values across the window
    w = smooth_step(_window(r))
    return (1.0 - w) * r + w * _outer(r)


def _bridge_derivative(r):
    w = smooth_step(_window(r))
    dw = smooth_step_derivative(_window(r)) / (BRIDGE_HI - BRIDGE_LO)
    return (1.0 - w) + w * _outer_derivative(r) + dw * (_outer(r) - r)


def _check_open_unit(r, what):
    if np.any(r <= 0.0):
        raise BallDomainError("%s requires radius > 0" % what)
    if np.any(r >= R_OVERFLOW):
        raise BallDomainError(
            "%s overflows for radius >= %g (profile exceeds double range)" % (what, R_OVERFLOW)
        )


def radial_profile(r):
    """The profile g on (0, R_OVERFLOW): identity, bridge, then exp growth."""
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    r = np.atleast_1d(r)
    _check_open_unit(r, "radial_profile")
    out = np.empty(r.shape)
    lo = r <= BRIDGE_LO
    hi = r >= BRIDGE_HI
    mid = ~(lo | hi)
    out[lo] = r[lo]
    out[mid] = _bridge(r[mid])
    out[hi] = _outer(r[hi])
    return float(out[0]) if scalar else out


def radial_profile_derivative(r):
    """dg/dr, strictly positive on the whole domain."""
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    r = np.atleast_1d(r)
    _check_open_unit(r, "radial_profile_derivative")
    out = np.empty(r.shape)
    lo = r <= BRIDGE_LO
    hi = r >= BRIDGE_HI
    mid = ~(lo | hi)
    out[lo] = 1.0
    out[mid] = _bridge_derivative(r[mid])
    out[hi] = _outer_derivative(r[hi])
    return float(out[0]) if scalar else out


def monotonicity_certificate(samples=10001):
    """Dense sample of the profile derivative over the whole domain.

    Returns (radii, derivatives).  Raises ConvergenceError if any sampled
    derivative is nonpositive; everything downstream assumes strict
    monotonicity.
    """
    r = np.linspace(1e-6, R_OVERFLOW - 1e-9, samples)
    d = radial_profile_derivative(r)
    if np.any(d <= 0.0):
        bad = r[np.argmin(d)]
        raise ConvergenceError("profile derivative nonpositive near r = %.6f" % bad)
    return r, d


def radial_profile_inverse(s, tolerance=1e-12, max_iterations=80):
    """Inverse of the profile on (0, infinity).

    Exact passthrough for s <= BRIDGE_LO, closed form on the exp branch, and
    a bracketed Newton iteration with bisection safeguard on the bridge.
    Residuals satisfy |g(r) - s| <= tolerance * max(1, s).
    """
    s = np.asarray(s, dtype=float)
    scalar = s.ndim == 0
    s = np.atleast_1d(s)
    if np.any(s <= 0.0):
        raise BallDomainError("radial_profile_inverse requires s > 0")
    out = np.empty(s.shape)
    low = s <= BRIDGE_LO
    high = s >= _OUTER_AT_HI
    mid = ~(low | high)
    out[low] = s[low]
    out[high] = 1.0 - 1.0 / np.sqrt(np.log(s[high]))
    if np.any(mid):
        out[mid] = _invert_bridge(s[mid], tolerance, max_iterations)
    return float(out[0]) if scalar else out


def _invert_bridge(s, tolerance, max_iterations):
    lo = np.full(s.shape, BRIDGE_LO)
    hi = np.full(s.shape, BRIDGE_HI)
    r = 0.5 * (lo + hi)
    f = _bridge(r) - s
    for _ in range(max_iterations):
        converged = np.abs(f) <= tolerance * np.maximum(1.0, np.abs(s))
        if np.all(converged):
            break
        active = ~converged
        ra, fa = r[active], f[active]
        # keep the bracket consistent with the sign of the residual
        la, ha = lo[active], hi[active]
        la = np.where(fa < 0.0, ra, la)
        ha = np.where(fa > 0.0, ra, ha)
        step = fa / _bridge_derivative(ra)
        trial = ra - step
        outside = (trial <= la) | (trial >= ha)
        trial[outside] = 0.5 * (la[outside] + ha[outside])
        lo[active], hi[active] = la, ha
        r[active] = trial
        f[active] = _bridge(trial) - s[active]
    else:
        raise ConvergenceError(
            "bridge inversion did not converge to %g in %d iterations"
            % (tolerance, max_iterations)
        )
    return r


def _norms(x):
    return np.linalg.norm(x, axis=-1)


def ball_compress(x):
    """Diffeomorphism h from R^n onto the open unit ball; identity near 0.

    Radially maps |x| to g^{-1}(|x|).  Accepts (n,) or (N, n).
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 1
    pts = np.atleast_2d(x).copy()
    r = _norms(pts)
    ident = r <= BRIDGE_LO  # inverse profile is exact passthrough there
    out = pts
    move = ~ident
    if np.any(move):
        rho = radial_profile_inverse(r[move])
        out[move] = pts[move] * (rho / r[move])[:, None]
    return out[0] if scalar else out


def ball_expand(u):
    """Inverse diffeomorphism h^{-1} from the open unit ball onto R^n.

    Raises BallDomainError from R_OVERFLOW outward, where the profile value
    exceeds double precision range.
    """
    u = np.asarray(u, dtype=float)
    scalar = u.ndim == 1
    pts = np.atleast_2d(u).copy()
    r = _norms(pts)
    if np.any(r >= R_OVERFLOW):
        raise BallDomainError(
            "ball_expand requires |u| < %g; the image norm overflows beyond it" % R_OVERFLOW
        )
    ident = r <= BRIDGE_LO
    move = ~ident
    if np.any(move):
        rho = radial_profile(r[move])
        pts[move] = pts[move] * (rho / r[move])[:, None]
    return pts[0] if scalar else pts


def _radial_jacobians(points, radii, value_over_r, derivative, identity_mask):
    """Jacobians of x -> (phi(|x|)/|x|) x given phi(r)/r and phi'(r).

    For a radial map the Jacobian splits into the tangential stretch
    phi(r)/r on the orthogonal complement of x and the radial stretch
    phi'(r) along x.  Rows in identity_mask get an exact identity matrix.
    """
    count, n = points.shape
    out = np.zeros((count, n, n))
    idx = np.arange(n)
    out[:, idx, idx] = 1.0
    move = ~identity_mask
    if not np.any(move):
        return out
    p = points[move]
    r = radii[move]
    unit = p / r[:, None]
    proj = unit[:, :, None] * unit[:, None, :]
    tang = value_over_r[move]
    rad = derivative[move]
    eye = np.zeros((p.shape[0], n, n))
    eye[:, idx, idx] = 1.0
    out[move] = tang[:, None, None] * (eye - proj) + rad[:, None, None] * proj
    return out


def _compress_with_jacobian(x):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    r = _norms(x)
    ident = r <= BRIDGE_LO
    move = ~ident
    rho = np.zeros(r.shape)
    val_over_r = np.ones(r.shape)
    deriv = np.ones(r.shape)
    out = x.copy()
    if np.any(move):
        rho_m = radial_profile_inverse(r[move])
        val_over_r[move] = rho_m / r[move]
        deriv[move] = 1.0 / radial_profile_derivative(rho_m)
        out[move] = x[move] * (rho_m / r[move])[:, None]
    jac = _radial_jacobians(x, r, val_over_r, deriv, ident)
    return out, jac


def _expand_with_jacobian(x):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    r = _norms(x)
    if np.any(r >= R_OVERFLOW):
        raise BallDomainError("shift evaluation left the representable ball")
    ident = r <= BRIDGE_LO
    move = ~ident
    val_over_r = np.ones(r.shape)
    deriv = np.ones(r.shape)
    out = x.copy()
    if np.any(move):
        rho_m = radial_profile(r[move])
        val_over_r[move] = rho_m / r[move]
        deriv[move] = radial_profile_derivative(r[move])
        out[move] = x[move] * (rho_m / r[move])[:, None]
    jac = _radial_jacobians(x, r, val_over_r, deriv, ident)
    return out, jac


def shift_points(x, y):
    """Apply the compactly supported shift s_y row-wise: x, y of shape (N, n).

    Equals x + y wherever the compression is the identity around both points,
    and returns x bit for bit from R_IDENTITY outward.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    scalar = x.ndim == 1
    pts = np.atleast_2d(x)
    shifts = np.atleast_2d(y)
    if shifts.shape[0] == 1 and pts.shape[0] > 1:
        shifts = np.broadcast_to(shifts, pts.shape)
    r = _norms(pts)
    out = pts.copy()
    inner = r < R_IDENTITY
    if np.any(inner):
        expanded = ball_expand(pts[inner])
        out[inner] = ball_compress(expanded + shifts[inner])
    return out[0] if scalar else out


def shift_with_jacobian(x, y):
    """Shifted points and Jacobians d s_y / dx, row-wise.

    The Jacobian is the chain product of the expansion Jacobian at x and the
    compression Jacobian at the translated point; exact identity outside
    R_IDENTITY and wherever both factors reduce to the identity.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    scalar = x.ndim == 1
    pts = np.atleast_2d(x)
    shifts = np.atleast_2d(y)
    if shifts.shape[0] == 1 and pts.shape[0] > 1:
        shifts = np.broadcast_to(shifts, pts.shape)
    count, n = pts.shape
    out = pts.copy()
    jac = np.zeros((count, n, n))
    idx = np.arange(n)
    jac[:, idx, idx] = 1.0
    r = _norms(pts)
    inner = r < R_IDENTITY
    if np.any(inner):
        expanded, jac_expand = _expand_with_jacobian(pts[inner])
        translated = expanded + shifts[inner]
        compressed, jac_compress = _compress_with_jacobian(translated)
        out[inner] = compressed
        jac[inner] = np.matmul(jac_compress, jac_expand)
    return (out[0], jac[0]) if scalar else (out, jac)


@dataclass(frozen=True)
class ShiftMap:
    """The shift s_y as a map object with batched value and Jacobian."""

    y: np.ndarray

    def __init__(self, y):
        object.__setattr__(self, "y", np.asarray(y, dtype=float))

    def apply(self, x):
        return shift_points(x, self.y)

    def jacobian(self, x):
        return shift_with_jacobian(x, self.y)[1]

    def inverse(self):
        return ShiftMap(-self.y)
