"""Checkable ingredients of the gradient estimate and pointwise inequalities.

Nothing here evolves anything: these are evaluators for the Bernstein
transform ``psi``, its barrier constant, the cutoff family and the Holder
inequality, plus the discrete Lipschitz diagnostic used by epsilon sweeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .model import ScalarField, Trajectory

MARGIN_TOL = 1e-12


@dataclass(frozen=True)
class PsiTransform:
    """``psi(r) = L (r/3)(4 - r)`` on ``[0, 1]``."""

    m: float
    L: float

    @classmethod
    def from_data(cls, m: float, u0_sup: float, epsilon: float) -> "PsiTransform":
        """Scale ``L = m/(m-1) (sup u0 + 2 + eps)^(m-1)``."""
        return cls(m, m / (m - 1.0) * (u0_sup + 2.0 + epsilon) ** (m - 1.0))

    def lower_range(self, epsilon: float) -> float:
        """Smallest attainable ``r``: the preimage of ``m/(m-1) eps^(m-1)``."""
        m = self.m
        return 2.0 - math.sqrt(4.0 - 3.0 * m * epsilon ** (m - 1.0) / ((m - 1.0) * self.L))


def psi_eval(p: PsiTransform, r: float) -> tuple[float, float, float]:
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"r={r} outside [0, 1]")
    L = p.L
    return L * r * (4.0 - r) / 3.0, 2.0 * L / 3.0 * (2.0 - r), -2.0 * L / 3.0


def psi_inverse(p: PsiTransform, w):
    """``r`` with ``psi(r) = w`` on the increasing branch."""
    return 2.0 - np.sqrt(4.0 - 3.0 * np.asarray(w) / p.L)


def barrier_constant(m):
    """``m (11 m - 3) / (12 (m - 1))``; exact for int or Fraction input."""
    if isinstance(m, (int, Fraction)) and not isinstance(m, bool):
        m = Fraction(m)
        if m <= 1:
            raise ValueError("m must exceed 1")
        return m * (11 * m - 3) / (12 * (m - 1))
    m = float(m)
    if not m > 1:
        raise ValueError("m must exceed 1")
    return m * (11.0 * m - 3.0) / (12.0 * (m - 1.0))


def barrier_coefficient(p: PsiTransform, r):
    """``(m-1) psi (psi''/psi')' + m psi''`` at ``r``."""
    r = np.asarray(r, dtype=float)
    L, m = p.L, p.m
    psi = L * r * (4.0 - r) / 3.0
    ratio = -1.0 / (2.0 - r)  # psi''/psi'
    return (m - 1.0) * psi * (-(ratio**2)) + m * (-2.0 * L / 3.0)


@dataclass
class RatioReport:
    samples: int
    ratio_min: float
    ratio_max: float
    dratio_min: float
    dratio_max: float
    coefficient_max: float
    barrier: float
    violations: list[tuple[str, float]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def ratio_bounds_check(p: PsiTransform, samples: int = 1001) -> RatioReport:
    """Check ``1/2 <= |psi''/psi'| <= 1``, ``-1 <= (psi''/psi')' <= -1/4`` and the barrier inequality."""
    if samples < 100:
        raise ValueError("need at least 100 samples")
    r = np.linspace(0.0, 1.0, samples)
    d1 = 2.0 * p.L / 3.0 * (2.0 - r)
    d2 = np.full_like(r, -2.0 * p.L / 3.0)
    ratio = d2 / d1
    # d/dr (psi''/psi') = (psi' psi''' - psi''^2) / psi'^2 with psi''' = 0
    dratio = -(d2**2) / d1**2
    coef = barrier_coefficient(p, r)
    M = float(barrier_constant(p.m))
    tol = 1e-12
    violations = []
    for name, bad in (
        ("ratio_lower", np.abs(ratio) < 0.5 - tol),
        ("ratio_upper", np.abs(ratio) > 1.0 + tol),
        ("dratio_lower", dratio < -1.0 - tol),
        ("dratio_upper", dratio > -0.25 + tol),
        ("dratio_identity", np.abs(dratio + ratio**2) > tol),
        ("barrier", coef > -M + tol * max(1.0, M)),
    ):
        violations += [(name, float(x)) for x in r[bad]]
    return RatioReport(
        samples=samples,
        ratio_min=float(np.abs(ratio).min()),
        ratio_max=float(np.abs(ratio).max()),
        dratio_min=float(dratio.min()),
        dratio_max=float(dratio.max()),
        coefficient_max=float(coef.max()),
        barrier=M,
        violations=violations,
    )


CUTOFF_COEFFICIENTS = (2.0, 8.0)


def _cutoff_parts(s: np.ndarray, c: float):
    """Value, first and second derivative of the base cutoff at ``s``."""
    a = np.abs(s)
    sgn = np.sign(s)
    val = np.zeros_like(a)
    d1 = np.zeros_like(a)
    d2 = np.zeros_like(a)
    flat = a <= 1.0
    inner = (a > 1.0) & (a <= 1.5)
    outer = (a > 1.5) & (a < 2.0)
    val[flat] = 1.0
    t = a[inner] - 1.0
    val[inner] = 1.0 - c * t**4
    d1[inner] = -4.0 * c * t**3 * sgn[inner]
    d2[inner] = -12.0 * c * t**2
    t = 2.0 - a[outer]
    val[outer] = c * t**4
    d1[outer] = -4.0 * c * t**3 * sgn[outer]
    d2[outer] = 12.0 * c * t**2
    return val, d1, d2


def cutoff_eval(k: int, x, coefficient: float = 8.0):
    """``eta_k(x) = eta(x - k)``, the piecewise quartic cutoff supported on ``[k-2, k+2]``.

    With ``coefficient=2`` the two quartic pieces do not meet (the value
    jumps from 7/8 to 1/8 at ``|x - k| = 3/2``); ``coefficient=8`` joins
    them in C^1 and is the default.
    """
    if coefficient not in CUTOFF_COEFFICIENTS:
        raise ValueError("coefficient must be 2 or 8")
    s = np.asarray(x, dtype=float) - k
    val = _cutoff_parts(np.atleast_1d(s), float(coefficient))[0]
    return float(val[0]) if np.ndim(x) == 0 else val


def cutoff_derivatives(k: int, x, coefficient: float = 8.0):
    s = np.atleast_1d(np.asarray(x, dtype=float) - k)
    return _cutoff_parts(s, float(coefficient))


def cutoff_property_check(coefficient: float = 8.0, samples: int = 20001, ks=range(-2, 3)):
    """Smallest ``(c1, c2, c3)`` with ``|eta'| <= c1 eta^(3/4)`` and ``-c2 eta <= eta'' <= c3``.

    Sampled on one fixed grid for every shift ``k``; raises if the constants
    depend on ``k`` beyond sampling resolution or a ratio is unbounded.
    """
    if coefficient != 8.0:
        raise ValueError("only the continuous family (coefficient 8) satisfies the properties")
    ks = list(ks)
    x = np.linspace(min(ks) - 2.5, max(ks) + 2.5, samples * len(ks))
    per_k = []
    for k in ks:
        val, d1, d2 = cutoff_derivatives(k, x, coefficient)
        pos = val > 0
        if np.any(np.abs(d1[~pos]) > 0) or np.any(d2[~pos] < 0):
            raise ArithmeticError("derivative nonzero outside the support")
        c1 = float(np.max(np.abs(d1[pos]) / val[pos] ** 0.75))
        c2 = float(max(0.0, np.max(-d2[pos] / val[pos])))
        c3 = float(max(0.0, d2.max()))
        if not all(math.isfinite(c) for c in (c1, c2, c3)):
            raise ArithmeticError("unbounded ratio")
        per_k.append((c1, c2, c3))
    arr = np.array(per_k)
    spread = (arr.max(axis=0) - arr.min(axis=0)) / arr.max(axis=0)
    if np.any(spread > 1e-3):
        raise ArithmeticError(f"constants depend on k: {per_k}")
    c1, c2, c3 = arr.max(axis=0)
    return float(c1), float(c2), float(c3)


def holder_constant(m: float, u_sup: float, sharp: bool = False) -> float:
    """Constant of the 1<m<2 branch: ``2^(1/m-1)/(m-1) sup^(2-m)``,
    or with ``sharp`` the larger ``sup^(2-m)/(m-1)``.

    The default constant fails near the sup (m=1.5, values 1 and 0.99).
    """
    base = u_sup ** (2.0 - m) / (m - 1.0)
    return base if sharp else base * 2.0 ** (1.0 / m - 1.0)


@dataclass
class HolderReport:
    m: float
    pairs: int
    worst_margin: float
    worst_pair: tuple[float, float]

    @property
    def passed(self) -> bool:
        return self.worst_margin >= -MARGIN_TOL


def holder_check(
    f: ScalarField,
    m: float,
    u_sup: float,
    *,
    distant_pairs: int = 2000,
    sharp: bool = False,
    seed: int = 0,
) -> HolderReport:
    """Evaluate both sides of ``|u(x)-u(y)| <= ...|u^(m-1)(x) - u^(m-1)(y)|...`` on cell pairs."""
    u = np.asarray(f.values, dtype=float)
    if u.min() < 0:
        raise ValueError("field must be nonnegative")
    if u_sup < u.max():
        raise ValueError("u_sup below max of field")
    n = u.size
    rng = np.random.default_rng(seed)
    i = np.concatenate([np.arange(n - 1), rng.integers(0, n, distant_pairs)])
    j = np.concatenate([np.arange(1, n), rng.integers(0, n, distant_pairs)])
    a, b = u[i], u[j]
    lhs = np.abs(a - b)
    diff = np.abs(a ** (m - 1.0) - b ** (m - 1.0))
    if m >= 2.0:
        rhs = diff ** (1.0 / (m - 1.0))
    else:
        rhs = holder_constant(m, u_sup, sharp) * diff
    # roundoff scale of the two sides
    margin = rhs - lhs + 1e-14 * np.maximum(a, b)
    w = int(np.argmin(margin))
    return HolderReport(m, int(i.size), float(margin[w]), (float(a[w]), float(b[w])))


def lipschitz_sup(trajectory: Trajectory) -> float:
    """max over frames and faces of ``|Δ(u+eps)^(m-1)| / dx``."""
    sc = trajectory.scenario
    dx = sc.grid.dx
    best = 0.0
    for frame in trajectory.frames:
        w = (frame.u.values + sc.epsilon) ** (sc.m - 1.0)
        best = max(best, float(np.max(np.abs(np.diff(w)))) / dx)
    return best


def vacuum_slope(f: ScalarField, m: float, delta: float, tol: float = 0.0) -> float:
    """Largest ``|Δ u^(m-1+delta)| / dx`` over faces touching a vacuum cell (``u <= tol``).

    Continuity of the derivative of ``u^(m-1+delta)`` with value zero at
    vacuum points implies this tends to zero under refinement.
    """
    u = np.asarray(f.values, dtype=float)
    g = np.maximum(u, 0.0) ** (m - 1.0 + delta)
    slopes = np.abs(np.diff(g)) / f.grid.dx
    vac = u <= tol
    touch = vac[:-1] | vac[1:]
    return float(slopes[touch].max()) if np.any(touch) else 0.0
