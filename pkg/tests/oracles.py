"""Slow, direct reference implementations used only by the tests."""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate


def dense_lattice_solve(u: np.ndarray, gamma: float, dx: float) -> np.ndarray:
    """O(N^2) sum of ``c r^|i-j| u_j`` with an explicit matrix."""
    h = math.sqrt(gamma) * dx
    c, r = math.tanh(h / 2) / gamma, math.exp(-h)
    idx = np.arange(u.size)
    K = c * r ** np.abs(idx[:, None] - idx[None, :])
    return K @ u


def dense_green_solve(u: np.ndarray, x: np.ndarray, gamma: float, dx: float) -> np.ndarray:
    """Midpoint quadrature of the continuous Green function, O(N^2)."""
    s = math.sqrt(gamma)
    G = np.exp(-s * np.abs(x[:, None] - x[None, :])) / (2 * s)
    return dx * G @ u


def quad_green_solve(f, x_eval, gamma: float, lo: float, hi: float, kinks=()) -> np.ndarray:
    """Adaptive quadrature of ``G * f`` for a compactly supported function f."""
    s = math.sqrt(gamma)
    out = []
    for x in x_eval:
        pts = sorted({p for p in (*kinks, x) if lo < p < hi})
        val = integrate.quad(lambda y: math.exp(-s * abs(x - y)) / (2 * s) * f(y), lo, hi, points=pts, limit=200)[0]
        out.append(val)
    return np.array(out)


def loop_gradient(u: np.ndarray, v: np.ndarray, gamma: float, dx: float) -> np.ndarray:
    """Running integral of ``gamma v - u`` with a half-cell at the evaluation point."""
    out = np.zeros_like(u)
    # lattice tail of v left of the grid
    acc = gamma * v[0] / (math.exp(math.sqrt(gamma) * dx) - 1)
    for i in range(u.size):
        f = gamma * v[i] - u[i]
        out[i] = dx * (acc + 0.5 * f)
        acc += f
    return out


def loop_step(u, dvdx, m, q, eps, dx, dt, drift=True):
    """One explicit finite-volume step written face by face."""
    n = len(u)
    F = [0.0] * (n + 1)
    for i in range(n - 1):
        a, b = u[i] + eps, u[i + 1] + eps
        flux = (b**m - a**m) / dx
        if drift:
            c = 0.5 * (dvdx[i] + dvdx[i + 1])
            up = i if c > 0 else i + 1
            flux -= (u[up] + eps) ** (q - 2) * u[up] * c
        F[i + 1] = flux
    return np.array([u[i] + dt / dx * (F[i + 1] - F[i]) for i in range(n)])


def rk4_curve(velocity, times, x0, substeps: int = 16) -> np.ndarray:
    """Classical RK4 for ``x' = velocity(t, x)`` with several substeps per frame."""
    xs = [x0]
    x = x0
    for k in range(len(times) - 1):
        h = (times[k + 1] - times[k]) / substeps
        t = times[k]
        for _ in range(substeps):
            k1 = velocity(t, x)
            k2 = velocity(t + h / 2, x + h / 2 * k1)
            k3 = velocity(t + h / 2, x + h / 2 * k2)
            k4 = velocity(t + h, x + h * k3)
            x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
        xs.append(x)
    return np.array(xs)


def frame_velocity(u, dvdx, faces, centers, m, q, eps, convention="intro"):
    """Velocity ``-dw/dx + (u+eps)^(q-3) u dv/dx`` at one frame as a function of x."""
    dx = faces[1] - faces[0]
    w = m / (m - 1) * (u + eps) ** (m - 1)
    gw = np.diff(w) / dx
    ue = u + eps
    mob = np.where(ue > 0, ue ** (q - 3) * u, 0.0)
    drift = mob * dvdx
    sign = 1.0 if convention == "intro" else -1.0

    def vel(x):
        return sign * (-np.interp(x, faces[1:-1], gw) + np.interp(x, centers, drift))

    return vel


def barenblatt_residual(value, m, x, t, h=1e-4) -> float:
    """``U_t - (U^m)_xx`` by central differences."""
    ut = (value(x, t + h) - value(x, t - h)) / (2 * h)
    p = lambda y: value(y, t) ** m  # noqa: E731
    pxx = (p(x + h) - 2 * p(x) + p(x - h)) / (h * h)
    return float(ut - pxx)
