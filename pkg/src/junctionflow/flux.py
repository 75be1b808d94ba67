"""Concave flux models for the scalar conservation law u_t + f(u)_x = 0.

Densities live in [0, umax] and the flux f is strictly concave with
f(0) = f(umax) = 0 and f'(0) > 0 > f'(umax).  The model caches the
critical density theta (argmax of f) and exposes the pointwise
quantities the finite-volume scheme and the node coupling are built
from:

* ``demand(u)``   -- largest flux an upstream (incoming) cell can send,
                     f(u) below theta, f(theta) in congestion;
* ``supply(u)``   -- largest flux a downstream (outgoing) cell can absorb;
* ``godunov_flux``-- min(demand(left), supply(right)), the exact Riemann
                     flux sampled at zero wave speed;
* ``conjugate(u)``-- the density on the other side of theta with equal flux;
* ``free_density`` / ``congested_density`` -- the two half-branch inverses
                     of f, used to translate flux traces back to densities.

The quadratic LWR family f(u) = c*u*(umax - u) has closed forms for all
of these; any other strictly concave flux can be supplied as an
(f, f') pair and is handled by bracketed root finding.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.optimize import brentq


class DomainError(ValueError):
    """A density or flux argument lies outside its admissible interval."""


_DENSITY_SLACK = 1e-12


class FluxModel:
    """Immutable flux model; all methods accept scalars or numpy arrays."""

    def __init__(self, umax, theta, fmax, flux, dflux, kind, coefficient=None):
        if umax <= 0:
            raise ValueError("umax must be positive")
        self.umax = float(umax)
        self.theta = float(theta)
        self.fmax = float(fmax)
        self._flux = flux
        self._dflux = dflux
        self.kind = kind
        self.coefficient = coefficient
        d0 = float(dflux(0.0))
        d1 = float(dflux(self.umax))
        if not (d0 > 0.0 > d1):
            raise ValueError("flux must satisfy f'(0) > 0 > f'(umax)")
        self.lipschitz = max(abs(d0), abs(d1))
        if abs(float(flux(0.0))) > 1e-12 * max(self.fmax, 1.0):
            raise ValueError("flux must vanish at u = 0")
        if abs(float(flux(self.umax))) > 1e-12 * max(self.fmax, 1.0):
            raise ValueError("flux must vanish at u = umax")

    # -- constructors ---------------------------------------------------

    @classmethod
    def quadratic(cls, coefficient: float = 4.0, umax: float = 1.0) -> "FluxModel":
        """LWR flux f(u) = c*u*(umax - u)."""
        if coefficient <= 0:
            raise ValueError("coefficient must be positive")
        c = float(coefficient)
        um = float(umax)

        def f(u):
            return c * np.asarray(u, dtype=float) * (um - np.asarray(u, dtype=float))

        def df(u):
            return c * (um - 2.0 * np.asarray(u, dtype=float))

        return cls(um, um / 2.0, c * um * um / 4.0, f, df, "quadratic", c)

    @classmethod
    def from_callables(cls, flux: Callable, dflux: Callable, umax: float) -> "FluxModel":
        """Wrap a generic strictly concave (f, f') pair.

        theta is located by bisection on f' (strictly decreasing under
        concavity) with tolerance 1e-12 * umax.
        """
        um = float(umax)
        theta = brentq(lambda u: float(dflux(u)), 0.0, um, xtol=1e-12 * um)
        fmax = float(flux(theta))
        return cls(um, theta, fmax, flux, dflux, "custom")

    # -- pointwise quantities -------------------------------------------

    def _check_density(self, u):
        u = np.asarray(u, dtype=float)
        slack = _DENSITY_SLACK * max(self.umax, 1.0)
        if u.size and (u.min() < -slack or u.max() > self.umax + slack):
            raise DomainError(
                f"density outside [0, {self.umax}]: range [{u.min()}, {u.max()}]"
            )
        return u

    def flux(self, u):
        return self._flux(self._check_density(u))

    __call__ = flux

    def dflux(self, u):
        return self._dflux(self._check_density(u))

    def demand(self, u):
        """Max flux sendable across the right edge of a cell at density u."""
        u = self._check_density(u)
        return np.where(u <= self.theta, self._flux(u), self.fmax)

    def supply(self, u):
        """Max flux absorbable across the left edge of a cell at density u."""
        u = self._check_density(u)
        return np.where(u <= self.theta, self.fmax, self._flux(u))

    def godunov_flux(self, u_left, u_right):
        """Interface flux of the exact Riemann solution at zero speed."""
        return np.minimum(self.demand(u_left), self.supply(u_right))

    def interface_flux(self, u_left, u_right):
        """godunov_flux without domain validation; solver kernels only,
        where the scheme itself keeps the states inside [0, umax]."""
        f_l = self._flux(u_left)
        f_r = self._flux(u_right)
        d = np.where(u_left <= self.theta, f_l, self.fmax)
        s = np.where(u_right <= self.theta, self.fmax, f_r)
        return np.minimum(d, s)

    def conjugate(self, u):
        """The density != u with the same flux; fixed point at theta."""
        u = self._check_density(u)
        if self.kind == "quadratic":
            return self.umax - u
        return _vectorize_scalar(self._conjugate_scalar, u)

    def _conjugate_scalar(self, u: float) -> float:
        if abs(u - self.theta) <= 1e-14 * self.umax:
            return self.theta
        target = float(self._flux(u))
        if u < self.theta:
            lo, hi = self.theta, self.umax
        else:
            lo, hi = 0.0, self.theta
        return brentq(
            lambda v: float(self._flux(v)) - target, lo, hi, xtol=1e-14 * self.umax
        )

    # -- half-branch inverses of f --------------------------------------

    def _check_flux_value(self, q):
        q = np.asarray(q, dtype=float)
        slack = 1e-10 * max(self.fmax, 1.0)
        if q.size and (q.min() < -slack or q.max() > self.fmax + slack):
            raise DomainError(
                f"flux outside [0, {self.fmax}]: range [{q.min()}, {q.max()}]"
            )
        return np.clip(q, 0.0, self.fmax)

    def free_density(self, q):
        """Inverse of f on the free-flow branch [0, theta]."""
        q = self._check_flux_value(q)
        if self.kind == "quadratic":
            c = self.coefficient
            disc = np.maximum(self.umax * self.umax - 4.0 * q / c, 0.0)
            return 0.5 * (self.umax - np.sqrt(disc))
        return _vectorize_scalar(lambda v: self._invert_scalar(v, congested=False), q)

    def congested_density(self, q):
        """Inverse of f on the congested branch [theta, umax]."""
        q = self._check_flux_value(q)
        if self.kind == "quadratic":
            c = self.coefficient
            disc = np.maximum(self.umax * self.umax - 4.0 * q / c, 0.0)
            return 0.5 * (self.umax + np.sqrt(disc))
        return _vectorize_scalar(lambda v: self._invert_scalar(v, congested=True), q)

    def _invert_scalar(self, q: float, congested: bool) -> float:
        if q >= self.fmax:
            return self.theta
        lo, hi = (self.theta, self.umax) if congested else (0.0, self.theta)
        return brentq(
            lambda v: float(self._flux(v)) - q, lo, hi, xtol=1e-14 * self.umax
        )

    # -- wave speeds -----------------------------------------------------

    def max_wave_speed(self, u) -> float:
        """max |f'| over the given densities (0.0 for an empty array)."""
        u = np.asarray(u, dtype=float)
        if u.size == 0:
            return 0.0
        return float(np.max(np.abs(self._dflux(u))))

    def validate(self, samples: int = 101) -> None:
        """Sampled check of strict concavity and the envelope identities."""
        u = np.linspace(0.0, self.umax, samples)
        fu = self._flux(u)
        if np.max(fu) > self.fmax + 1e-12 * self.fmax:
            raise ValueError("cached maximum is not the sampled maximum")
        # chords must lie strictly below the graph at interior points
        for i in range(samples - 2):
            u1, u3 = u[i], u[i + 2]
            u2 = 0.5 * (u1 + u3)
            chord = 0.5 * (self._flux(u1) + self._flux(u3))
            if self._flux(u2) <= chord - 1e-12:
                raise ValueError("flux is not strictly concave on sampled triples")

    def __repr__(self):
        if self.kind == "quadratic":
            return f"FluxModel.quadratic(coefficient={self.coefficient}, umax={self.umax})"
        return f"FluxModel(kind={self.kind!r}, umax={self.umax}, theta={self.theta})"


def _vectorize_scalar(fn, x):
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        return float(fn(float(arr)))
    out = np.empty_like(arr)
    flat = arr.ravel()
    oflat = out.ravel()
    for i in range(flat.size):
        oflat[i] = fn(float(flat[i]))
    return out
