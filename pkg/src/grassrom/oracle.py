"""Cheap high-fidelity truth generators for parametric snapshot families.

Two families are provided: a closed-form separable field whose amplitudes
and frequencies depend on the parameter, and a periodic 1D viscous Burgers
solver parametrised by the viscosity.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datastore import SnapshotSet
from .errors import ConfigurationError, InstabilityError


@dataclass(frozen=True)
class AnalyticFamilyConfig:
    n_x: int = 256
    n_s: int = 200
    t_final: float = 4.0
    mode_count: int = 4
    mu_range: tuple = (0.5, 2.5)
    # frequency of mode k is k * (1 + freq_slope * mu) * 8 pi / t_final
    freq_slope: float = 0.2

    def __post_init__(self):
        if self.n_x < 32 or self.n_s < 16:
            raise ConfigurationError(f"analytic family needs n_x >= 32 and n_s >= 16, got {self.n_x}, {self.n_s}")
        if not 1 <= self.mode_count <= 8:
            raise ConfigurationError(f"mode_count must lie in [1, 8], got {self.mode_count}")
        if not self.t_final > 0:
            raise ConfigurationError("t_final must be positive")

    @property
    def x(self):
        return np.linspace(0.0, 1.0, self.n_x)

    @property
    def times(self):
        return np.linspace(0.0, self.t_final, self.n_s)


def analytic_field(cfg, mu):
    """Sum of ``r`` separable standing waves.

    ``f = sum_k k^-1 exp(-k mu / 4) sin(k pi x) cos(8 pi k (1 + s mu) t / t_final)``
    with frequency slope ``s = cfg.freq_slope`` (1/5 by default).
    """
    x = cfg.x
    t = cfg.times
    data = np.zeros((cfg.n_x, cfg.n_s))
    for k in range(1, cfg.mode_count + 1):
        amp = np.exp(-k * mu / 4.0) / k
        omega = k * (1.0 + cfg.freq_slope * mu) * 2.0 * np.pi * 4.0 / cfg.t_final
        data += amp * np.outer(np.sin(k * np.pi * x), np.cos(omega * t))
    return SnapshotSet(mu, t, data, "u")


@dataclass(frozen=True)
class BurgersConfig:
    """Periodic Burgers problem on [0, 1).

    ``n_steps = round(t_final / dt)`` time steps are taken and every
    ``stride``-th state (including the initial one) is recorded.
    """

    n_x: int = 256
    dt: float = 1e-4
    t_final: float = 2.0
    stride: int = 100
    nu_range: tuple = (0.005, 0.05)

    def __post_init__(self):
        if self.n_x < 8:
            raise ConfigurationError("n_x must be at least 8")
        if not self.dt > 0 or not self.t_final > 0:
            raise ConfigurationError("dt and t_final must be positive")
        n = self.n_steps
        if abs(n * self.dt - self.t_final) > 1e-9 * self.t_final:
            raise ConfigurationError(f"t_final={self.t_final} is not a multiple of dt={self.dt}")
        if self.stride < 1 or n % self.stride:
            raise ConfigurationError(f"stride {self.stride} must divide the step count {n}")

    @property
    def dx(self):
        return 1.0 / self.n_x

    @property
    def n_steps(self):
        return int(round(self.t_final / self.dt))

    @property
    def x(self):
        return np.arange(self.n_x) * self.dx

    @property
    def times(self):
        return np.arange(self.n_steps // self.stride + 1) * (self.stride * self.dt)

    def initial_condition(self):
        x = self.x
        return np.sin(2 * np.pi * x) + 0.5 * np.sin(4 * np.pi * x)

    def check_cfl(self, nu, u0=None):
        u0 = self.initial_condition() if u0 is None else u0
        diff_limit = 0.4 * self.dx**2 / nu
        adv_limit = 0.4 * self.dx / np.max(np.abs(u0))
        if not nu > 0:
            raise ConfigurationError(f"viscosity must be positive, got nu={nu}")
        if self.dt > diff_limit:
            raise ConfigurationError(
                f"nu={nu:g}: dt={self.dt:g} exceeds the diffusive limit {diff_limit:.3g} (0.4 dx^2/nu)"
            )
        if self.dt > adv_limit:
            raise ConfigurationError(
                f"nu={nu:g}: dt={self.dt:g} exceeds the advective limit {adv_limit:.3g} (0.4 dx/max|u0|)"
            )


def burgers_rhs(u, nu, dx):
    """``-d(u^2/2)/dx + nu d2u/dx2`` with periodic central differences."""
    up = np.roll(u, -1)
    um = np.roll(u, 1)
    flux = -(up * up - um * um) / (4.0 * dx)
    return flux + nu * (up - 2.0 * u + um) / (dx * dx)


def difference_matrices(n_x, dx):
    """Dense periodic central first- and second-derivative matrices."""
    eye = np.eye(n_x)
    shift_fwd = np.roll(eye, 1, axis=1)   # (S u)_i = u_{i+1}
    shift_bwd = np.roll(eye, -1, axis=1)  # (S u)_i = u_{i-1}
    d1 = (shift_fwd - shift_bwd) / (2.0 * dx)
    d2 = (shift_fwd - 2.0 * eye + shift_bwd) / (dx * dx)
    return d1, d2


def solve_burgers(cfg, nu, u0=None, callback=None):
    """March the periodic Burgers equation with Heun's RK2 scheme."""
    nu = float(nu)
    u = cfg.initial_condition() if u0 is None else np.array(u0, dtype=float)
    cfg.check_cfl(nu, u)
    dt, dx = cfg.dt, cfg.dx
    snaps = [u.copy()]
    for step in range(1, cfg.n_steps + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            k1 = burgers_rhs(u, nu, dx)
            k2 = burgers_rhs(u + dt * k1, nu, dx)
            u = u + 0.5 * dt * (k1 + k2)
        if not np.all(np.isfinite(u)):
            raise InstabilityError(f"nu={nu:g}: non-finite solution at step {step}", step=step)
        if callback is not None:
            callback(step, u)
        if step % cfg.stride == 0:
            snaps.append(u.copy())
    return SnapshotSet(nu, cfg.times, np.stack(snaps, axis=1), "u")
