"""Intrusive POD-Galerkin reduced model of the periodic Burgers problem.

With ``u = mean + phi @ a`` the projected dynamics read

    da/dt = c + (nu * L + B) a + sum_jk T[:, j, k] a_j a_k

where ``L`` projects the discrete Laplacian, ``B`` the convection by the
mean, ``T`` the self-convection of the modes and ``c`` the residual of the
mean field itself. The stencils are those of ``oracle.solve_burgers``.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .datastore import _frozen
from .errors import InstabilityError, ValidationError
from .oracle import difference_matrices
from .pod import MeanField

DIVERGENCE_LIMIT = 1e6


@dataclass(frozen=True)
class GalerkinRom:
    phi: np.ndarray
    nu: float
    linear_operator: np.ndarray
    mean_linear: np.ndarray
    quadratic_tensor: np.ndarray
    mean_terms: np.ndarray
    a0: np.ndarray
    dt: float
    mean: np.ndarray

    def __post_init__(self):
        for name, ndim in (("phi", 2), ("linear_operator", 2), ("mean_linear", 2),
                           ("quadratic_tensor", 3), ("mean_terms", 1), ("a0", 1), ("mean", 1)):
            object.__setattr__(self, name, _frozen(getattr(self, name), ndim, name))

    @property
    def rank(self):
        return self.phi.shape[1]

    def rhs(self, a):
        return (self.mean_terms + (self.nu * self.linear_operator + self.mean_linear) @ a
                + np.einsum("ijk,j,k->i", self.quadratic_tensor, a, a))

    def reconstruct(self, coeffs):
        return self.mean[:, None] + self.phi @ coeffs


def build_rom(phi, mean, cfg, nu, u0=None):
    """Project the Burgers operators onto ``span(phi)`` around ``mean``."""
    phi = np.asarray(phi, dtype=float)
    mean = np.asarray(mean.mean if isinstance(mean, MeanField) else mean, dtype=float)
    if phi.ndim != 2 or phi.shape[0] != cfg.n_x or mean.shape != (cfg.n_x,):
        raise ValidationError(
            f"basis {phi.shape} / mean {mean.shape} do not match a grid of {cfg.n_x} points"
        )
    err = np.linalg.norm(phi.T @ phi - np.eye(phi.shape[1]))
    if err > 1e-8:
        raise ValidationError(f"basis is not orthonormal (|phi'phi - I|_F = {err:.2e})")
    d1, d2 = difference_matrices(cfg.n_x, cfg.dx)
    lap = phi.T @ (d2 @ phi)
    lap = 0.5 * (lap + lap.T)
    mean_linear = -phi.T @ (d1 @ (mean[:, None] * phi))
    d1phi_t = phi.T @ d1
    products = phi[:, :, None] * phi[:, None, :]
    tensor = -0.5 * np.einsum("in,njk->ijk", d1phi_t, products)
    const = phi.T @ (-d1 @ (0.5 * mean * mean) + nu * (d2 @ mean))
    u0 = cfg.initial_condition() if u0 is None else np.asarray(u0, dtype=float)
    a0 = phi.T @ (u0 - mean)
    return GalerkinRom(phi, float(nu), lap, mean_linear, tensor, const, a0, cfg.dt, mean)


def integrate_rom(rom, times):
    """Classical RK4 with the model's ``dt``; returns ``(q, len(times))`` coefficients.

    ``times[0]`` is the time of ``rom.a0`` and every entry must fall on the
    ``dt`` lattice.
    """
    times = np.asarray(times, dtype=float)
    steps = (times - times[0]) / rom.dt
    marks = np.rint(steps).astype(int)
    if np.any(np.abs(steps - marks) > 1e-6) or np.any(np.diff(marks) <= 0):
        raise ValidationError("output times must be increasing multiples of the time step")
    spacing = np.diff(marks)
    if spacing.size and np.any(spacing != spacing[0]):
        raise ValidationError("output times must be uniform")
    dt = rom.dt
    a = rom.a0.copy()
    out = np.empty((rom.rank, times.shape[0]))
    out[:, 0] = a
    col = 1
    for step in range(1, marks[-1] + 1):
        k1 = rom.rhs(a)
        k2 = rom.rhs(a + 0.5 * dt * k1)
        k3 = rom.rhs(a + 0.5 * dt * k2)
        k4 = rom.rhs(a + dt * k3)
        a = a + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(a)) or np.linalg.norm(a) > DIVERGENCE_LIMIT:
            raise InstabilityError(f"reduced model diverged at step {step}", step=step)
        if col < len(marks) and step == marks[col]:
            out[:, col] = a
            col += 1
    return out


def galerkin_predict(phi, mean, cfg, nu, times=None):
    """Build and integrate a reduced model; returns ``(snapshots, coeffs, wall_time)``."""
    start = time.perf_counter()
    rom = build_rom(phi, mean, cfg, nu)
    coeffs = integrate_rom(rom, cfg.times if times is None else times)
    recon = rom.reconstruct(coeffs)
    return recon, coeffs, time.perf_counter() - start
