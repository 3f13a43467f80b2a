"""Domain types shared across the package.

Operators are dense complex ``numpy`` arrays. Everything here is immutable
after construction, so instances can be handed to worker threads freely.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

TOL_HERM = 1e-10
TOL_PSD = 1e-10
TOL_TRACE = 1e-10
TOL_IMAG = 1e-8

INTEGRATORS = ("gauss", "monte_carlo")


def _as_operator(a, name: str, dim: int | None = None) -> np.ndarray:
    a = np.array(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")
    if dim is not None and a.shape[0] != dim:
        raise ValueError(f"{name} must be {dim}x{dim}, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    a.setflags(write=False)
    return a


def is_hermitian(a: np.ndarray, tol: float = TOL_HERM) -> bool:
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """Finite-dimensional system: Hamiltonian, coupling factor, observable, state."""

    h_s: np.ndarray
    w_s: np.ndarray
    o_s: np.ndarray
    rho_s: np.ndarray
    tol_herm: float = TOL_HERM
    tol_psd: float = TOL_PSD
    tol_trace: float = TOL_TRACE

    def __post_init__(self):
        h = _as_operator(self.h_s, "h_s")
        d = h.shape[0]
        object.__setattr__(self, "h_s", h)
        for name in ("w_s", "o_s", "rho_s"):
            object.__setattr__(self, name, _as_operator(getattr(self, name), name, d))
        for name in ("h_s", "w_s", "o_s", "rho_s"):
            if not is_hermitian(getattr(self, name), self.tol_herm):
                raise ValueError(f"{name} is not Hermitian within {self.tol_herm}")
        evals = np.linalg.eigvalsh(self.rho_s)
        if evals.min() < -self.tol_psd:
            raise ValueError(f"rho_s has negative eigenvalue {evals.min():.3e}")
        tr = np.trace(self.rho_s)
        if abs(tr - 1.0) > self.tol_trace:
            raise ValueError(f"rho_s has trace {tr.real:.12g}, expected 1")

    @property
    def dim(self) -> int:
        return self.h_s.shape[0]


@dataclass(frozen=True)
class BathSpec:
    """Discrete bosonic bath: ``modes`` is a sequence of ``(omega, c)`` pairs."""

    modes: tuple[tuple[float, float], ...]
    beta: float

    def __post_init__(self):
        modes = tuple((float(w), float(c)) for w, c in self.modes)
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "beta", float(self.beta))
        if not modes:
            raise ValueError("bath needs at least one mode")
        for w, c in modes:
            if not (np.isfinite(w) and w > 0):
                raise ValueError(f"mode frequency must be > 0, got {w}")
            if not np.isfinite(c):
                raise ValueError(f"mode coupling must be finite, got {c}")
        if not (np.isfinite(self.beta) and self.beta > 0):
            raise ValueError(f"beta must be > 0, got {self.beta}")

    @property
    def omegas(self) -> np.ndarray:
        return np.array([w for w, _ in self.modes])

    @property
    def couplings(self) -> np.ndarray:
        return np.array([c for _, c in self.modes])

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    def scaled(self, coupling_factor: float = 1.0, frequency_factor: float = 1.0) -> "BathSpec":
        return BathSpec(
            tuple((w * frequency_factor, c * coupling_factor) for w, c in self.modes),
            self.beta,
        )


@dataclass(frozen=True)
class PerturbationSpec:
    """A pair of baths (or correlation functions): the reference and its perturbation.

    Either side may be a :class:`BathSpec` or any object exposing the
    correlation-function interface of :mod:`oqs.bathcorr`.
    """

    base: object
    perturbed: object


@dataclass(frozen=True)
class DysonConfig:
    t: float
    max_order: int = 8
    integrator: str = "gauss"
    samples_per_order: int = 200_000
    gauss_points: int = 32
    seed: int = 0
    tol_herm: float = TOL_HERM
    tol_psd: float = TOL_PSD
    tol_trace: float = TOL_TRACE
    tol_imag: float = TOL_IMAG
    workers: int = 1

    def __post_init__(self):
        if not (np.isfinite(self.t) and self.t >= 0):
            raise ValueError(f"t must be >= 0, got {self.t}")
        if self.max_order < 0 or self.max_order % 2:
            raise ValueError("max_order must be even")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"integrator must be one of {INTEGRATORS}, got {self.integrator!r}")
        if self.samples_per_order < 1:
            raise ValueError("samples_per_order must be >= 1")
        if self.gauss_points < 1:
            raise ValueError("gauss_points must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


def basis_state(dim: int, index: int) -> np.ndarray:
    rho = np.zeros((dim, dim), dtype=complex)
    rho[index, index] = 1.0
    return rho


def spin_boson_system(epsilon: float, delta: float, observable: str = "sigma_z",
                      rho_s: Sequence | None = None) -> SystemSpec:
    """Two-level system with ``H_s = epsilon*sigma_z + delta*sigma_x`` and ``W_s = sigma_z``.

    The spin starts in ``|1>`` (the ``+1`` eigenvector of ``sigma_z``) unless
    ``rho_s`` is given.
    """
    observables = {"sigma_z": SIGMA_Z, "sigma_x": SIGMA_X, "identity": IDENTITY_2}
    if observable not in observables:
        raise ValueError(f"observable must be one of {sorted(observables)}, got {observable!r}")
    if not (np.isfinite(epsilon) and np.isfinite(delta)):
        raise ValueError("epsilon and delta must be finite")
    return SystemSpec(
        h_s=epsilon * SIGMA_Z + delta * SIGMA_X,
        w_s=SIGMA_Z,
        o_s=observables[observable],
        rho_s=basis_state(2, 0) if rho_s is None else rho_s,
    )


def is_spin_boson_coupling(sys: SystemSpec, tol: float = TOL_HERM) -> bool:
    return sys.dim == 2 and np.allclose(sys.w_s, SIGMA_Z, atol=tol, rtol=0)


def operator_norm(a) -> float:
    """Spectral norm (largest singular value).

    Closed form for ``d <= 2``; power iteration on ``a^dagger a`` otherwise.
    """
    a = np.asarray(a, dtype=complex)
    if not np.all(np.isfinite(a)):
        raise ValueError("operator has non-finite entries")
    if a.size == 0:
        return 0.0
    if a.shape == (1, 1):
        return float(abs(a[0, 0]))
    if a.shape == (2, 2):
        # singular values of a 2x2: s^2 = (f +- sqrt(f^2 - 4|det|^2)) / 2, f = ||a||_F^2
        fro2 = float(np.sum(np.abs(a) ** 2))
        det = abs(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0])
        disc = max(fro2 * fro2 - 4.0 * det * det, 0.0)
        return float(np.sqrt((fro2 + np.sqrt(disc)) / 2.0))
    return _power_norm(a)


def _power_norm(a: np.ndarray, rtol: float = 1e-12, maxiter: int = 20_000) -> float:
    g = a.conj().T @ a
    v = np.linspace(1.0, 2.0, g.shape[0]).astype(complex)
    v /= np.linalg.norm(v)
    for _ in range(maxiter):
        w = g @ v
        lam = float(np.real(np.vdot(v, w)))
        if lam <= 0.0:
            return 0.0
        # Rayleigh-quotient error is O(residual^2 / gap), so sqrt(rtol) on the residual
        if np.linalg.norm(w - lam * v) <= np.sqrt(rtol) * lam:
            return float(np.sqrt(lam))
        v = w / np.linalg.norm(w)
    # nearly degenerate top singular values; fall back to the SVD
    return float(np.linalg.norm(a, 2))
