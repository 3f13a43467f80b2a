"""Brute-force reference on a Fock-truncated bath.

The bath is cut at ``n_max`` quanta per mode, which makes the total Hilbert
space finite. Everything here is exact linear algebra on that space: closed
evolution, direct bath traces, and the interacting contour propagator.
Wick's theorem only holds up to a truncation defect, which is reported.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .bathcorr import DiscreteModeCorrelation
from .contour import ContourPropagator, TimeSequence
from .model import TOL_IMAG, BathSpec, SystemSpec
from .pairings import wick_sum

DEFAULT_MEMORY_CEILING = 4096
TAIL_MASS_LIMIT = 1e-8
CUTOFF_TOLERANCE = 1e-8


class TruncationError(RuntimeError):
    """Fock truncation too coarse (or too large) for the requested accuracy."""


def default_memory_ceiling() -> int:
    raw = os.environ.get("OQS_MEMORY_CEILING")
    return int(raw) if raw else DEFAULT_MEMORY_CEILING


@dataclass(frozen=True)
class FockTruncation:
    n_max: int = 20
    memory_ceiling: int = field(default_factory=default_memory_ceiling)
    tail_mass_limit: float = TAIL_MASS_LIMIT

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")

    def bath_dim(self, n_modes: int) -> int:
        return (self.n_max + 1) ** n_modes

    def total_dim(self, sys_dim: int, n_modes: int) -> int:
        return sys_dim * self.bath_dim(n_modes)

    def enlarged(self, extra: int = 4) -> "FockTruncation":
        return FockTruncation(self.n_max + extra, self.memory_ceiling, self.tail_mass_limit)


def default_truncation(bath: BathSpec) -> FockTruncation:
    return FockTruncation(n_max=20 if bath.n_modes == 1 else 8)


def thermal_tail_mass(bath: BathSpec, trunc: FockTruncation) -> float:
    """Thermal weight lost by the cutoff, ``1 - prod_l (1 - exp(-beta w_l (n_max + 1)))``."""
    kept = np.prod(-np.expm1(-bath.beta * bath.omegas * (trunc.n_max + 1)))
    return float(-np.expm1(np.log(kept))) if kept > 0 else 1.0


def ladder(n_max: int) -> np.ndarray:
    """Truncated annihilation operator, ``a|n> = sqrt(n)|n-1>``."""
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), k=1).astype(complex)


@dataclass(frozen=True, eq=False)
class BathOperators:
    h_b: np.ndarray
    w_b: np.ndarray
    rho_b: np.ndarray
    annihilators: tuple[np.ndarray, ...]
    occupations: np.ndarray  # (bath_dim, L) occupation numbers of each basis state
    tail_mass: float


def build_bath_operators(bath: BathSpec, trunc: FockTruncation) -> BathOperators:
    """Truncated ``H_b``, ``W_b = sum c/sqrt(2w) (a + a^dagger)`` and renormalised thermal state."""
    dim = trunc.bath_dim(bath.n_modes)
    if dim > trunc.memory_ceiling:
        raise TruncationError(f"bath dimension {dim} exceeds memory ceiling {trunc.memory_ceiling}")
    n1 = trunc.n_max + 1
    eye = np.eye(n1, dtype=complex)
    a1 = ladder(trunc.n_max)
    annihilators = []
    for l in range(bath.n_modes):
        factors = [a1 if k == l else eye for k in range(bath.n_modes)]
        annihilators.append(reduce(np.kron, factors))
    occ = np.array(np.unravel_index(np.arange(dim), (n1,) * bath.n_modes)).T
    energies = occ @ bath.omegas
    h_b = np.diag(energies).astype(complex)
    w_b = np.zeros((dim, dim), dtype=complex)
    for a, w, c in zip(annihilators, bath.omegas, bath.couplings):
        w_b += c / math.sqrt(2 * w) * (a + a.conj().T)
    boltz = np.exp(-bath.beta * (energies - energies.min()))
    rho_b = np.diag(boltz / boltz.sum()).astype(complex)
    return BathOperators(h_b, w_b, rho_b, tuple(annihilators), occ, thermal_tail_mass(bath, trunc))


@dataclass(frozen=True)
class OracleReport:
    value: float
    imag: float
    tail_mass: float
    edge_population: float
    cutoff_delta: float | None
    n_max: int
    total_dim: int


class OracleModel:
    """System plus truncated bath with the full interacting Hamiltonian.

    ``propagators`` realises the contour propagator of ``H`` with the
    observable ``O_s (x) Id`` at the pivot and ``W_s (x) Id`` as the vertex.
    """

    def __init__(self, sys: SystemSpec, bath: BathSpec, trunc: FockTruncation):
        total = trunc.total_dim(sys.dim, bath.n_modes)
        if total > trunc.memory_ceiling:
            raise TruncationError(f"total dimension {total} exceeds memory ceiling "
                                  f"{trunc.memory_ceiling}; lower n_max or raise OQS_MEMORY_CEILING")
        self.sys, self.bath, self.trunc = sys, bath, trunc
        self.ops = build_bath_operators(bath, trunc)
        if self.ops.tail_mass >= trunc.tail_mass_limit:
            raise TruncationError(f"thermal tail mass {self.ops.tail_mass:.3e} >= "
                                  f"{trunc.tail_mass_limit:.1e} at n_max={trunc.n_max}")
        id_s = np.eye(sys.dim, dtype=complex)
        id_b = np.eye(self.ops.h_b.shape[0], dtype=complex)
        self.h = np.kron(sys.h_s, id_b) + np.kron(id_s, self.ops.h_b) + np.kron(sys.w_s, self.ops.w_b)
        self.o = np.kron(sys.o_s, id_b)
        self.w_ring = np.kron(sys.w_s, id_b)
        self.rho0 = np.kron(sys.rho_s, self.ops.rho_b)
        self.propagators = ContourPropagator(self.h, self.o, self.w_ring, self.rho0)
        self.dim = total

    def evolve(self, t: float) -> np.ndarray:
        v, e = self.propagators.basis, self.propagators.energies
        u = (v * np.exp(-1j * t * e)) @ v.conj().T
        return u @ self.rho0 @ u.conj().T

    def edge_population(self, rho: np.ndarray) -> float:
        """Population of bath states with some mode at the cutoff."""
        edge = np.any(self.ops.occupations == self.trunc.n_max, axis=1)
        bath_pop = np.real(np.diag(rho)).reshape(self.sys.dim, -1).sum(axis=0)
        return float(bath_pop[edge].sum())


def exact_observable_report(sys: SystemSpec, bath: BathSpec, trunc: FockTruncation, t: float,
                            check_cutoff: bool = True, tol_imag: float = TOL_IMAG) -> OracleReport:
    model = OracleModel(sys, bath, trunc)
    rho_t = model.evolve(t)
    val = np.trace(model.o @ rho_t)
    if abs(val.imag) >= tol_imag:
        raise TruncationError(f"observable has imaginary part {val.imag:.3e}")
    delta = None
    if check_cutoff:
        bigger = trunc.enlarged()
        if bigger.total_dim(sys.dim, bath.n_modes) <= trunc.memory_ceiling:
            other = np.trace(OracleModel(sys, bath, bigger).evolve(t) @ np.kron(
                sys.o_s, np.eye(bigger.bath_dim(bath.n_modes))))
            delta = float(abs(other - val))
            if delta >= CUTOFF_TOLERANCE:
                raise TruncationError(f"cutoff not converged: n_max={trunc.n_max} and "
                                      f"{bigger.n_max} differ by {delta:.3e}")
    return OracleReport(float(val.real), float(val.imag), model.ops.tail_mass,
                        model.edge_population(rho_t), delta, trunc.n_max, model.dim)


def exact_observable(sys: SystemSpec, bath: BathSpec, trunc: FockTruncation, t: float,
                     check_cutoff: bool = True) -> float:
    """``tr(O_s (x) Id rho(t))`` by exact evolution of the truncated total system."""
    return exact_observable_report(sys, bath, trunc, t, check_cutoff).value


def bath_contour(bath: BathSpec, trunc: FockTruncation) -> ContourPropagator:
    ops = build_bath_operators(bath, trunc)
    return ContourPropagator(ops.h_b, np.eye(ops.h_b.shape[0]), ops.w_b, ops.rho_b)


def direct_bath_trace(s: TimeSequence, bath: BathSpec, trunc: FockTruncation, t: float | None = None,
                      contour: ContourPropagator | None = None) -> complex:
    """``tr_b(rho_b G_b(2t, s_m) W_b ... W_b G_b(s_1, 0))`` by explicit products."""
    t = s.pivot if t is None else t
    if s.m > 6:
        raise ValueError("direct_bath_trace is limited to m <= 6")
    contour = contour or bath_contour(bath, trunc)
    return complex(contour.trace_chain(np.array(s.times).reshape(1, -1), t)[0])


def random_time_sequence(rng: np.random.Generator, m: int, t: float) -> TimeSequence:
    while True:
        times = np.sort(rng.uniform(0.0, 2 * t, size=m))
        if m == 0 or (times[0] > 0 and np.all(np.diff(times) > 0)):
            return TimeSequence(tuple(times), t)


def wick_verification(m: int, bath: BathSpec, trunc: FockTruncation, t: float, samples: int,
                      seed: int = 0) -> float:
    """Worst relative deviation between direct bath traces and Wick sums."""
    if m % 2:
        raise ValueError("wick_verification needs even m")
    rng = np.random.default_rng(seed)
    corr = DiscreteModeCorrelation.from_bath(bath, t)
    contour = bath_contour(bath, trunc)
    worst = 0.0
    for _ in range(samples):
        s = random_time_sequence(rng, m, t)
        direct = direct_bath_trace(s, bath, trunc, t, contour)
        wick = wick_sum(s, corr)
        worst = max(worst, abs(direct - wick) / max(abs(wick), 1e-300))
    return worst


def full_propagator(sf: float, si: float, sys: SystemSpec, bath: BathSpec, trunc: FockTruncation,
                    t: float, model: OracleModel | None = None) -> np.ndarray:
    """Interacting contour propagator ``G(sf, si)`` on the truncated total space."""
    model = model or OracleModel(sys, bath, trunc)
    return model.propagators.propagator(sf, si, t)


def u_ring(sf: float, s: TimeSequence, si: float, sys: SystemSpec, bath: BathSpec,
           trunc: FockTruncation, model: OracleModel | None = None) -> np.ndarray:
    """``G(sf, s_m) W_ring G(s_m, s_{m-1}) ... W_ring G(s_1, si)`` with ``W_ring = W_s (x) Id``."""
    model = model or OracleModel(sys, bath, trunc)
    return model.propagators.chain(s.times, sf, si, s.pivot)
