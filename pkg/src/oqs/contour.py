"""Unfolded Keldysh contour on ``[0, 2t]`` with the pivot at ``t``.

A contour time ``s`` maps to the physical time ``s`` on the forward branch
(``s < t``) and ``2t - s`` on the backward branch (``s >= t``). Propagators
between two contour times are diagonal phases in the eigenbasis of the
Hamiltonian, with the observable inserted when the interval crosses the pivot.
"""
from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np

from .model import SystemSpec


@dataclass(frozen=True)
class TimeSequence:
    """Strictly increasing contour times ``0 < s_1 < ... < s_m < 2t``."""

    times: tuple[float, ...]
    pivot: float

    def __post_init__(self):
        times = tuple(float(s) for s in self.times)
        object.__setattr__(self, "times", times)
        if not (np.isfinite(self.pivot) and self.pivot >= 0):
            raise ValueError(f"pivot must be >= 0, got {self.pivot}")
        arr = np.array(times)
        if arr.size and not (arr[0] > 0 and arr[-1] < 2 * self.pivot):
            raise ValueError("contour times must lie in the open interval (0, 2t)")
        if np.any(np.diff(arr) <= 0):
            raise ValueError("contour times must be strictly increasing (ties are rejected)")

    @property
    def m(self) -> int:
        return len(self.times)

    def __len__(self) -> int:
        return len(self.times)


def count_forward(s: TimeSequence) -> int:
    """Number of contour times on the forward branch (``s_k < t``)."""
    return int(sum(1 for x in s.times if x < s.pivot))


def keldysh_sign(s: TimeSequence) -> int:
    return -1 if count_forward(s) % 2 else 1


def i_power(m: int) -> complex:
    return (1, 1j, -1, -1j)[m % 4]


def physical_time(s, t):
    """Map contour time to physical time; ``s == t`` counts as backward."""
    s = np.asarray(s, dtype=float)
    return np.where(s < t, s, 2 * t - s)


class ContourPropagator:
    """Propagators and alternating chains ``G W G ... W G`` for one Hamiltonian.

    Parameters
    ----------
    h : (n, n) Hermitian array
    o : (n, n) array inserted at the pivot crossing
    w : (n, n) array inserted at every contour time
    rho : (n, n) array used by :meth:`trace_chain`

    The eigendecomposition of ``h`` is computed once; all operators are
    rotated into that basis, where off-pivot propagators are diagonal.
    """

    def __init__(self, h, o, w, rho):
        h = np.asarray(h, dtype=complex)
        self.energies, self.basis = np.linalg.eigh(h)
        v, vh = self.basis, self.basis.conj().T
        self.o = vh @ np.asarray(o, dtype=complex) @ v
        self.w = vh @ np.asarray(w, dtype=complex) @ v
        self.rho = vh @ np.asarray(rho, dtype=complex) @ v
        self.dim = h.shape[0]

    def _phase(self, x):
        return np.exp(-1j * np.multiply.outer(x, self.energies))

    def _to_lab(self, a):
        return self.basis @ a @ self.basis.conj().T

    def propagator(self, sf: float, si: float, t: float, lab: bool = True) -> np.ndarray:
        """``G(sf, si)`` for ``si <= sf``; ``lab=False`` returns it in the eigenbasis."""
        if si > sf:
            raise ValueError(f"propagator needs si <= sf, got si={si}, sf={sf}")
        rf, ri = float(physical_time(sf, t)), float(physical_time(si, t))
        if si < t <= sf:
            g = self._phase(rf - t)[:, None] * self.o * self._phase(t - ri)[None, :]
        else:
            g = np.diag(self._phase(rf - ri))
        return self._to_lab(g) if lab else g

    def chain_batch(self, times, sf, si, t: float, w=None) -> np.ndarray:
        """Eigenbasis chains for a batch of sorted time tuples.

        ``times`` has shape ``(N, m)`` with rows increasing; ``sf``/``si`` are
        scalars or length-``N`` arrays bracketing each row. Returns ``(N, n, n)``.
        """
        times = np.asarray(times, dtype=float)
        n_batch, m = times.shape
        w = self.w if w is None else w
        lo = np.broadcast_to(np.asarray(si, dtype=float), (n_batch,))
        hi = np.broadcast_to(np.asarray(sf, dtype=float), (n_batch,))
        knots = np.concatenate([lo[:, None], times, hi[:, None]], axis=1)
        real = physical_time(knots, t)
        out = np.broadcast_to(np.eye(self.dim, dtype=complex), (n_batch, self.dim, self.dim)).copy()
        for k in range(m + 1):
            a, b = knots[:, k], knots[:, k + 1]
            ra, rb = real[:, k], real[:, k + 1]
            cross = (a < t) & (t <= b)
            right = np.where(cross, t - ra, 0.0)
            left = np.where(cross, rb - t, rb - ra)
            out *= self._phase(right)[:, :, None]
            if cross.any():
                out[cross] = self.o @ out[cross]
            out *= self._phase(left)[:, :, None]
            if k < m:
                out = w @ out
        return out

    def chain(self, times, sf: float, si: float, t: float, lab: bool = True) -> np.ndarray:
        times = np.asarray(times, dtype=float)
        if times.size and not (si < times[0] and times[-1] < sf):
            raise ValueError("chain needs si < s_1 and s_m < sf")
        if si > sf:
            raise ValueError(f"chain needs si <= sf, got si={si}, sf={sf}")
        u = self.chain_batch(times.reshape(1, -1), sf, si, t)[0]
        return self._to_lab(u) if lab else u

    def trace_chain(self, times, t: float, sf: float | None = None, si: float = 0.0) -> np.ndarray:
        """``tr(rho G(sf, s_m) W ... W G(s_1, si))`` for each row of ``times``."""
        sf = 2 * t if sf is None else sf
        u = self.chain_batch(times, sf, si, t)
        return np.einsum("ij,nji->n", self.rho, u)


_SYSTEM_CACHE: "weakref.WeakKeyDictionary[SystemSpec, ContourPropagator]" = weakref.WeakKeyDictionary()


def system_contour(sys: SystemSpec) -> ContourPropagator:
    """Contour propagator for ``sys``; the eigendecomposition is built once per system."""
    prop = _SYSTEM_CACHE.get(sys)
    if prop is None:
        prop = ContourPropagator(sys.h_s, sys.o_s, sys.w_s, sys.rho_s)
        _SYSTEM_CACHE[sys] = prop
    return prop


def system_propagator(sf: float, si: float, sys: SystemSpec, t: float) -> np.ndarray:
    """System propagator ``G_s(sf, si)`` with ``O_s`` inserted when ``si < t <= sf``."""
    return system_contour(sys).propagator(sf, si, t)


def u_s(sf: float, s: TimeSequence, si: float, sys: SystemSpec) -> np.ndarray:
    """``G_s(sf, s_m) W_s G_s(s_m, s_{m-1}) ... W_s G_s(s_1, si)``."""
    return system_contour(sys).chain(s.times, sf, si, s.pivot)


def dyson_weight(s: TimeSequence, sys: SystemSpec) -> complex:
    """System factor ``(-1)^{#forward} i^m tr(rho_s U_s(2t, s, 0))``."""
    tr = system_contour(sys).trace_chain(np.array(s.times).reshape(1, -1), s.pivot)[0]
    return complex(keldysh_sign(s) * i_power(s.m) * tr)


def dyson_weights(times, sys: SystemSpec, t: float) -> np.ndarray:
    """Vectorised :func:`dyson_weight` over rows of ``times`` (shape ``(N, m)``)."""
    times = np.asarray(times, dtype=float)
    m = times.shape[1]
    sign = np.where(np.sum(times < t, axis=1) % 2, -1.0, 1.0)
    return sign * i_power(m) * system_contour(sys).trace_chain(times, t)
