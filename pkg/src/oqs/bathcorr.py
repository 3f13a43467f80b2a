"""Bath correlation functions on the unfolded contour ``[0, 2t]^2``.

All correlation objects are callables ``corr(tau1, tau2)`` that broadcast over
numpy arrays and expose ``sup_bound()``, an upper bound on ``|B|``.
"""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .model import BathSpec, PerturbationSpec
from .quadrature import QuadEstimate, triangle_integral


class CorrelationFn:
    """Base class; subclasses implement ``__call__`` and ``sup_bound``."""

    pivot: float

    def __call__(self, tau1, tau2):
        raise NotImplementedError

    def sup_bound(self) -> float:
        raise NotImplementedError

    def __sub__(self, other: "CorrelationFn") -> "DifferenceCorrelation":
        return DifferenceCorrelation(self, other)

    def __add__(self, other: "CorrelationFn") -> "SumCorrelation":
        return SumCorrelation(self, other)

    def __rmul__(self, factor) -> "ScaledCorrelation":
        return ScaledCorrelation(self, factor)


class DiscreteModeCorrelation(CorrelationFn):
    """``sum_l a_l [coth(beta w_l / 2) cos(w_l x) - i sin(w_l x)]``, ``x = |tau1-t| - |tau2-t|``.

    For a physical bath ``a_l = c_l^2 / (2 w_l) >= 0``; signed amplitudes are
    allowed so that differences of discrete baths stay in closed form.
    """

    def __init__(self, amplitudes, omegas, beta: float, pivot: float):
        self.amplitudes = np.asarray(amplitudes, dtype=float)
        self.omegas = np.asarray(omegas, dtype=float)
        self.beta = float(beta)
        self.pivot = float(pivot)
        self.coth = 1.0 / np.tanh(0.5 * self.beta * self.omegas)

    @classmethod
    def from_bath(cls, bath: BathSpec, pivot: float) -> "DiscreteModeCorrelation":
        w, c = bath.omegas, bath.couplings
        return cls(c**2 / (2 * w), w, bath.beta, pivot)

    def __call__(self, tau1, tau2):
        t = self.pivot
        x = np.abs(np.asarray(tau1, dtype=float) - t) - np.abs(np.asarray(tau2, dtype=float) - t)
        phase = np.multiply.outer(x, self.omegas)
        terms = self.amplitudes * (self.coth * np.cos(phase) - 1j * np.sin(phase))
        return terms.sum(axis=-1)

    def sup_bound(self) -> float:
        # |coth cos - i sin| <= coth since coth >= 1; equality at equal times
        return float(np.sum(np.abs(self.amplitudes) * self.coth))


class ConstantCorrelation(CorrelationFn):
    def __init__(self, value: complex, pivot: float = 0.0):
        self.value = complex(value)
        self.pivot = float(pivot)

    def __call__(self, tau1, tau2):
        shape = np.broadcast(np.asarray(tau1), np.asarray(tau2)).shape
        return np.full(shape, self.value, dtype=complex)

    def sup_bound(self) -> float:
        return abs(self.value)


class TabulatedCorrelation(CorrelationFn):
    """Bilinear interpolation of a rectangular grid of complex values."""

    def __init__(self, tau1_axis, tau2_axis, values, pivot: float | None = None):
        self.tau1_axis = np.asarray(tau1_axis, dtype=float)
        self.tau2_axis = np.asarray(tau2_axis, dtype=float)
        self.values = np.asarray(values, dtype=complex)
        for name, ax in (("tau1", self.tau1_axis), ("tau2", self.tau2_axis)):
            if ax.ndim != 1 or ax.size < 2 or np.any(np.diff(ax) <= 0):
                raise ValueError(f"{name} axis must be strictly increasing with >= 2 points")
        if self.values.shape != (self.tau1_axis.size, self.tau2_axis.size):
            raise ValueError("values shape does not match the grid axes")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("tabulated correlation has non-finite values")
        self.pivot = 0.5 * self.tau1_axis[-1] if pivot is None else float(pivot)
        axes = (self.tau1_axis, self.tau2_axis)
        self._re = RegularGridInterpolator(axes, self.values.real, method="linear")
        self._im = RegularGridInterpolator(axes, self.values.imag, method="linear")

    def __call__(self, tau1, tau2):
        tau1, tau2 = np.broadcast_arrays(np.asarray(tau1, dtype=float), np.asarray(tau2, dtype=float))
        pts = np.stack([tau1.ravel(), tau2.ravel()], axis=-1)
        out = self._re(pts) + 1j * self._im(pts)
        return out.reshape(tau1.shape)

    def sup_bound(self) -> float:
        # the modulus of a bilinear interpolant is maximal at a grid node
        return float(np.max(np.abs(self.values)))

    @classmethod
    def from_csv(cls, path, pivot: float | None = None) -> "TabulatedCorrelation":
        """Read a ``tau1,tau2,re,im`` CSV holding a full rectangular grid."""
        path = Path(path)
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = [h.strip() for h in next(reader, [])]
            if header != ["tau1", "tau2", "re", "im"]:
                raise ValueError(f"{path}: header must be 'tau1,tau2,re,im', got {','.join(header)!r}")
            rows = []
            for lineno, row in enumerate(reader, start=2):
                if not row or all(not x.strip() for x in row):
                    continue
                if len(row) != 4:
                    raise ValueError(f"{path}:{lineno}: expected 4 columns, got {len(row)}")
                try:
                    rows.append([float(x) for x in row])
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: {exc}") from None
        data = np.array(rows, dtype=float).reshape(-1, 4)
        ax1, ax2 = np.unique(data[:, 0]), np.unique(data[:, 1])
        if data.shape[0] != ax1.size * ax2.size:
            raise ValueError(f"{path}: grid is not rectangular ({data.shape[0]} rows for "
                             f"{ax1.size}x{ax2.size} axes)")
        values = np.full((ax1.size, ax2.size), np.nan + 0j)
        i = np.searchsorted(ax1, data[:, 0])
        j = np.searchsorted(ax2, data[:, 1])
        values[i, j] = data[:, 2] + 1j * data[:, 3]
        if np.isnan(values.real).any():
            raise ValueError(f"{path}: grid has duplicate or missing points")
        return cls(ax1, ax2, values, pivot)

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["tau1", "tau2", "re", "im"])
            for i, a in enumerate(self.tau1_axis):
                for j, b in enumerate(self.tau2_axis):
                    v = self.values[i, j]
                    w.writerow([repr(float(a)), repr(float(b)), repr(float(v.real)), repr(float(v.imag))])


class DifferenceCorrelation(CorrelationFn):
    """Pointwise ``a - b``; identical inputs give exactly zero."""

    def __init__(self, a: CorrelationFn, b: CorrelationFn):
        self.a, self.b = a, b
        self.pivot = a.pivot

    def __call__(self, tau1, tau2):
        return self.a(tau1, tau2) - self.b(tau1, tau2)

    def sup_bound(self) -> float:
        if self.a is self.b:
            return 0.0
        a, b = self.a, self.b
        if (isinstance(a, DiscreteModeCorrelation) and isinstance(b, DiscreteModeCorrelation)
                and a.beta == b.beta and a.pivot == b.pivot):
            return _merged_sup(a, b, -1.0)
        return a.sup_bound() + b.sup_bound()


class SumCorrelation(CorrelationFn):
    def __init__(self, a: CorrelationFn, b: CorrelationFn):
        self.a, self.b = a, b
        self.pivot = a.pivot

    def __call__(self, tau1, tau2):
        return self.a(tau1, tau2) + self.b(tau1, tau2)

    def sup_bound(self) -> float:
        return self.a.sup_bound() + self.b.sup_bound()


class ScaledCorrelation(CorrelationFn):
    def __init__(self, inner: CorrelationFn, factor):
        self.inner, self.factor = inner, complex(factor)
        self.pivot = inner.pivot

    def __call__(self, tau1, tau2):
        return self.factor * self.inner(tau1, tau2)

    def sup_bound(self) -> float:
        return abs(self.factor) * self.inner.sup_bound()


def _merged_sup(a: DiscreteModeCorrelation, b: DiscreteModeCorrelation, sign: float) -> float:
    # combine amplitudes of equal frequencies before taking the term-wise bound
    amps: dict[float, float] = {}
    for corr, s in ((a, 1.0), (b, sign)):
        for amp, w in zip(corr.amplitudes, corr.omegas):
            amps[float(w)] = amps.get(float(w), 0.0) + s * amp
    w = np.array(list(amps))
    amp = np.array(list(amps.values()))
    return float(np.sum(np.abs(amp) / np.tanh(0.5 * a.beta * w)))


def as_correlation(source, pivot: float) -> CorrelationFn:
    if isinstance(source, CorrelationFn):
        return source
    if isinstance(source, BathSpec):
        return DiscreteModeCorrelation.from_bath(source, pivot)
    raise TypeError(f"cannot build a correlation function from {type(source).__name__}")


def spin_boson_correlation(bath: BathSpec, t: float, tau1, tau2):
    """Unfolded spin-boson correlation for ``bath`` with pivot ``t``."""
    return DiscreteModeCorrelation.from_bath(bath, t)(tau1, tau2)


def delta_correlation(p: PerturbationSpec, t: float) -> CorrelationFn:
    """``perturbed - base`` as a correlation function."""
    return DifferenceCorrelation(as_correlation(p.perturbed, t), as_correlation(p.base, t))


def discretize_spectral_density(spectral_density, omega_grid: Sequence[float], beta: float) -> BathSpec:
    """Midpoint-rule discretisation of ``J(omega)`` into bath modes.

    Mode ``l`` sits at the midpoint of ``[w_l, w_{l+1}]`` with
    ``c_l^2 / (2 w_l) = J(w_l) dw / pi``, which reproduces the continuum
    correlation ``int J(w)/pi [...] dw`` under the midpoint rule.
    """
    grid = np.asarray(omega_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0) or grid[0] < 0:
        raise ValueError("omega_grid must be increasing, non-negative, with >= 2 points")
    mid = 0.5 * (grid[1:] + grid[:-1])
    dw = np.diff(grid)
    j = np.asarray([spectral_density(w) for w in mid], dtype=float)
    if np.any(j < 0):
        raise ValueError("spectral density must be non-negative")
    c = np.sqrt(2 * mid * j * dw / np.pi)
    return BathSpec(tuple(zip(mid, c)), beta)


def abs_delta_double_integral(db: CorrelationFn, t: float, quad_points: int,
                              upper: float | None = None) -> QuadEstimate:
    """``int_0^U int_0^{s2} |dB(s1, s2)| ds1 ds2`` with ``U = 2t`` by default.

    Nested Gauss-Legendre, both levels split at the pivot. The error is the
    difference between ``quad_points`` and ``2 * quad_points`` per panel.
    """
    if quad_points < 2:
        raise ValueError("quad_points must be >= 2")
    upper = 2 * t if upper is None else upper

    def integrand(s1, s2):
        v = np.abs(db(s1, s2))
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite correlation value in the integrand")
        return v

    est = triangle_integral(integrand, 0.0, upper, quad_points, breakpoints=(t,))
    return QuadEstimate(float(np.real(est.value)), est.error)


def unfolded_symmetry_check(b: CorrelationFn, t: float, samples: int, seed: int = 0) -> float:
    """Largest change of ``B`` under reflections that preserve ``|tau1-t| - |tau2-t|``.

    Each random point ``(tau1, tau2)`` is compared with its images where either
    coordinate is mirrored about the pivot.
    """
    rng = np.random.default_rng(seed)
    tau = rng.uniform(0.0, 2 * t, size=(samples, 2))
    ref = b(tau[:, 0], tau[:, 1])
    mirrored = 2 * t - tau
    worst = 0.0
    for a1, a2 in ((mirrored[:, 0], tau[:, 1]), (tau[:, 0], mirrored[:, 1]),
                   (mirrored[:, 0], mirrored[:, 1])):
        worst = max(worst, float(np.max(np.abs(b(a1, a2) - ref), initial=0.0)))
    return worst
