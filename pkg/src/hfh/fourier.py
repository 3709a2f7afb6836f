"""Truncated Fourier series on rectangular periodicity cells.

Every coefficient field in this package is a finite table of Fourier
coefficients c[n], n in Z^d, representing

    f(xi) = sum_n c[n] * exp(2*pi*i * n . (xi / lambda))

on the cell [0, lambda_1] x ... x [0, lambda_d].  Products are exact
convolutions and cell averages are exact coefficient sums, so no
quadrature error enters any cell integral built from these fields.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

from .errors import ValidationError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Cell:
    """Rectangular periodicity cell with side lengths lambda_i > 0, d in {1,2,3}."""

    lengths: tuple

    def __post_init__(self):
        lengths = tuple(float(v) for v in np.atleast_1d(np.asarray(self.lengths, dtype=float)))
        object.__setattr__(self, "lengths", lengths)
        if not 1 <= len(lengths) <= 3:
            raise ValidationError("cell dimension must be 1, 2 or 3")
        if any(not np.isfinite(v) or v <= 0.0 for v in lengths):
            raise ValidationError("cell side lengths must be positive and finite")

    @property
    def dims(self) -> int:
        return len(self.lengths)

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @property
    def diag(self) -> np.ndarray:
        """Side lengths as a vector (the diagonal of the cell)."""
        return np.asarray(self.lengths)

    def reciprocal(self) -> np.ndarray:
        """Reciprocal lattice steps 2*pi / lambda_i per axis."""
        return TWO_PI / self.diag


def _as_cutoffs(cell: Cell, cutoff) -> tuple:
    if np.isscalar(cutoff):
        cut = (int(cutoff),) * cell.dims
    else:
        cut = tuple(int(c) for c in cutoff)
    if len(cut) != cell.dims or any(c < 0 for c in cut):
        raise ValidationError("cutoff must be a nonnegative integer per axis")
    return cut


class FourierField:
    """Scalar cell-periodic field stored as a dense block of Fourier coefficients.

    ``coeffs`` has shape (2*c_1 + 1, ..., 2*c_d + 1); the entry at position
    n + c is the coefficient of exp(2*pi*i * n . (xi / lambda)).
    """

    __slots__ = ("cell", "coeffs", "cutoffs")

    def __init__(self, cell: Cell, coeffs):
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if coeffs.ndim != cell.dims or any(s % 2 == 0 for s in coeffs.shape):
            raise ValidationError("coefficient block must be odd-sized along every axis")
        self.cell = cell
        self.coeffs = coeffs
        self.cutoffs = tuple((s - 1) // 2 for s in coeffs.shape)

    # ------------------------------------------------------------------
    # constructors

    @classmethod
    def zeros(cls, cell: Cell, cutoff) -> "FourierField":
        cut = _as_cutoffs(cell, cutoff)
        return cls(cell, np.zeros(tuple(2 * c + 1 for c in cut), dtype=np.complex128))

    @classmethod
    def constant(cls, cell: Cell, value) -> "FourierField":
        field = cls.zeros(cell, 0)
        field.coeffs[field._center()] = value
        return field

    @classmethod
    def from_terms(cls, cell: Cell, cutoff, terms: dict) -> "FourierField":
        """Build from a {multi-index: coefficient} table; indices beyond cutoff are rejected."""
        field = cls.zeros(cell, cutoff)
        for n, c in terms.items():
            idx = np.atleast_1d(np.asarray(n, dtype=int))
            if idx.shape != (cell.dims,):
                raise ValidationError(f"mode index {n!r} does not match cell dimension {cell.dims}")
            if any(abs(int(idx[ax])) > field.cutoffs[ax] for ax in range(cell.dims)):
                raise ValidationError(f"mode index {n!r} exceeds the declared cutoff")
            field.coeffs[tuple(int(idx[ax]) + field.cutoffs[ax] for ax in range(cell.dims))] += c
        return field

    # ------------------------------------------------------------------
    # indexing helpers

    def _center(self) -> tuple:
        return self.cutoffs

    def index_grid(self, axis: int) -> np.ndarray:
        return np.arange(-self.cutoffs[axis], self.cutoffs[axis] + 1)

    def coeff(self, n) -> complex:
        """Coefficient at multi-index n (0 outside the stored block)."""
        idx = np.atleast_1d(np.asarray(n, dtype=int))
        if any(abs(int(idx[ax])) > self.cutoffs[ax] for ax in range(self.cell.dims)):
            return 0.0 + 0.0j
        return complex(self.coeffs[tuple(int(idx[ax]) + self.cutoffs[ax] for ax in range(self.cell.dims))])

    def gather(self, lags: np.ndarray) -> np.ndarray:
        """Vectorized coefficient lookup for an integer lag array of shape (..., d).

        Lags outside the stored block read as 0; used by operator assembly.
        """
        lags = np.asarray(lags, dtype=int)
        mask = np.ones(lags.shape[:-1], dtype=bool)
        idx = []
        for ax in range(self.cell.dims):
            la = lags[..., ax]
            mask &= np.abs(la) <= self.cutoffs[ax]
            idx.append(np.clip(la + self.cutoffs[ax], 0, 2 * self.cutoffs[ax]))
        out = self.coeffs[tuple(idx)]
        return np.where(mask, out, 0.0 + 0.0j)

    # ------------------------------------------------------------------
    # algebra

    def _padded(self, cutoffs: tuple) -> np.ndarray:
        pad = [(c - s, c - s) for c, s in zip(cutoffs, self.cutoffs)]
        if any(p < 0 for p, _ in pad):
            raise ValidationError("cannot pad to a smaller cutoff")
        return np.pad(self.coeffs, pad)

    def with_cutoff(self, cutoff) -> "FourierField":
        cut = _as_cutoffs(self.cell, cutoff)
        return FourierField(self.cell, self._padded(cut))

    def __add__(self, other):
        if not isinstance(other, FourierField):
            return NotImplemented
        cut = tuple(max(a, b) for a, b in zip(self.cutoffs, other.cutoffs))
        return FourierField(self.cell, self._padded(cut) + other._padded(cut))

    def __sub__(self, other):
        if not isinstance(other, FourierField):
            return NotImplemented
        cut = tuple(max(a, b) for a, b in zip(self.cutoffs, other.cutoffs))
        return FourierField(self.cell, self._padded(cut) - other._padded(cut))

    def __neg__(self):
        return FourierField(self.cell, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, FourierField):
            out = signal.convolve(self.coeffs, other.coeffs, mode="full", method="auto")
            return FourierField(self.cell, out)
        return FourierField(self.cell, self.coeffs * other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def conjugate(self) -> "FourierField":
        """Pointwise complex conjugate (coefficients reversed and conjugated)."""
        rev = self.coeffs[tuple(slice(None, None, -1) for _ in range(self.cell.dims))]
        return FourierField(self.cell, np.conj(rev))

    def derivative(self, axis: int) -> "FourierField":
        """Partial derivative along a cell axis."""
        return self.gauge_derivative(axis, 0.0)

    def gauge_derivative(self, axis: int, shift: float) -> "FourierField":
        """Apply (d/dxi_axis + i*shift): coefficientwise multiply by i*(2*pi*n/lambda + shift)."""
        mult = 1j * (TWO_PI * self.index_grid(axis) / self.cell.lengths[axis] + shift)
        shape = [1] * self.cell.dims
        shape[axis] = -1
        return FourierField(self.cell, self.coeffs * mult.reshape(shape))

    def mean(self) -> complex:
        """Cell average (1/|cell|) * integral of the field."""
        return complex(self.coeffs[self._center()])

    def conj_symmetry_error(self) -> float:
        """Max |c[-n] - conj(c[n])|; 0 for a real-valued field."""
        rev = self.coeffs[tuple(slice(None, None, -1) for _ in range(self.cell.dims))]
        return float(np.max(np.abs(rev - np.conj(self.coeffs))))

    # ------------------------------------------------------------------
    # evaluation

    def sample_grid(self, resolution) -> np.ndarray:
        """Synthesize on a uniform grid of the cell by inverse DFT.

        The resolution must be at least 2*cutoff + 1 per axis so every stored
        mode lands in a distinct bin (no aliasing of retained modes).
        """
        if np.isscalar(resolution):
            res = (int(resolution),) * self.cell.dims
        else:
            res = tuple(int(r) for r in resolution)
        if len(res) != self.cell.dims:
            raise ValidationError("resolution must give one sample count per axis")
        for ax, r in enumerate(res):
            if r < 2 * self.cutoffs[ax] + 1:
                raise ValidationError(
                    f"resolution {r} on axis {ax} is below the Nyquist bound "
                    f"{2 * self.cutoffs[ax] + 1} for cutoff {self.cutoffs[ax]}"
                )
        spec = np.zeros(res, dtype=np.complex128)
        wrapped = [self.index_grid(ax) % res[ax] for ax in range(self.cell.dims)]
        spec[np.ix_(*wrapped)] = self.coeffs
        return np.fft.ifftn(spec) * np.prod(res)

    def sample_points_1d(self, x) -> np.ndarray:
        """Evaluate a 1D field at arbitrary points (exact synthesis of the series)."""
        if self.cell.dims != 1:
            raise ValidationError("sample_points_1d only applies to 1D fields")
        x = np.asarray(x, dtype=float)
        phases = np.exp(2j * np.pi * np.outer(x, self.index_grid(0)) / self.cell.lengths[0])
        return phases @ self.coeffs


def product_mean(f: FourierField, g: FourierField) -> complex:
    """Exact cell average of the product f*g: sum_n f[n] * g[-n]."""
    cut = tuple(min(a, b) for a, b in zip(f.cutoffs, g.cutoffs))
    fs = f.coeffs[tuple(slice(c - m, c + m + 1) for c, m in zip(f.cutoffs, cut))]
    gs = g.coeffs[tuple(slice(c - m, c + m + 1) for c, m in zip(g.cutoffs, cut))]
    grev = gs[tuple(slice(None, None, -1) for _ in range(f.cell.dims))]
    return complex(np.sum(fs * grev))


def window_factor(q: float, length: float) -> complex:
    """Mean of exp(i*q*x) over [0, length]: (e^{i q L} - 1) / (i q L), with q=0 -> 1.

    Small |q*L| is handled by a series so near-resonant windows lose no accuracy.
    """
    ql = q * length
    if ql == 0.0:
        return 1.0 + 0.0j
    if abs(ql) < 1e-8:
        return 1.0 + 1j * ql / 2.0 - ql * ql / 6.0
    return (np.exp(1j * ql) - 1.0) / (1j * ql)
