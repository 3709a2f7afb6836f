"""Finite-window averages of periodic and quasi-periodic signals.

Signals are finite Fourier tables, so every window integral has a closed
form and the only approximation in sight is the window length itself.  Each
operation reports the analytic infinite-window limit (by resonance
detection), the numeric averages per window, and the fitted constant C in
|average(a) - limit| <= C / a.

These averages underpin the supercell coupling limits: the same
resonance-or-decay structure decides which coupling coefficients survive.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ValidationError
from .fourier import TWO_PI, FourierField, window_factor

RESONANCE_TOL = 1e-9
RATIONAL_DENOMINATOR_BOUND = 10 ** 6


@dataclass(frozen=True)
class PeriodicSignal1D:
    """Real or complex T-periodic signal with finitely many harmonics e^{2 pi i n x / T}."""

    period: float
    harmonics: dict  # int -> complex

    def __post_init__(self):
        if self.period <= 0:
            raise ValidationError("period must be positive")
        object.__setattr__(self, "harmonics",
                           {int(n): complex(c) for n, c in self.harmonics.items() if c != 0})

    @classmethod
    def constant(cls, value, period=1.0):
        return cls(period, {0: value})

    @classmethod
    def cosine(cls, period: float, harmonic: int = 1, amplitude: float = 1.0, phase: float = 0.0):
        half = 0.5 * amplitude * np.exp(1j * phase)
        return cls(period, {harmonic: half, -harmonic: np.conj(half)})

    @classmethod
    def sine(cls, period: float, harmonic: int = 1, amplitude: float = 1.0):
        return cls(period, {harmonic: amplitude / 2j, -harmonic: -amplitude / 2j})

    def mean(self) -> complex:
        return self.harmonics.get(0, 0.0 + 0.0j)

    def derivative(self) -> "PeriodicSignal1D":
        return PeriodicSignal1D(self.period, {
            n: c * (2j * np.pi * n / self.period) for n, c in self.harmonics.items()
        })

    def frequencies(self):
        """(angular frequency, coefficient) pairs."""
        return [(TWO_PI * n / self.period, c) for n, c in sorted(self.harmonics.items())]


@dataclass(frozen=True)
class WindowAverageResult:
    """Numeric finite-window averages next to the analytic limit.

    ``decay_constant`` is the constant C in |value - limit| <= C / window,
    certified from the harmonic table (each non-resonant harmonic's window
    factor obeys |phi(q, a)| <= 2/(|q| a)), so the bound holds for every
    window, not only the supplied ones; ``resonant`` records the analytic
    classification that produced the limit.
    """

    windows: tuple
    values: tuple
    analytic_limit: complex
    decay_constant: float
    resonant: bool
    note: str = ""

    def errors(self) -> np.ndarray:
        return np.abs(np.asarray(self.values) - self.analytic_limit)


def _check_windows(windows) -> tuple:
    win = tuple(float(a) for a in windows)
    if not win or any(a <= 0 for a in win):
        raise ValidationError("windows must be positive")
    if any(b <= a for a, b in zip(win, win[1:])):
        raise ValidationError("windows must be strictly increasing")
    return win


def _result(windows, values, limit, resonant, cert_constant, note=""):
    values = tuple(complex(v) for v in values)
    return WindowAverageResult(tuple(windows), values, complex(limit), float(cert_constant),
                               resonant, note)


def _certified_constant(freq_coeff_pairs) -> float:
    """Sum of 2|c|/|q| over non-resonant angular frequencies q."""
    total = 0.0
    for q, c in freq_coeff_pairs:
        if abs(q) > RESONANCE_TOL:
            total += 2.0 * abs(c) / abs(q)
    return total


def avg_modulated_1d(f: PeriodicSignal1D, b: float, windows) -> WindowAverageResult:
    """Averages (1/a) int_0^a f(x) e^{i b x} dx.

    The limit is 0 unless T*b/(2 pi) is an integer (within 1e-9), in which
    case it equals the single-period average of f e^{i b x}.
    """
    win = _check_windows(windows)
    values = []
    for a in win:
        values.append(sum(c * window_factor(nu + b, a) for nu, c in f.frequencies()))
    ratio = f.period * b / TWO_PI
    resonant = abs(ratio - round(ratio)) <= RESONANCE_TOL
    limit = 0.0 + 0.0j
    if resonant:
        limit = f.harmonics.get(int(round(-ratio)), 0.0 + 0.0j)
    cert = _certified_constant((nu + b, c) for nu, c in f.frequencies())
    return _result(win, values, limit, resonant, cert,
                   note=f"Tb/2pi = {ratio:.12g} ({'resonant' if resonant else 'non-resonant'})")


def _rational_ratio(t1: float, t2: float):
    """Continued-fraction rationality test for t1/t2 with a denominator bound.

    Floating point cannot certify irrationality.  A ratio is classified
    rational when its best fraction p/q with q <= 1e6 satisfies
    |ratio - p/q| <= 1e-9 / q: the denominator scaling keeps every
    float-represented rational (error ~ eps) while rejecting the spuriously
    close continued-fraction convergents of quadratic irrationals, which sit
    at error ~ 1/q^2 >> tol/q.
    """
    ratio = t1 / t2
    frac = Fraction(ratio).limit_denominator(RATIONAL_DENOMINATOR_BOUND)
    if abs(ratio - float(frac)) <= RESONANCE_TOL / frac.denominator:
        return frac
    return None


def avg_product_periodic(f: PeriodicSignal1D, g: PeriodicSignal1D, windows) -> WindowAverageResult:
    """Averages (1/a) int_0^a f(x) g(x) dx for zero-mean f.

    Incommensurate periods give limit 0; for T1/T2 = p/q the limit is the
    average over the common period q*T1, evaluated as the sum over resonant
    harmonic pairs n/T1 = -n'/T2.
    """
    if abs(f.mean()) > 0:
        raise ValidationError("avg_product_periodic requires f to have zero mean")
    win = _check_windows(windows)
    pairs = [(nu1 + nu2, c1 * c2) for nu1, c1 in f.frequencies() for nu2, c2 in g.frequencies()]
    values = []
    for a in win:
        values.append(sum(c * window_factor(nu, a) for nu, c in pairs))
    frac = _rational_ratio(f.period, g.period)
    limit = 0.0 + 0.0j
    resonant = frac is not None
    if resonant:
        p, q = frac.numerator, frac.denominator
        for n, c1 in f.harmonics.items():
            for n2, c2 in g.harmonics.items():
                if n * q == -n2 * p:
                    limit += c1 * c2
        note = f"T1/T2 = {p}/{q} (rational); limit over common period {q * f.period:.12g}"
    else:
        note = "T1/T2 classified irrational (continued-fraction test)"
    return _result(win, values, limit, resonant, _certified_constant(pairs), note)


def avg_derivative_product(f: PeriodicSignal1D, g: PeriodicSignal1D, windows) -> WindowAverageResult:
    """Averages (1/a) int_0^a f'(x) g(x) dx via the spectral derivative of f.

    f' automatically has zero mean, so this delegates to avg_product_periodic.
    """
    return avg_product_periodic(f.derivative(), g, windows)


def avg_modulated_dd(f: FourierField, lam, boxes) -> WindowAverageResult:
    """Averages (1/|Q|) int_Q f(xi) e^{i lambda . xi} dxi over growing boxes.

    ``boxes`` entries are either scalars (cubes [0, a]^d) or length-d size
    tuples; sizes must grow in every axis.  The limit vanishes unless every
    axis is resonant (T_j * lambda_j in 2 pi Z within 1e-9), in which case it
    is the cell average of f e^{i lambda . xi}.
    """
    cell = f.cell
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if lam.shape != (cell.dims,):
        raise ValidationError(f"lambda must have {cell.dims} component(s)")
    sizes = []
    for box in boxes:
        b = np.full(cell.dims, float(box)) if np.isscalar(box) else np.asarray(box, dtype=float)
        if b.shape != (cell.dims,) or np.any(b <= 0):
            raise ValidationError("each box must give a positive size per axis")
        sizes.append(b)
    if not sizes:
        raise ValidationError("at least one box is required")
    for prev, nxt in zip(sizes, sizes[1:]):
        if not np.all(nxt > prev):
            raise ValidationError("boxes must grow in every axis")

    values = []
    for b in sizes:
        total = f.coeffs.copy()
        for ax in range(cell.dims):
            t = cell.lengths[ax]
            fac = np.array([window_factor(TWO_PI * m / t + lam[ax], b[ax]) for m in f.index_grid(ax)])
            shape = [1] * cell.dims
            shape[ax] = -1
            total = total * fac.reshape(shape)
        values.append(complex(total.sum()))

    fracs = cell.diag * lam / TWO_PI
    resonant = bool(np.all(np.abs(fracs - np.round(fracs)) <= RESONANCE_TOL))
    limit = 0.0 + 0.0j
    if resonant:
        limit = f.coeff([-int(round(v)) for v in fracs])
    cert = 0.0
    for m in np.ndindex(*f.coeffs.shape):
        c = f.coeffs[m]
        if c == 0:
            continue
        qs = [TWO_PI * (m[ax] - f.cutoffs[ax]) / cell.lengths[ax] + lam[ax]
              for ax in range(cell.dims)]
        q_nonres = [abs(q) for q in qs if abs(q) > RESONANCE_TOL]
        if q_nonres:
            cert += 2.0 * abs(c) / max(q_nonres)
    widths = tuple(float(np.min(b)) for b in sizes)  # decay is against the slowest-growing axis
    return _result(widths, values, limit, resonant, cert,
                   note=f"T(.)lambda/2pi = {np.array2string(fracs, precision=12)}")
