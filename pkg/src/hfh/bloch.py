"""Plane-wave Galerkin Bloch operators and band solves for all three families.

Basis: cell-periodic plane waves e^{2*pi*i n.(xi/lambda)} enumerated in
lexicographic order of the multi-index n (components slowest axis first,
each running -cutoff..cutoff).  Stiffness entries for the wave families are

    A[n, n'] = (k + 2*pi*n/lambda) . a_hat[n - n'] . (k + 2*pi*n'/lambda)

and the mass matrix is B[n, n'] = b_hat[n - n'], both Hermitian by
construction.

Carrier conventions for the stored cell-periodic amplitudes:

* wave families: U0 = V0(xi') e^{-i(k.xi' - omega*xi0)}, omega >= 0.  The
  pencil above is solved and its eigenvector converted by v0[n] =
  conj(v[-n]) (an antiunitary equivalence, so residuals and b-weighted
  norms carry over unchanged).
* schrodinger family: U0 = W(xi') e^{+i(k.xi' - omega*xi0)} with omega the
  real eigenvalue (the energy); the eigenvector is stored directly.  This
  sign makes the free-particle spectrum (k + 2*pi*n)^2/(2m) positive.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import NumericalError, UnsupportedScaleError, ValidationError
from .fourier import TWO_PI, Cell, FourierField
from .medium import ScalarWaveMedium, SchrodingerBlocks, VectorWaveMedium

RESIDUAL_TOL = 1e-9
EIG_CLAMP = -1e-10


@dataclass(frozen=True)
class BlochOperator:
    """Assembled Bloch pencil at one crystal wavevector.

    Wave families solve A v = omega^2 B v; the schrodinger family solves
    A v = omega v with B = None (identity weighting).
    """

    family: str
    k: np.ndarray
    cell: Cell
    basis: np.ndarray  # (n_basis, d) multi-indices
    components: int  # 1 for scalar/schrodinger, n for vector (basis is component-major)
    A: np.ndarray
    B: np.ndarray | None
    cutoff: int
    medium_key: str
    notes: tuple = field(default=())

    @property
    def size(self) -> int:
        return self.A.shape[0]

    def hermiticity_defect(self) -> float:
        err = float(np.max(np.abs(self.A - self.A.conj().T)))
        if self.B is not None:
            err = max(err, float(np.max(np.abs(self.B - self.B.conj().T))))
        return err


@dataclass(frozen=True)
class BlochMode:
    """One point (k, omega, band) of the dispersion diagram with its cell-periodic amplitude.

    ``v0`` holds the Fourier coefficients of V0 (shape (components, 2N+1, ...))
    in the family's carrier convention; the normalization is b-weighted
    ((1/|cell|) integral of V0^dag b V0 = 1; plain L2 for schrodinger) and the
    largest-modulus coefficient is made real positive.
    """

    family: str
    k: np.ndarray
    omega: float
    band: int
    v0: np.ndarray
    cutoff: int
    cell: Cell
    gap: float
    residual: float
    medium_key: str

    @property
    def components(self) -> int:
        return self.v0.shape[0]

    def amplitude_field(self, comp: int = 0) -> FourierField:
        return FourierField(self.cell, self.v0[comp])


def _basis_indices(cell: Cell, cutoff: int) -> np.ndarray:
    grids = np.meshgrid(*[np.arange(-cutoff, cutoff + 1)] * cell.dims, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def _k_plus_g(cell: Cell, basis: np.ndarray, k: np.ndarray) -> np.ndarray:
    return k[None, :] + TWO_PI * basis / cell.diag[None, :]


def _as_k(cell: Cell, k) -> np.ndarray:
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if k.shape != (cell.dims,):
        raise ValidationError(f"k must have {cell.dims} component(s)")
    return k


def _truncation_notes(medium_cutoff: int, cutoff: int) -> tuple:
    if medium_cutoff > cutoff:
        msg = (f"operator cutoff {cutoff} below medium cutoff {medium_cutoff}; "
               "medium content beyond the operator lags is truncated")
        warnings.warn(msg)
        return (msg,)
    return ()


def _mirror_hermitian(m: np.ndarray) -> np.ndarray:
    """Make the float matrix exactly Hermitian by mirroring the upper triangle.

    The exact Galerkin matrix is Hermitian entry-for-entry; evaluating each
    entry once and mirroring removes the ~1e-12 asymmetry that float
    non-associativity would otherwise leave at large cutoffs.  Entry values in
    the upper triangle are untouched.
    """
    upper = np.triu(m, 1)
    return upper + upper.conj().T + np.diag(np.real(np.diag(m)))


def assemble_wave_operator(medium: ScalarWaveMedium, k, cutoff: int) -> BlochOperator:
    """Galerkin Bloch pencil for the scalar wave family at wavevector k."""
    if not isinstance(medium, ScalarWaveMedium):
        raise ValidationError("assemble_wave_operator expects a scalar wave medium")
    if cutoff < 1:
        raise ValidationError("cutoff must be at least 1")
    cell = medium.cell
    k = _as_k(cell, k)
    basis = _basis_indices(cell, cutoff)
    kg = _k_plus_g(cell, basis, k)
    lags = basis[:, None, :] - basis[None, :, :]
    A = np.zeros((len(basis), len(basis)), dtype=np.complex128)
    for (i, j) in medium.a.indices():
        if i > j:
            continue
        block = medium.a[(i, j)].gather(lags)
        term = kg[:, None, i] * block * kg[None, :, j]
        A += term if i == j else term + kg[:, None, j] * block * kg[None, :, i]
    B = medium.b.gather(lags)
    notes = _truncation_notes(medium.cutoff, cutoff)
    return BlochOperator("scalar-wave", k, cell, basis, 1, _mirror_hermitian(A),
                         _mirror_hermitian(B), cutoff, medium.fingerprint, notes)


def assemble_vector_operator(medium: VectorWaveMedium, k, cutoff: int) -> BlochOperator:
    """Block Galerkin pencil for the n-component vector wave family (component-major)."""
    if not isinstance(medium, VectorWaveMedium):
        raise ValidationError("assemble_vector_operator expects a vector wave medium")
    if cutoff < 1:
        raise ValidationError("cutoff must be at least 1")
    cell = medium.cell
    k = _as_k(cell, k)
    n = medium.n_comp
    basis = _basis_indices(cell, cutoff)
    kg = _k_plus_g(cell, basis, k)
    lags = basis[:, None, :] - basis[None, :, :]
    nb = len(basis)
    A = np.zeros((n * nb, n * nb), dtype=np.complex128)
    B = np.zeros_like(A)
    for (i, j, kk, l) in medium.a.indices():
        block = medium.a[(i, j, kk, l)].gather(lags)
        A[i * nb:(i + 1) * nb, kk * nb:(kk + 1) * nb] += kg[:, None, j] * block * kg[None, :, l]
    for (i, kk) in medium.b.indices():
        B[i * nb:(i + 1) * nb, kk * nb:(kk + 1) * nb] += medium.b[(i, kk)].gather(lags)
    notes = _truncation_notes(medium.cutoff, cutoff)
    return BlochOperator("vector-wave", k, cell, basis, n, _mirror_hermitian(A),
                         _mirror_hermitian(B), cutoff, medium.fingerprint, notes)


def assemble_schrodinger_operator(blocks: SchrodingerBlocks, k, cutoff: int) -> BlochOperator:
    """Hermitian Bloch Hamiltonian H(k) of the reduced first-order system.

    Substituting the carrier into the cell equation gives H(k) W = omega W with
    kinetic term from the spatial a-block, magnetic term from Im(b_block)
    acting on the shifted gradient, potential from the c-block, and the time
    component of b isolating omega.
    """
    if not isinstance(blocks, SchrodingerBlocks):
        raise ValidationError("assemble_schrodinger_operator expects SchrodingerBlocks")
    if cutoff < 1:
        raise ValidationError("cutoff must be at least 1")
    cell = blocks.cell
    if cell.dims > 2:
        raise UnsupportedScaleError("schrodinger solves support d <= 2")
    k = _as_k(cell, k)
    beta0 = blocks.beta0
    if beta0 == 0.0:
        raise ValidationError("b_block time component has no imaginary part; omega cannot be isolated")
    basis = _basis_indices(cell, cutoff)
    kg = _k_plus_g(cell, basis, k)
    lags = basis[:, None, :] - basis[None, :, :]
    nb = len(basis)
    H = np.zeros((nb, nb), dtype=np.complex128)
    d = cell.dims
    for i in range(1, d + 1):
        for j in range(1, d + 1):
            if (i, j) not in blocks.a_block.comps:
                continue
            block = blocks.a_block[(i, j)].gather(lags)
            H += -kg[:, None, i - 1] * block * kg[None, :, j - 1]
    for j in range(1, d + 1):
        bj = blocks.b_block[(j,)]
        beta_j = bj - bj.conjugate()  # 2i Im(b_j), a real field beta times i
        beta = FourierField(cell, beta_j.coeffs / 1j)
        H += -beta.gather(lags) * kg[None, :, j - 1]
    H += -blocks.c_block.gather(lags)
    H /= -beta0
    notes = _truncation_notes(blocks.cutoff, cutoff)
    return BlochOperator("schrodinger", k, cell, basis, 1, _mirror_hermitian(H), None,
                         cutoff, blocks.fingerprint, notes)


def assemble_operator(medium, k, cutoff: int) -> BlochOperator:
    """Dispatch assembly on the medium type."""
    if isinstance(medium, ScalarWaveMedium):
        return assemble_wave_operator(medium, k, cutoff)
    if isinstance(medium, VectorWaveMedium):
        return assemble_vector_operator(medium, k, cutoff)
    if isinstance(medium, SchrodingerBlocks):
        return assemble_schrodinger_operator(medium, k, cutoff)
    raise ValidationError(f"unknown medium type {type(medium).__name__}")


def _phase_fix(v0: np.ndarray) -> np.ndarray:
    flat = v0.ravel()
    imax = int(np.argmax(np.abs(flat)))
    mag = np.abs(flat[imax])
    if mag == 0.0:
        return v0
    out = v0 * (np.conj(flat[imax]) / mag)
    out.ravel()[imax] = mag  # exact by convention
    return out


def solve_bands(op: BlochOperator, n_bands: int) -> list:
    """Solve the assembled pencil and return the lowest n_bands normalized modes.

    Wave families: eigenvalues are omega^2 (clamped at 0 down to -1e-10;
    anything lower raises an ellipticity violation) and omega = +sqrt.
    Modes are b-normalized, converted to the stored carrier convention,
    phase-fixed, and carry their spectral gap and residual.
    """
    if n_bands < 1 or n_bands > op.size:
        raise ValidationError(f"n_bands must be in 1..{op.size}")
    wave = op.family in ("scalar-wave", "vector-wave")
    if op.family == "vector-wave" and op.cell.dims > 2:
        raise UnsupportedScaleError("3D vector eigensolves are out of scope (assembly only)")
    try:
        if op.B is None:
            evals, evecs = scipy.linalg.eigh(op.A)
        else:
            evals, evecs = scipy.linalg.eigh(op.A, op.B)
    except scipy.linalg.LinAlgError as exc:
        diag = ""
        if op.B is not None:
            diag = f"; cond(B) ~ {np.linalg.cond(op.B):.3e}"
        raise NumericalError(f"eigensolver failed: {exc}{diag}") from exc

    if wave:
        if evals.min() < EIG_CLAMP:
            raise NumericalError(
                f"negative eigenvalue {evals.min():.3e} below the clamp bound; ellipticity violated"
            )
        omegas = np.sqrt(np.clip(evals, 0.0, None))
    else:
        omegas = evals

    nb = len(op.basis)
    shape = (op.components,) + tuple(2 * op.cutoff + 1 for _ in range(op.cell.dims))
    # failure gate scales with the spectral radius so very large bases do not
    # trip on bare LAPACK roundoff; at desk-scale cutoffs it reduces to 1e-9
    gate = max(RESIDUAL_TOL, 1e-13 * float(np.max(np.abs(evals))))
    modes = []
    for idx in range(n_bands):
        v = evecs[:, idx]
        mu = evals[idx]
        r = op.A @ v - mu * (v if op.B is None else op.B @ v)
        residual = float(np.linalg.norm(r) / np.linalg.norm(v))
        if residual > gate:
            raise NumericalError(f"band {idx + 1} residual {residual:.3e} exceeds {gate:.3e}")
        v0 = v.reshape(shape).copy()
        if wave:
            # antiunitary map to the e^{-i(k.xi - omega t)} carrier
            flip = (slice(None),) + tuple(slice(None, None, -1) for _ in range(op.cell.dims))
            v0 = np.conj(v0[flip])
        v0 = _phase_fix(v0)
        others = np.abs(omegas - omegas[idx])
        others[idx] = np.inf
        gap = float(others.min())
        modes.append(BlochMode(op.family, op.k.copy(), float(omegas[idx]), idx + 1, v0,
                               op.cutoff, op.cell, gap, residual, op.medium_key))
    return modes


def solve_at(medium, k, cutoff: int, n_bands: int) -> list:
    """Assemble and solve in one call."""
    return solve_bands(assemble_operator(medium, k, cutoff), n_bands)


def check_nondegenerate(mode: BlochMode, gap_tol: float | None = None) -> bool:
    """True iff the mode's spectral gap exceeds the tolerance.

    Default tolerance 1e-6 * max(1, |omega|); effective-coefficient
    operations require this to hold.
    """
    if gap_tol is None:
        gap_tol = 1e-6 * max(1.0, abs(mode.omega))
    return mode.gap > gap_tol
