"""
Dense linear-algebra kernels used by the beamformer iteration.

Two primitives are provided:

* the dominant generalized eigenvector of a Hermitian pair ``(X, Y)`` with
  ``Y`` positive definite, obtained by Cholesky reduction to a standard
  Hermitian eigenproblem;
* a real square linear solve with a reciprocal condition estimate.

Both have batched variants operating on stacks of matrices (leading axes),
which the solver uses to update every substream in a handful of calls.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotHermitian, NotPositiveDefinite, Singular

__all__ = ['HermitianPair', 'EigResult', 'LinearSolution', 'canonical_phase',
           'dominant_gen_eigvec', 'dominant_gen_eigvecs',
           'dominant_gen_eigvecs_rank_one', 'solve_linear']

HERMITIAN_TOL = 1e-10
SINGULAR_RCOND = 1e-14


def _hermitize(X, name, check=True):
    X = np.asarray(X, dtype=complex)
    Xh = np.conj(np.swapaxes(X, -1, -2))
    if not check:
        return 0.5 * (X + Xh)
    scale = np.linalg.norm(X, axis=(-2, -1))
    dev = np.linalg.norm(X - Xh, axis=(-2, -1))
    if np.any(dev > HERMITIAN_TOL * np.maximum(scale, 1.0)):
        raise NotHermitian(f"{name} is not Hermitian (deviation {np.max(dev):.3g})")
    return 0.5 * (X + Xh)


def canonical_phase(v, axis=-1):
    """
    Rotate vectors so their largest-magnitude entry is real and nonnegative.

    Ties are broken by the lowest index (``np.argmax`` semantics). Zero
    vectors are returned unchanged.

    Parameters
    ----------
    v : array_like, complex
        One vector or a stack of vectors.
    axis : int
        Axis along which the vectors lie.
    """
    v = np.asarray(v, dtype=complex)
    vm = v if axis in (-1, v.ndim - 1) else np.moveaxis(v, axis, -1)
    idx = np.argmax(np.abs(vm), axis=-1)
    pivot = np.take_along_axis(vm, idx[..., None], axis=-1)
    mag = np.abs(pivot)
    nonzero = mag > 0
    phase = np.where(nonzero, pivot / np.where(nonzero, mag, 1.0), 1.0)
    out = vm / phase
    return out if vm is v else np.moveaxis(out, -1, axis)


@dataclass(frozen=True)
class HermitianPair:
    """Matrix pair ``(X, Y)`` with both Hermitian and ``Y`` positive definite.

    Inputs are symmetrized on construction; a deviation from Hermitian
    symmetry above ``1e-10`` (relative, Frobenius) raises `NotHermitian`.
    """
    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X)
        Y = np.asarray(self.Y)
        if X.ndim != 2 or X.shape[0] != X.shape[1] or X.shape != Y.shape:
            raise DimensionMismatch(
                f"expected two equal square matrices, got {X.shape} and {Y.shape}")
        if X.shape[0] < 1:
            raise DimensionMismatch("empty matrix pair")
        object.__setattr__(self, 'X', _hermitize(X, 'X'))
        object.__setattr__(self, 'Y', _hermitize(Y, 'Y'))

    @property
    def n(self):
        return self.X.shape[0]


@dataclass(frozen=True)
class EigResult:
    vector: np.ndarray
    value: float


def dominant_gen_eigvecs(X, Y, check=True):
    """
    Batched dominant generalized eigenvectors of Hermitian pairs.

    Parameters
    ----------
    X, Y : ndarray, shape (..., n, n)
        Stacks of Hermitian matrices; every ``Y`` must be positive definite.

    Returns
    -------
    vectors : ndarray, shape (..., n)
        Unit-norm, phase-canonical maximizers of ``v^H X v / v^H Y v``.
    values : ndarray, shape (...)
        The corresponding maximal quotients.

    ``check=False`` skips the Hermitian-deviation test (inputs are still
    symmetrized) for callers that build the matrices as Hermitian forms.
    """
    X = _hermitize(X, 'X', check)
    Y = _hermitize(Y, 'Y', check)
    if X.shape != Y.shape or X.ndim < 2 or X.shape[-1] != X.shape[-2]:
        raise DimensionMismatch(f"shape mismatch: {X.shape} vs {Y.shape}")
    Lc = _cholesky(Y)
    Linv = np.linalg.inv(Lc)
    LinvH = np.conj(np.swapaxes(Linv, -1, -2))
    Z = Linv @ X @ LinvH
    Z = 0.5 * (Z + np.conj(np.swapaxes(Z, -1, -2)))
    evals, evecs = np.linalg.eigh(Z)
    u = evecs[..., :, -1]
    v = np.einsum('...ij,...j->...i', LinvH, u)
    v = v / np.linalg.norm(v, axis=-1, keepdims=True)
    return canonical_phase(v), evals[..., -1]


def _cholesky(Y):
    try:
        Lc = np.linalg.cholesky(Y)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("Y is not positive definite") from exc
    # numpy's cholesky does not reject every indefinite input (NaNs slip through)
    diag = np.diagonal(Lc, axis1=-2, axis2=-1).real
    if not np.all(np.isfinite(Lc)) or np.any(diag <= 0):
        raise NotPositiveDefinite("Y is not positive definite")
    return Lc


def dominant_gen_eigvecs_rank_one(s, Y):
    """
    Batched dominant generalized eigenvectors for rank-one pairs ``(s s^H, Y)``.

    After the reduction ``Y = L L^H`` the standard problem is
    ``u u^H`` with ``u = L^{-1} s``, whose top eigenpair is ``(||u||^2, u)``,
    so no dense eigensolver is needed. The generalized eigenvector is
    ``L^{-H} u``, normalized and phase-canonical.

    Parameters
    ----------
    s : ndarray, shape (..., n)
    Y : ndarray, shape (..., n, n)
        Hermitian positive definite.
    """
    s = np.asarray(s, dtype=complex)
    Y = _hermitize(Y, 'Y', check=False)
    if Y.shape[:-1] != s.shape or Y.shape[-1] != Y.shape[-2]:
        raise DimensionMismatch(f"shape mismatch: {s.shape} vs {Y.shape}")
    Lc = _cholesky(Y)
    u = np.linalg.solve(Lc, s[..., None])
    v = np.linalg.solve(np.conj(np.swapaxes(Lc, -1, -2)), u)[..., 0]
    value = np.sum(np.abs(u[..., 0]) ** 2, axis=-1)
    v = v / np.linalg.norm(v, axis=-1, keepdims=True)
    return canonical_phase(v), value


def dominant_gen_eigvec(pair):
    """Dominant generalized eigenvector of a single `HermitianPair`.

    The vector maximizes the generalized Rayleigh quotient
    ``(v^H X v) / (v^H Y v)``; ``value`` is that maximum.
    """
    if not isinstance(pair, HermitianPair):
        pair = HermitianPair(*pair)
    v, val = dominant_gen_eigvecs(pair.X, pair.Y)
    return EigResult(vector=v, value=float(val))


@dataclass(frozen=True)
class LinearSolution:
    x: np.ndarray
    rcond: float
    residual: float


def solve_linear(A, b, min_rcond=SINGULAR_RCOND):
    """
    Solve the real square system ``A x = b``.

    Parameters
    ----------
    A : array_like, shape (n, n)
    b : array_like, shape (n,)
    min_rcond : float
        Systems whose reciprocal 1-norm condition number falls below this
        are rejected as singular.

    Returns
    -------
    LinearSolution
        Solution, reciprocal condition number and residual ``||Ax - b||_inf``.

    Raises
    ------
    Singular
        If ``A`` is singular or too ill-conditioned to trust.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or b.shape != (A.shape[0],):
        raise DimensionMismatch(f"cannot solve {A.shape} system with rhs {b.shape}")
    try:
        Ainv = np.linalg.inv(A)
    except np.linalg.LinAlgError as exc:
        raise Singular("matrix is exactly singular") from exc
    norm_a = np.abs(A).sum(axis=0).max()
    norm_ainv = np.abs(Ainv).sum(axis=0).max()
    if not np.isfinite(norm_ainv) or norm_a == 0:
        raise Singular("matrix is singular")
    rcond = 1.0 / (norm_a * norm_ainv)
    if rcond < min_rcond:
        raise Singular(f"reciprocal condition {rcond:.3g} below {min_rcond:.0e}")
    x = np.linalg.solve(A, b)
    residual = float(np.max(np.abs(A @ x - b))) if b.size else 0.0
    return LinearSolution(x=x, rcond=float(rcond), residual=residual)
