"""Small dense complex-matrix kernel and entropy functions.

Matrices are ``numpy`` complex arrays of shape ``(d, d)`` with ``d`` equal
to 2 (the working qubit) or 4 (qubit times order controller). Composite
operators use the system as the slow index and the controller as the fast
index, i.e. ``np.kron(system, controller)``.

All entropies are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "StateError",
    "DensityOp",
    "I2",
    "SIGMA_X",
    "SIGMA_Z",
    "basis_op",
    "adjoint",
    "matmul",
    "kron",
    "trace",
    "partial_trace_controller",
    "hermitian_eigh",
    "hermitian_eigenvalues",
    "binary_entropy",
    "von_neumann_entropy",
    "relative_entropy",
    "validate_density",
]

DEFAULT_TOL = 1e-10
HERMITIAN_TOL = 1e-10
JACOBI_OFFDIAG_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100
EIG_CLIP = 1e-12
EIG_HARD_NEGATIVE = 1e-9
SUPPORT_TOL = 1e-12

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class StateError(ValueError):
    """A matrix failed density-operator validation.

    ``invariant`` is one of ``"hermiticity"``, ``"trace"``, ``"positivity"``
    or ``"dimension"``.
    """

    def __init__(self, invariant: str, message: str):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


def _as_matrix(m) -> np.ndarray:
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("matrix has non-finite entries")
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=complex, copy=True)
    out.setflags(write=False)
    return out


def basis_op(i: int, j: int, dim: int = 2) -> np.ndarray:
    """Return the matrix unit ``|i><j|``."""
    out = np.zeros((dim, dim), dtype=complex)
    out[i, j] = 1.0
    return out


def adjoint(m) -> np.ndarray:
    return _as_matrix(m).conj().T


def matmul(a, b) -> np.ndarray:
    a = _as_matrix(a)
    b = _as_matrix(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b


def kron(a, b) -> np.ndarray:
    """Kronecker product with ``a`` as the slow (system) factor."""
    a = _as_matrix(a)
    b = _as_matrix(b)
    n, m = a.shape[0], b.shape[0]
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(n * m, n * m)


def trace(m) -> complex:
    return complex(np.trace(_as_matrix(m)))


def partial_trace_controller(m) -> np.ndarray:
    """Trace out the controller (fast) qubit of a 4x4 system-controller operator."""
    m = _as_matrix(m)
    if m.shape != (4, 4):
        raise ValueError(f"partial trace needs a 4x4 operator, got {m.shape}")
    return np.einsum("ikjk->ij", m.reshape(2, 2, 2, 2))


def _hermiticity_error(a: list) -> float:
    n = len(a)
    return max(abs(a[i][j] - a[j][i].conjugate()) for i in range(n) for j in range(i, n))


def _jacobi(a: list, want_vectors: bool = True) -> tuple[list, list | None]:
    """Cyclic Jacobi on a Hermitian matrix given as nested lists (modified in place).

    Returns unsorted diagonal values and, if requested, the rotation matrix
    whose columns are the eigenvectors.
    """
    n = len(a)
    v = [[1.0 + 0j if i == j else 0j for j in range(n)] for i in range(n)] if want_vectors else None
    tol = JACOBI_OFFDIAG_TOL * max(1.0, max(abs(x) for row in a for x in row))
    pairs = [(p, q) for p in range(n - 1) for q in range(p + 1, n)]

    for _ in range(JACOBI_MAX_SWEEPS + 1):
        if all(abs(a[p][q]) <= tol for p, q in pairs):
            break
        for p, q in pairs:
            apq = a[p][q]
            r = abs(apq)
            if r == 0.0:
                continue
            e = apq / r
            theta = 0.5 * math.atan2(2.0 * r, a[q][q].real - a[p][p].real)
            c = math.cos(theta)
            s = math.sin(theta)
            # rotation R = I + (c-1)(E_pp + E_qq) + s e E_pq - s conj(e) E_qp; a <- R^dag a R
            se, sec = s * e, s * e.conjugate()
            for row in a:
                akp, akq = row[p], row[q]
                row[p] = c * akp - sec * akq
                row[q] = se * akp + c * akq
            ap, aq = a[p], a[q]
            for k in range(n):
                apk, aqk = ap[k], aq[k]
                ap[k] = c * apk - se * aqk
                aq[k] = sec * apk + c * aqk
            ap[q] = aq[p] = 0j
            if v is not None:
                for row in v:
                    vkp, vkq = row[p], row[q]
                    row[p] = c * vkp - sec * vkq
                    row[q] = se * vkp + c * vkq
    else:
        raise ArithmeticError(f"Jacobi iteration did not converge in {JACOBI_MAX_SWEEPS} sweeps")
    return [a[i][i].real for i in range(n)], v


def _hermitian_lists(m, check: bool) -> list:
    a = _as_matrix(m).tolist()
    if check and _hermiticity_error(a) > HERMITIAN_TOL:
        raise ValueError("matrix is not Hermitian")
    n = len(a)
    for i in range(n):
        a[i][i] = complex(a[i][i].real)
        for j in range(i + 1, n):
            a[j][i] = a[i][j].conjugate()
    return a


def hermitian_eigh(m, *, check: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Returns ``(values, vectors)`` with ascending real eigenvalues and the
    matching eigenvectors as columns, so ``m = V diag(values) V^dagger``.
    Sweeps stop once every off-diagonal modulus is at most ``1e-14`` (relative
    to the largest entry when that exceeds one).
    """
    # plain Python scalars: numpy call overhead dominates at these sizes
    vals, v = _jacobi(_hermitian_lists(m, check))
    order = sorted(range(len(vals)), key=vals.__getitem__)
    return (np.array([vals[i] for i in order]),
            np.array([[row[i] for i in order] for row in v], dtype=complex))


def hermitian_eigenvalues(m) -> np.ndarray:
    """Ascending real eigenvalues of a Hermitian matrix."""
    return np.array(sorted(_jacobi(_hermitian_lists(m, True), want_vectors=False)[0]))


def binary_entropy(u: float) -> float:
    """``-u ln u - (1-u) ln(1-u)`` with ``0 ln 0 = 0``."""
    if u < -EIG_CLIP or u > 1.0 + EIG_CLIP or math.isnan(u):
        raise ValueError(f"binary entropy argument {u} outside [0, 1]")
    u = min(max(u, 0.0), 1.0)
    return -_xlogx(u) - _xlogx(1.0 - u)


def _xlogx(x: float) -> float:
    return x * math.log(x) if x > 0.0 else 0.0


def _clipped_spectrum(vals) -> list:
    lo = min(vals)
    if lo < -EIG_HARD_NEGATIVE:
        raise StateError("positivity", f"eigenvalue {lo:.3e} is negative")
    return [max(x, 0.0) for x in vals]


def _entropy_of_lists(a: list) -> float:
    vals, _ = _jacobi(a, want_vectors=False)
    return -sum(_xlogx(x) for x in _clipped_spectrum(vals))


def von_neumann_entropy(rho: DensityOp) -> float:
    return _entropy_of_lists(rho.mat.tolist())


def relative_entropy(rho: DensityOp, sigma: DensityOp) -> float:
    """Quantum relative entropy ``tr[rho (ln rho - ln sigma)]``."""
    if rho.dim != sigma.dim:
        raise ValueError("relative entropy of states with different dimensions")
    s_vals, s_vecs = _jacobi(sigma.mat.tolist())
    r = rho.mat.tolist()
    n = len(r)
    cross = 0.0
    for i, lam in enumerate(s_vals):
        # population of rho along sigma's i-th eigenvector
        col = [s_vecs[k][i] for k in range(n)]
        pop = sum(col[k].conjugate() * r[k][l] * col[l] for k in range(n) for l in range(n)).real
        if lam <= SUPPORT_TOL:
            if pop > SUPPORT_TOL:
                raise StateError(
                    "positivity", "support of rho is not contained in the support of sigma"
                )
            continue
        cross += pop * math.log(lam)
    return -_entropy_of_lists(r) - cross


@dataclass(frozen=True, eq=False)
class DensityOp:
    """Validated density operator (Hermitian, unit trace, positive semidefinite).

    Build one with :func:`validate_density`; the constructor itself only
    freezes the array.
    """

    mat: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        object.__setattr__(self, "mat", _frozen(self.mat))

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def populations(self) -> np.ndarray:
        return self.mat.diagonal().real.copy()

    def __repr__(self) -> str:
        return f"DensityOp(dim={self.dim}, mat={np.array2string(self.mat, precision=6)})"


def _shifted_cholesky_ok(a: list, shift: float) -> bool:
    """True when ``a + shift * I`` admits an LDL^dagger factorization with positive pivots.

    For Hermitian ``a`` this holds exactly when the smallest eigenvalue exceeds
    ``-shift``; it costs a fraction of a full eigen-decomposition.
    """
    n = len(a)
    low = [[0j] * n for _ in range(n)]
    d = [0.0] * n
    for j in range(n):
        lj = low[j]
        dj = a[j][j].real + shift
        for k in range(j):
            x = lj[k]
            dj -= (x.real * x.real + x.imag * x.imag) * d[k]
        if not dj > 0.0:
            return False
        d[j] = dj
        for i in range(j + 1, n):
            li = low[i]
            acc = a[i][j]
            for k in range(j):
                acc -= li[k] * lj[k].conjugate() * d[k]
            li[j] = acc / dj
    return True


def validate_density(m, tol: float = DEFAULT_TOL) -> DensityOp:
    """Check the density-operator invariants and wrap ``m``.

    Raises :class:`StateError` naming the first violated invariant.
    """
    arr = np.array(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise StateError("dimension", f"expected a non-empty square matrix, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise StateError("dimension", "matrix has non-finite entries")
    a = arr.tolist()
    herm = _hermiticity_error(a)
    if herm > tol:
        raise StateError("hermiticity", f"max |m - m^dagger| = {herm:.3e} > {tol:.1e}")
    tr = sum(a[i][i] for i in range(len(a)))
    if abs(tr - 1.0) > tol:
        raise StateError("trace", f"trace {tr.real:.12g} differs from 1 by more than {tol:.1e}")
    if not _shifted_cholesky_ok(a, tol):
        lo = float(hermitian_eigenvalues(arr)[0])
        if lo < -tol:
            raise StateError("positivity", f"minimum eigenvalue {lo:.3e} < -{tol:.1e}")
    # arr is a private copy, so it can be frozen in place
    arr.setflags(write=False)
    out = object.__new__(DensityOp)
    object.__setattr__(out, "mat", arr)
    object.__setattr__(out, "tol", tol)
    return out
