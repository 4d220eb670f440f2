"""Dense algebra for second- and fourth-rank tensors in small dimensions.

Conventions: a matrix is an (n, n) float array; a fourth-rank tensor is an
(n, n, n, n) float array whose entry (i, j, k, l) maps input component (k, l)
to output component (i, j).  Reinterpreting a fourth-rank tensor as an
n^2 x n^2 matrix (rows = (i, j), columns = (k, l), C order) turns the
double contraction into an ordinary matrix-vector product; eigen-based
operations below work on that view.  Dimensions up to n = 4 are supported,
which keeps every eigenproblem at most 16 x 16.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_DIM = 4
DEFAULT_SYM_TOL = 1e-12  # relative to the largest entry magnitude


def _as_matrix(X, name="matrix") -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError(f"{name} must be square, got shape {X.shape}")
    if not 1 <= X.shape[0] <= MAX_DIM:
        raise ValueError(f"{name} dimension {X.shape[0]} outside 1..{MAX_DIM}")
    return X


def _as_tensor4(beta, name="tensor") -> np.ndarray:
    beta = np.asarray(beta, dtype=float)
    if beta.ndim != 4 or len(set(beta.shape)) != 1:
        raise ValueError(f"{name} must have shape (n, n, n, n), got {beta.shape}")
    if not 1 <= beta.shape[0] <= MAX_DIM:
        raise ValueError(f"{name} dimension {beta.shape[0]} outside 1..{MAX_DIM}")
    return beta


def inner(X, Y) -> float:
    """Frobenius pairing sum_ij X_ij Y_ij of two equally sized matrices."""
    X = _as_matrix(X, "X")
    Y = _as_matrix(Y, "Y")
    if X.shape != Y.shape:
        raise ValueError(f"dimension mismatch: {X.shape} vs {Y.shape}")
    return float(np.tensordot(X, Y, axes=2))


def contract(beta, X) -> np.ndarray:
    """Double contraction (beta:X)_ij = sum_kl beta_ijkl X_kl."""
    beta = _as_tensor4(beta, "beta")
    X = _as_matrix(X, "X")
    if beta.shape[0] != X.shape[0]:
        raise ValueError(f"dimension mismatch: {beta.shape} vs {X.shape}")
    return np.einsum("ijkl,kl->ij", beta, X)


def sym(X) -> np.ndarray:
    """Symmetric part (X + X^t)/2."""
    X = _as_matrix(X, "X")
    return 0.5 * (X + X.T)


def outer(w, z) -> np.ndarray:
    """Dyadic matrix (w (x) z)_ij = w_i z_j of two equal-length vectors."""
    w = np.asarray(w, dtype=float)
    z = np.asarray(z, dtype=float)
    if w.ndim != 1 or z.ndim != 1:
        raise ValueError("outer expects 1-D vectors")
    if w.shape != z.shape:
        raise ValueError(f"length mismatch: {w.shape} vs {z.shape}")
    return np.outer(w, z)


def identity_tensor(n: int) -> np.ndarray:
    """Identity mapping on matrices: I_ijkl = delta_ik delta_jl."""
    if not 1 <= n <= MAX_DIM:
        raise ValueError(f"dimension {n} outside 1..{MAX_DIM}")
    eye = np.eye(n)
    return np.einsum("ik,jl->ijkl", eye, eye)


def symmetrizer(n: int) -> np.ndarray:
    """Projection onto symmetric matrices: (delta_ik delta_jl + delta_il delta_jk)/2.

    Contracting it with any X yields (X + X^t)/2; composing it with itself
    reproduces it (it is an orthogonal projection).
    """
    if not 1 <= n <= MAX_DIM:
        raise ValueError(f"dimension {n} outside 1..{MAX_DIM}")
    eye = np.eye(n)
    return 0.5 * (np.einsum("ik,jl->ijkl", eye, eye) + np.einsum("il,jk->ijkl", eye, eye))


def compose(b1, b2) -> np.ndarray:
    """Composition (b1 . b2)_ijkl = sum_mm' b1_ijmm' b2_mm'kl.

    Satisfies contract(compose(b1, b2), X) == contract(b1, contract(b2, X)).
    """
    b1 = _as_tensor4(b1, "b1")
    b2 = _as_tensor4(b2, "b2")
    if b1.shape != b2.shape:
        raise ValueError(f"dimension mismatch: {b1.shape} vs {b2.shape}")
    return np.einsum("ijmn,mnkl->ijkl", b1, b2)


@dataclass(frozen=True)
class SymmetryReport:
    """Outcome of the major/minor symmetry check of a fourth-rank tensor."""

    major: bool
    minor_left: bool
    major_violation: float
    minor_left_violation: float
    max_violation: float


def check_symmetries(beta, tol: float = DEFAULT_SYM_TOL) -> SymmetryReport:
    """Measure violations of beta_ijkl = beta_klij (major) and = beta_jikl (minor).

    `tol` is relative to the largest entry magnitude; a zero tensor passes
    both checks trivially.
    """
    beta = _as_tensor4(beta, "beta")
    if tol <= 0:
        raise ValueError("tol must be positive")
    scale = float(np.max(np.abs(beta)))
    major_v = float(np.max(np.abs(beta - beta.transpose(2, 3, 0, 1))))
    minor_v = float(np.max(np.abs(beta - beta.transpose(1, 0, 2, 3))))
    thresh = tol * scale
    return SymmetryReport(
        major=major_v <= thresh,
        minor_left=minor_v <= thresh,
        major_violation=major_v,
        minor_left_violation=minor_v,
        max_violation=max(major_v, minor_v),
    )


def matrix_view(beta) -> np.ndarray:
    """n^2 x n^2 matrix view of a fourth-rank tensor (copies)."""
    beta = _as_tensor4(beta, "beta")
    n = beta.shape[0]
    return beta.reshape(n * n, n * n).copy()


def max_entry_norm(beta) -> float:
    """Largest entry magnitude (one of the two norms exposed for boundedness)."""
    return float(np.max(np.abs(np.asarray(beta, dtype=float))))


def quadform_extremes(beta) -> tuple[float, float]:
    """Extreme eigenvalues of a major-symmetric tensor's quadratic form.

    The returned minimum is the best constant K with <beta:X, X> >= K |X|^2
    over all matrices X; the maximum bounds the form from above.
    """
    beta = _as_tensor4(beta, "beta")
    if not np.all(np.isfinite(beta)):
        raise ValueError("tensor has non-finite entries")
    report = check_symmetries(beta)
    if not report.major:
        raise ValueError(
            f"quadform_extremes requires major symmetry (violation {report.major_violation:g})"
        )
    n = beta.shape[0]
    M = beta.reshape(n * n, n * n)
    # symmetrize away rounding noise before the eigen-solve
    M = 0.5 * (M + M.T)
    ev = np.linalg.eigvalsh(M)
    return float(ev[0]), float(ev[-1])


def tensor_sqrt(beta) -> np.ndarray:
    """Unique positive definite square root of a major-symmetric SPD tensor.

    The result S is major-symmetric, satisfies compose(S, S) == beta up to
    rounding, and <beta:W, W> == |S:W|^2 for every matrix W.
    """
    beta = _as_tensor4(beta, "beta")
    if not np.all(np.isfinite(beta)):
        raise ValueError("tensor has non-finite entries")
    report = check_symmetries(beta)
    if not report.major:
        raise ValueError(
            f"tensor_sqrt requires major symmetry (violation {report.major_violation:g})"
        )
    n = beta.shape[0]
    M = beta.reshape(n * n, n * n)
    M = 0.5 * (M + M.T)
    ev, vec = np.linalg.eigh(M)
    if ev[0] <= 0:
        raise ValueError(f"tensor_sqrt requires positive definiteness (min eigenvalue {ev[0]:g})")
    root = (vec * np.sqrt(ev)) @ vec.T
    root = 0.5 * (root + root.T)
    return root.reshape(n, n, n, n)


def sym_grad(field, h: float, boundary_tol: float = 1e-12):
    """Discrete symmetrized gradient of a vector field on a uniform grid.

    For a 1-D scalar field of shape (N,) the result is the nodal derivative
    u_x of shape (N,).  For a 2-D vector field of shape (N1, N2, 2) the
    result has shape (N1, N2, 2, 2) holding (grad u + grad u^t)/2 per node.
    Interior nodes use second-order central differences, boundary nodes
    second-order one-sided stencils.  The field must vanish on the grid
    boundary (within `boundary_tol` relative to its largest value).
    """
    field = np.asarray(field, dtype=float)
    if h <= 0:
        raise ValueError("grid spacing must be positive")

    if field.ndim == 1:
        if field.shape[0] < 3:
            raise ValueError("grid too small: need at least 3 nodes per axis")
        _require_zero_boundary(field[[0, -1]], field, boundary_tol)
        return np.gradient(field, h, edge_order=2)

    if field.ndim == 3 and field.shape[2] == 2:
        if field.shape[0] < 3 or field.shape[1] < 3:
            raise ValueError("grid too small: need at least 3 nodes per axis")
        edges = np.concatenate(
            [field[0].ravel(), field[-1].ravel(), field[:, 0].ravel(), field[:, -1].ravel()]
        )
        _require_zero_boundary(edges, field, boundary_tol)
        grad = np.empty(field.shape[:2] + (2, 2))
        for comp in range(2):
            for axis in range(2):
                grad[..., comp, axis] = np.gradient(field[..., comp], h, axis=axis, edge_order=2)
        return 0.5 * (grad + grad.transpose(0, 1, 3, 2))

    raise ValueError(f"unsupported field shape {field.shape}: expected (N,) or (N1, N2, 2)")


def grad_2d(field, h: float) -> np.ndarray:
    """Full discrete Jacobian (d_j u_i) of a 2-D vector field, same stencils as sym_grad."""
    field = np.asarray(field, dtype=float)
    if field.ndim != 3 or field.shape[2] != 2:
        raise ValueError(f"expected shape (N1, N2, 2), got {field.shape}")
    if field.shape[0] < 3 or field.shape[1] < 3:
        raise ValueError("grid too small: need at least 3 nodes per axis")
    grad = np.empty(field.shape[:2] + (2, 2))
    for comp in range(2):
        for axis in range(2):
            grad[..., comp, axis] = np.gradient(field[..., comp], h, axis=axis, edge_order=2)
    return grad


def _require_zero_boundary(values, field, tol):
    scale = float(np.max(np.abs(field))) if field.size else 0.0
    if scale == 0.0:
        return
    if float(np.max(np.abs(values))) > tol * scale:
        raise ValueError("field must vanish on the grid boundary")
