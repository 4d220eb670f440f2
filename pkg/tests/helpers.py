"""Shared test oracles."""

import numpy as np

from thermovisc import tensor


def generic_zero_boundary_field(N):
    """Smooth, non-separable 2-D vector field on [0,1]^2 vanishing on the boundary."""
    x = np.linspace(0.0, 1.0, N)
    X, Y = np.meshgrid(x, x, indexing="ij")
    bump = X * (1 - X) * Y * (1 - Y)
    w = np.zeros((N, N, 2))
    w[..., 0] = bump * np.exp(np.sin(3.0 * X + 5.0 * Y))
    w[..., 1] = bump * np.cos(4.0 * X - 2.0 * Y + 0.7) * (1 + X * Y)
    return w, X, Y, x[1] - x[0]


def plain_sym_grad_identity_error(N):
    """Relative defect of the unweighted split of |sym grad w|^2.

    int |sym grad w|^2 = 1/2 int |grad w|^2 + 1/2 int |div w|^2 for
    zero-boundary fields; the chosen stencils satisfy it to rounding.
    """
    w, _, _, h = generic_zero_boundary_field(N)
    sg = tensor.sym_grad(w, h)
    g = tensor.grad_2d(w, h)
    div = g[..., 0, 0] + g[..., 1, 1]
    lhs = float(np.sum(sg**2)) * h * h
    rhs = 0.5 * float(np.sum(g**2)) * h * h + 0.5 * float(np.sum(div**2)) * h * h
    return abs(lhs - rhs) / abs(lhs)


def weighted_sym_grad_identity_error(N):
    """Relative defect of the weighted symmetrized-gradient split

        int |sym grad w|^2 psi = 1/2 int |grad w|^2 psi + 1/2 int |div w|^2 psi
            + 1/2 int (div w)(w . grad psi) - 1/2 int ((w . grad) w) . grad psi

    evaluated on an N x N grid with a smooth positive weight.  Discretization
    leaves a genuine integration-by-parts defect that shrinks under
    refinement.
    """
    w, X, Y, h = generic_zero_boundary_field(N)
    psi = np.exp(X) * (1.0 + Y * Y)
    psid = np.stack([np.exp(X) * (1.0 + Y * Y), np.exp(X) * 2.0 * Y], axis=-1)
    sg = tensor.sym_grad(w, h)
    g = tensor.grad_2d(w, h)
    div = g[..., 0, 0] + g[..., 1, 1]
    w_dot_gradpsi = np.sum(w * psid, axis=2)
    advect = np.einsum("xyij,xyj->xyi", g, w)
    t1 = float(np.sum(np.sum(sg**2, axis=(2, 3)) * psi)) * h * h
    t2 = 0.5 * float(np.sum(np.sum(g**2, axis=(2, 3)) * psi)) * h * h
    t3 = 0.5 * float(np.sum(div**2 * psi)) * h * h
    t4 = 0.5 * float(np.sum(div * w_dot_gradpsi)) * h * h
    t5 = -0.5 * float(np.sum(np.sum(advect * psid, axis=2))) * h * h
    return abs(t1 - (t2 + t3 + t4 + t5)) / abs(t1)
