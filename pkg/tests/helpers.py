"""Shared independent oracles for the test suite."""

import numpy as np

from fracsolve.scheme import Grid, build_grid
from fracsolve.special import gl_weights


def dense_one_step(problem, grid: Grid) -> np.ndarray:
    """Level-1 solution by brute force: one dense linear solve over the
    K+3 unknowns (both ghosts included), built directly from the scheme
    formulas without any of the production assembly code."""
    K, h, sigma = grid.K, grid.h, grid.sigma
    x = grid.x
    u0 = np.array([float(problem.u0(xi)) for xi in x])
    n = K + 3  # v[-1], v[0..K], v[K+1]; unknown index k maps to k+1
    A = np.zeros((n, n))
    rhs = np.zeros(n)

    terms = problem.fractional_terms()
    for k in range(K + 1):
        row = k + 1
        xk = x[k]
        # fractional sums, j = 0: m = 0 implicit, m = 1 known
        for theta, sign, coeff in terms:
            gl = gl_weights(theta, 1).weights
            c1 = float(coeff(xk, sigma))
            c0 = float(coeff(xk, 0.0))
            A[row, row] += sign * sigma ** (-theta) * gl[0] * c1
            rhs[row] -= sign * sigma ** (-theta) * (
                gl[1] * c0 * u0[k] - c0 * u0[k] * (gl[0] + gl[1])
            )
        a1 = float(problem.a(xk, sigma))
        d1 = float(problem.d(xk, sigma))
        A[row, row - 1] += -a1 / h ** 2 - d1 / (2 * h)
        A[row, row] += 2 * a1 / h ** 2
        A[row, row + 1] += -a1 / h ** 2 + d1 / (2 * h)
        if problem.kernel_beta is not None:
            beta = problem.kernel_beta
            K00 = sigma ** (1 - beta) / (1 - beta)
            b1 = float(problem.b(xk, sigma))
            b0 = float(problem.b(xk, 0.0))
            # implicit half of the m = 0 trapezoid slice
            A[row, row - 1] += -0.5 * K00 * b1 / h ** 2
            A[row, row] += K00 * b1 / h ** 2
            A[row, row + 1] += -0.5 * K00 * b1 / h ** 2
            # explicit half at level 0, ghosts of u0 from the BC at t = 0
            u0g = np.empty(K + 3)
            u0g[1:-1] = u0
            c1l, c2l, phi1 = problem.bc_left
            c3r, c4r, phi2 = problem.bc_right
            u0g[0] = u0[1] - (2 * h / c1l) * (phi1(0.0) - c2l * u0[0]) if c1l else 0.0
            u0g[-1] = u0[-2] + (2 * h / c3r) * (phi2(0.0) - c4r * u0[-1]) if c3r else 0.0
            lap0 = (u0g[k] - 2 * u0g[k + 1] + u0g[k + 2]) / h ** 2
            rhs[row] += 0.5 * K00 * b0 * lap0
        rhs[row] += float(problem.f(xk, 0.0, u0[k]))
        rhs[row] += float(problem.g(xk, sigma))

    c1l, c2l, phi1 = problem.bc_left
    c3r, c4r, phi2 = problem.bc_right
    # boundary condition rows close the system
    A[0, 2] = c1l / (2 * h)
    A[0, 0] = -c1l / (2 * h)
    A[0, 1] = c2l
    rhs[0] = phi1(sigma)
    A[-1, -1] = c3r / (2 * h)
    A[-1, -3] = -c3r / (2 * h)
    A[-1, -2] = c4r
    rhs[-1] = phi2(sigma)

    v = np.linalg.solve(A, rhs)
    return v[1:-1]
