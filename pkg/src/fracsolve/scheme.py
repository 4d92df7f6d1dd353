"""Implicit finite-difference scheme for the multi-term fractional problem.

Time stepping is first order (Grunwald-Letnikov in time, backward in the
elliptic part), second order in space with ghost-point boundary elimination.
Each level solves one tridiagonal system; fractional and convolution history
sums make a full solve cost O(K * J^2).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .special import GLWeights, gl_weights


class SchemeError(RuntimeError):
    """Assembly or solve failure; carries the failing time level when known."""

    def __init__(self, message: str, level: int | None = None):
        super().__init__(message if level is None else f"{message} (time level {level})")
        self.level = level


@dataclass(frozen=True)
class Grid:
    """Uniform space-time mesh on [0,L] x [0,T] with K cells and J steps."""

    K: int
    J: int
    L: float
    T: float

    @property
    def h(self) -> float:
        return self.L / self.K

    @property
    def sigma(self) -> float:
        return self.T / self.J

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.K + 1)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.J + 1)


def build_grid(K: int, J: int, L: float, T: float) -> Grid:
    if K < 2 or J < 1:
        raise ValueError(f"need K >= 2 and J >= 1, got K={K}, J={J}")
    if L <= 0.0 or T <= 0.0:
        raise ValueError(f"need L > 0 and T > 0, got L={L}, T={T}")
    return Grid(K=K, J=J, L=L, T=T)


@dataclass
class SolutionField:
    """Nodal values u[j][k] on a grid; row 0 is the initial condition."""

    grid: Grid
    values: np.ndarray  # shape (J+1, K+1)


@dataclass
class TridiagonalSystem:
    """One implicit time level: lower/diag/upper bands and right-hand side.

    For rows still carrying a ghost value, lower[0] holds the coefficient of
    u_{-1} and upper[K] the coefficient of u_{K+1}; eliminate_ghosts folds
    them into the interior bands and zeroes the slots.
    """

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray


@dataclass(frozen=True)
class ConvolutionWeights:
    """Trapezoid-rule convolution weights for a weakly singular power kernel.

    weights[j][m] = integral of K(sigma_{j+1} - s) over [sigma_m, sigma_{m+1}],
    computed from the exact antiderivative of K(t) = t^-beta.
    """

    beta: float
    sigma: float
    table: list[np.ndarray] = field(repr=False)

    def column(self, j: int) -> np.ndarray:
        return self.table[j]


def convolution_weights(beta: float, grid: Grid, antiderivative=None) -> ConvolutionWeights:
    """Weights K_{m,j} for m <= j <= J-1.

    For the power kernel t^-beta the exact antiderivative t^(1-beta)/(1-beta)
    is used; a user kernel may supply its own antiderivative A with
    K_{m,j} = A(sigma_{j+1}-sigma_m) - A(sigma_{j+1}-sigma_{m+1}).
    """
    if not 0.0 <= beta < 1.0:
        raise ValueError(f"kernel exponent beta must lie in [0,1), got {beta}")
    if antiderivative is None:
        antiderivative = lambda t: t ** (1.0 - beta) / (1.0 - beta)
    sigma = grid.sigma
    table = []
    for j in range(grid.J):
        m = np.arange(j + 1)
        table.append(
            antiderivative((j + 1 - m) * sigma) - antiderivative((j - m) * sigma)
        )
    return ConvolutionWeights(beta=beta, sigma=sigma, table=table)


class HistoryBuffer:
    """Per-term history of coefficient-times-solution rows at past levels."""

    def __init__(self, base0: np.ndarray):
        # base0 = coefficient(t=0) * u0, subtracted in every GL term
        self.base0 = np.asarray(base0, dtype=float)
        self.rows: list[np.ndarray] = [self.base0.copy()]

    def append(self, row: np.ndarray) -> None:
        self.rows.append(np.asarray(row, dtype=float))

    def __len__(self) -> int:
        return len(self.rows)

    def stacked(self) -> np.ndarray:
        return np.vstack(self.rows)


def caputo_history_sum(theta: float, history: HistoryBuffer, coeff_next,
                       gl: GLWeights, sigma: float, j: int):
    """Split the GL approximation of D^theta(coeff * u) at level j+1.

    Returns (implicit_coeff, lag): implicit_coeff multiplies the unknown
    u^{j+1}; lag collects all known history, i.e.
    sigma^-theta [ sum_{m=1}^{j+1} rho_m P^{j+1-m}
                   - base0 * sum_{m=0}^{j+1} rho_m ]
    with P^m the stored product rows.
    """
    if len(history) != j + 1:
        raise SchemeError(
            f"history holds {len(history)} levels, expected {j + 1}", level=j
        )
    if len(gl.weights) < j + 2:
        raise SchemeError("GL weight table too short", level=j)
    scale = sigma ** (-theta)
    w = gl.weights[1 : j + 2]
    past = history.stacked()[::-1]  # row m-1 is P^{j+1-m}
    lag = scale * (w @ past - history.base0 * gl.weights[: j + 2].sum())
    implicit = scale * gl.weights[0] * np.asarray(coeff_next, dtype=float)
    return implicit, lag


def _laplacian_with_ghosts(u: np.ndarray, h: float, bc_left, bc_right, t: float) -> np.ndarray:
    """Second difference (u_{k-1} - 2u_k + u_{k+1})/h^2 on all nodes, with the
    boundary ghosts reconstructed from the Robin conditions at time t.

    At a Dirichlet side (c1 = 0) the ghost is undefined; the entry is set to 0
    (that row is replaced by a Dirichlet row downstream and never used)."""
    lap = np.empty_like(u)
    lap[1:-1] = (u[:-2] - 2.0 * u[1:-1] + u[2:]) / (h * h)
    c1, c2, phi1 = bc_left
    c3, c4, phi2 = bc_right
    if c1 != 0.0:
        ghost = u[1] - (2.0 * h / c1) * (phi1(t) - c2 * u[0])
        lap[0] = (ghost - 2.0 * u[0] + u[1]) / (h * h)
    else:
        lap[0] = 0.0
    if c3 != 0.0:
        ghost = u[-2] + (2.0 * h / c3) * (phi2(t) - c4 * u[-1])
        lap[-1] = (u[-2] - 2.0 * u[-1] + ghost) / (h * h)
    else:
        lap[-1] = 0.0
    return lap


def assemble_step(problem, grid: Grid, histories: list[HistoryBuffer],
                  cw: ConvolutionWeights | None, u_levels: np.ndarray,
                  j: int, gl_tables=None, lap_history=None) -> TridiagonalSystem:
    """Assemble the implicit tridiagonal system for level j+1.

    `problem` must expose fractional_terms() -> [(theta, sign, coeff_fn)],
    coefficient callables a/d/b, nonlinearity f, source g. gl_tables maps
    order -> GLWeights (built here if omitted); lap_history holds the
    b * u_xx rows 0..j needed when a convolution kernel is present. Rows at
    k = 0 and k = K carry ghost coefficients in lower[0]/upper[K]; pass the
    system through eliminate_ghosts before solving.
    """
    x = grid.x
    h, sigma = grid.h, grid.sigma
    t_next = (j + 1) * sigma
    K = grid.K

    if gl_tables is None:
        gl_tables = {
            theta: gl_weights(theta, j + 1)
            for theta, _, _ in problem.fractional_terms()
        }
    diag = np.zeros(K + 1)
    rhs = np.zeros(K + 1)

    # fractional history sums
    for (theta, sign, coeff_fn), hist in zip(problem.fractional_terms(), histories):
        gl = gl_tables[theta]
        coeff_next = np.broadcast_to(
            np.asarray(coeff_fn(x, t_next), dtype=float), x.shape
        )
        implicit, lag = caputo_history_sum(theta, hist, coeff_next, gl, sigma, j)
        diag += sign * implicit
        rhs -= sign * lag

    # implicit elliptic part
    a_next = np.broadcast_to(np.asarray(problem.a(x, t_next), dtype=float), x.shape).copy()
    d_next = np.broadcast_to(np.asarray(problem.d(x, t_next), dtype=float), x.shape)

    # convolution: the m = j trapezoid half containing level j+1 is implicit,
    # all earlier slices are explicit history
    if cw is not None:
        if lap_history is None:
            raise SchemeError("lap_history required when a kernel is present", level=j)
        col = cw.column(j)
        b_next = np.broadcast_to(np.asarray(problem.b(x, t_next), dtype=float), x.shape)
        a_next = a_next + 0.5 * col[j] * b_next
        w_expl = np.zeros(j + 1)
        w_expl[: j + 1] += 0.5 * col  # b^m u^m halves, m = 0..j
        w_expl[1 : j + 1] += 0.5 * col[: j]  # b^{m+1} u^{m+1} halves, m = 0..j-1
        rhs += w_expl @ lap_history[: j + 1]

    A = a_next / (h * h)
    D = d_next / (2.0 * h)
    lower = -A - D
    upper = -A + D
    diag += 2.0 * A

    # explicit nonlinearity at level j and source at level j+1
    t_cur = j * sigma
    u_cur = u_levels[j]
    rhs += np.asarray(problem.f(x, t_cur, u_cur), dtype=float)
    rhs += np.broadcast_to(np.asarray(problem.g(x, t_next), dtype=float), x.shape)

    if not (np.all(np.isfinite(diag)) and np.all(np.isfinite(rhs))
            and np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
        raise SchemeError("non-finite coefficient during assembly", level=j + 1)
    return TridiagonalSystem(lower=lower, diag=diag, upper=upper, rhs=rhs)


def eliminate_ghosts(sys: TridiagonalSystem, bc_left, bc_right, h: float,
                     t: float) -> TridiagonalSystem:
    """Fold the boundary ghost values into the tridiagonal bands.

    Robin side c1 u_x + c2 u = phi1: the central-difference ghost
    u_{-1} = u_1 - (2h/c1)(phi1 - c2 u_0) is substituted into the PDE row at
    k = 0 (mirrored at k = K). A side with c1 = 0 becomes the Dirichlet row
    u_0 = phi1/c2. Both coefficients zero is rejected.
    """
    c1, c2, phi1 = bc_left
    c3, c4, phi2 = bc_right
    if c1 == 0.0 and c2 == 0.0:
        raise ValueError("degenerate boundary condition at x = 0 (c1 = c2 = 0)")
    if c3 == 0.0 and c4 == 0.0:
        raise ValueError("degenerate boundary condition at x = L (c3 = c4 = 0)")

    if c1 != 0.0:
        ghost_coef = sys.lower[0]
        sys.diag[0] += ghost_coef * 2.0 * h * c2 / c1
        sys.upper[0] += ghost_coef
        sys.rhs[0] += ghost_coef * (2.0 * h / c1) * phi1(t)
    else:
        sys.diag[0] = 1.0
        sys.upper[0] = 0.0
        sys.rhs[0] = phi1(t) / c2
    sys.lower[0] = 0.0

    if c3 != 0.0:
        ghost_coef = sys.upper[-1]
        sys.diag[-1] -= ghost_coef * 2.0 * h * c4 / c3
        sys.lower[-1] += ghost_coef
        sys.rhs[-1] -= ghost_coef * (2.0 * h / c3) * phi2(t)
    else:
        sys.diag[-1] = 1.0
        sys.lower[-1] = 0.0
        sys.rhs[-1] = phi2(t) / c4
    sys.upper[-1] = 0.0
    return sys


def thomas_solve(sys: TridiagonalSystem) -> np.ndarray:
    """Thomas forward elimination / back substitution for a tridiagonal system."""
    n = len(sys.diag)
    c_prime = np.empty(n)
    d_prime = np.empty(n)
    if sys.diag[0] == 0.0:
        raise SchemeError("zero pivot in tridiagonal solve at row 0")
    c_prime[0] = sys.upper[0] / sys.diag[0]
    d_prime[0] = sys.rhs[0] / sys.diag[0]
    for i in range(1, n):
        denom = sys.diag[i] - sys.lower[i] * c_prime[i - 1]
        if denom == 0.0:
            raise SchemeError(f"zero pivot in tridiagonal solve at row {i}")
        if i < n - 1:
            c_prime[i] = sys.upper[i] / denom
        d_prime[i] = (sys.rhs[i] - sys.lower[i] * d_prime[i - 1]) / denom
    x = np.empty(n)
    x[-1] = d_prime[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d_prime[i] - c_prime[i] * x[i + 1]
    return x


def advance(problem, grid: Grid) -> SolutionField:
    """March the implicit scheme over all time levels.

    Sequential in j; each level appends to every history buffer. Raises
    SchemeError annotated with the failing level.
    """
    x = grid.x
    J, K = grid.J, grid.K
    u = np.empty((J + 1, K + 1))
    u[0] = np.broadcast_to(np.asarray(problem.u0(x), dtype=float), x.shape)

    gl_tables = {
        theta: gl_weights(theta, J + 1) for theta, _, _ in problem.fractional_terms()
    }
    histories = [
        HistoryBuffer(np.broadcast_to(np.asarray(cf(x, 0.0), dtype=float), x.shape) * u[0])
        for _, _, cf in problem.fractional_terms()
    ]

    cw = None
    lap_history = None
    if problem.kernel_beta is not None:
        cw = convolution_weights(problem.kernel_beta, grid,
                                 antiderivative=problem.kernel_antiderivative)
        # b * u_xx rows with reconstructed ghosts, one per computed level
        lap_history = np.empty((J + 1, K + 1))
        b0 = np.broadcast_to(np.asarray(problem.b(x, 0.0), dtype=float), x.shape)
        lap_history[0] = b0 * _laplacian_with_ghosts(
            u[0], grid.h, problem.bc_left, problem.bc_right, 0.0
        )

    for j in range(J):
        t_next = (j + 1) * grid.sigma
        try:
            sys = assemble_step(problem, grid, histories, cw, u, j,
                                gl_tables=gl_tables, lap_history=lap_history)
            sys = eliminate_ghosts(sys, problem.bc_left, problem.bc_right, grid.h, t_next)
            u[j + 1] = thomas_solve(sys)
        except SchemeError:
            raise
        except Exception as exc:  # annotate with the failing level
            raise SchemeError(str(exc), level=j + 1) from exc
        if not np.all(np.isfinite(u[j + 1])):
            raise SchemeError("non-finite solution values", level=j + 1)
        for (theta, sign, cf), hist in zip(problem.fractional_terms(), histories):
            coeff = np.broadcast_to(np.asarray(cf(x, t_next), dtype=float), x.shape)
            hist.append(coeff * u[j + 1])
        if cw is not None:
            b_next = np.broadcast_to(np.asarray(problem.b(x, t_next), dtype=float), x.shape)
            lap_history[j + 1] = b_next * _laplacian_with_ghosts(
                u[j + 1], grid.h, problem.bc_left, problem.bc_right, t_next
            )

    return SolutionField(grid=grid, values=u)


def richardson(u_coarse: SolutionField, u_fine: SolutionField, p: int = 1) -> SolutionField:
    """Extrapolate in time from solves at steps sigma and sigma/2, order p."""
    gc, gf = u_coarse.grid, u_fine.grid
    if gf.K != gc.K or gf.J != 2 * gc.J or gf.L != gc.L or gf.T != gc.T:
        raise ValueError("richardson needs the same spatial grid and halved time step")
    if p < 1:
        raise ValueError(f"extrapolation order must be >= 1, got {p}")
    factor = 2.0 ** p
    values = (factor * u_fine.values[::2] - u_coarse.values) / (factor - 1.0)
    return SolutionField(grid=gc, values=values)


def max_abs_error(numeric: SolutionField, exact) -> float:
    """Max nodal error against a closed-form solution exact(x, t)."""
    g = numeric.grid
    xx, tt = np.meshgrid(g.x, g.t)
    return float(np.max(np.abs(exact(xx, tt) - numeric.values)))
