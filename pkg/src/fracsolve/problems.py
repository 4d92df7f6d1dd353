"""Problem definitions, benchmark problems, hypothesis checks and a
continuous-residual oracle that is independent of the discrete scheme."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .special import caputo_oracle, gamma_fn, weakly_singular_conv


@dataclass(frozen=True)
class FractionalOrders:
    """Order tuple (nu, nu_1..nu_M, mu_1..mu_N) with the ordering constraints
    0 < nu_1 < ... < nu_M < nu, 0 < mu_1 < ... < mu_N < nu, nu_i != mu_j."""

    nu: float
    nu_list: tuple[float, ...] = ()
    mu_list: tuple[float, ...] = ()

    def __post_init__(self):
        if not 0.0 < self.nu <= 1.0:
            raise ValueError(f"nu must lie in (0,1], got {self.nu}")
        for name, seq in (("nu_list", self.nu_list), ("mu_list", self.mu_list)):
            if any(not 0.0 < v < self.nu for v in seq):
                raise ValueError(f"{name} entries must lie in (0, nu), got {seq}")
            if any(a >= b for a, b in zip(seq, seq[1:])):
                raise ValueError(f"{name} must be strictly increasing, got {seq}")
        if set(self.nu_list) & set(self.mu_list):
            raise ValueError("nu_list and mu_list must be pairwise distinct")


def _as_xt(fn_t: Callable[[float], float]) -> Callable:
    return lambda x, t: np.broadcast_to(np.asarray(fn_t(t), dtype=float),
                                        np.shape(x)) if np.ndim(x) else float(fn_t(t))


@dataclass
class ProblemSpec:
    """Everything the scheme needs: coefficients, kernel, nonlinearity,
    sources, boundary data and (optionally) an exact solution.

    Spatial coefficient callables take (x, t) with x scalar or array;
    product coefficients rho0/rho_i/gamma_j take (x, t) as well (time-only
    data is wrapped). phi1/phi2 take t. kernel_beta = None disables the
    memory term; kernel_antiderivative may override the power-law default.
    """

    orders: FractionalOrders
    a: Callable
    d: Callable
    b: Callable
    rho0: Callable
    rho_list: Sequence[Callable] = ()
    gamma_list: Sequence[Callable] = ()
    kernel_beta: Optional[float] = None
    kernel_antiderivative: Optional[Callable] = None
    f: Callable = lambda x, t, u: np.zeros_like(np.asarray(u, dtype=float))
    g: Callable = lambda x, t: np.zeros(np.shape(x))
    u0: Callable = lambda x: np.zeros(np.shape(x))
    bc_left: tuple = (1.0, 0.0, lambda t: 0.0)
    bc_right: tuple = (1.0, 0.0, lambda t: 0.0)
    exact: Optional[Callable] = None
    L: float = 1.0
    T: float = 1.0

    def __post_init__(self):
        if len(self.rho_list) != len(self.orders.nu_list):
            raise ValueError("rho_list length must match orders.nu_list")
        if len(self.gamma_list) != len(self.orders.mu_list):
            raise ValueError("gamma_list length must match orders.mu_list")

    def fractional_terms(self):
        """[(order, sign, coefficient)] for the multi-term time operator."""
        terms = [(self.orders.nu, 1.0, self.rho0)]
        terms += [(th, 1.0, cf) for th, cf in zip(self.orders.nu_list, self.rho_list)]
        terms += [(th, -1.0, cf) for th, cf in zip(self.orders.mu_list, self.gamma_list)]
        return terms


def example_9_1(nu: float, nu1: float | None = None, mu1: float | None = None) -> ProblemSpec:
    """Manufactured-solution benchmark with exact u = cos(pi x) + t^nu/Gamma(1+nu).

    Power kernel t^(-1/3), variable coefficients, homogeneous Neumann BCs and
    a nonlinearity x t sin(u^2); the source g is the closed form that makes
    the given u exact.
    """
    if nu1 is None:
        nu1 = nu / 3.0
    if mu1 is None:
        mu1 = nu / 2.0
    if not (0.0 < nu1 < nu < 1.0 and 0.0 < mu1 < nu):
        raise ValueError(f"need 0 < nu1, mu1 < nu < 1, got nu={nu}, nu1={nu1}, mu1={mu1}")
    orders = FractionalOrders(nu=nu, nu_list=(nu1,), mu_list=(mu1,))
    pi = np.pi

    g1n = gamma_fn(1.0 + nu)
    g2n = gamma_fn(2.0 - nu)
    g1nn1 = gamma_fn(1.0 + nu - nu1)
    g1nm1 = gamma_fn(1.0 + nu - mu1)
    g3m1 = gamma_fn(3.0 - mu1)
    g3nm1 = gamma_fn(3.0 + nu - mu1)

    def exact(x, t):
        return np.cos(pi * x) + np.asarray(t, dtype=float) ** nu / g1n

    def g(x, t):
        x = np.asarray(x, dtype=float)
        c = np.cos(pi * x)
        val = pi ** 2 * (
            np.cos(pi * x / 4.0) + t
            + 1.5 * t ** (2.0 / 3.0) * np.sin(pi * x)
            + t * pi / (3.0 * np.sin(pi / 3.0))
        ) * c
        val = val - x * t * np.sin((c + t ** nu / g1n) ** 2)
        val = val - (x + t) * pi * np.sin(pi * x)
        val = val + 1.0 + t ** (1.0 - nu) * c / g2n + (1.0 + nu) * t \
            + t ** (nu - nu1) / (2.0 * g1nn1)
        val = val - 0.5 * (
            t ** (nu - mu1) / g1nm1
            + 2.0 * t ** (2.0 - mu1) * c / g3m1
            + (2.0 + nu) * (1.0 + nu) * t ** (2.0 + nu - mu1) / g3nm1
        )
        return val

    return ProblemSpec(
        orders=orders,
        a=lambda x, t: np.cos(pi * np.asarray(x) / 4.0) + t,
        d=lambda x, t: np.asarray(x, dtype=float) + t,
        b=lambda x, t: t ** (1.0 / 3.0) + np.sin(pi * np.asarray(x)),
        rho0=_as_xt(lambda t: 1.0 + t),
        rho_list=(_as_xt(lambda t: 0.5),),
        gamma_list=(_as_xt(lambda t: 0.5 * (1.0 + t * t)),),
        kernel_beta=1.0 / 3.0,
        f=lambda x, t, u: np.asarray(x, dtype=float) * t * np.sin(np.asarray(u) ** 2),
        g=g,
        u0=lambda x: np.cos(pi * np.asarray(x)),
        bc_left=(1.0, 0.0, lambda t: 0.0),
        bc_right=(1.0, 0.0, lambda t: 0.0),
        exact=exact,
        L=1.0,
        T=1.0,
    )


def example_9_2(variant: str, nu: float, nu1: float | None = None,
                mu1: float | None = None) -> ProblemSpec:
    """Constant product coefficients, zero source, no exact solution.

    variant 'linear' sets f = 0; variant 'nonlinear' sets f = x t cos(u^2).
    The remaining data (kernel, a, d, b, u0, BCs) matches example_9_1.
    """
    if variant not in ("linear", "nonlinear"):
        raise ValueError(f"variant must be 'linear' or 'nonlinear', got {variant!r}")
    base = example_9_1(nu, nu1, mu1)
    base.rho0 = _as_xt(lambda t: 1.0)
    base.rho_list = (_as_xt(lambda t: 0.5),)
    base.gamma_list = (_as_xt(lambda t: 0.5),)
    base.g = lambda x, t: np.zeros(np.shape(x))
    base.exact = None
    if variant == "linear":
        base.f = lambda x, t, u: np.zeros(np.shape(u))
    else:
        base.f = lambda x, t, u: np.asarray(x, dtype=float) * t * np.cos(np.asarray(u) ** 2)
    return base


def _dx(fn, x: float, t: float, h: float = 1e-3) -> float:
    # fourth-order central first derivative in x
    return (-fn(x + 2 * h, t) + 8 * fn(x + h, t) - 8 * fn(x - h, t) + fn(x - 2 * h, t)) / (12 * h)


def _dxx(fn, x: float, t: float, h: float = 1e-3) -> float:
    # fourth-order central second derivative in x
    return (
        -fn(x + 2 * h, t) + 16 * fn(x + h, t) - 30 * fn(x, t)
        + 16 * fn(x - h, t) - fn(x - 2 * h, t)
    ) / (12 * h * h)


def residual_oracle(problem: ProblemSpec, candidate, points=None, tol: float = 1e-4) -> float:
    """Max continuous-equation residual of a candidate solution over sample points.

    All fractional derivatives go through the quadrature-based Caputo oracle
    and the memory term through adaptive graded quadrature, so the result is
    independent of the marching scheme. Each sub-term is resolved to tol/10.
    """
    if points is None:
        xs = np.linspace(0.1, 0.9, 5) * problem.L
        ts = np.linspace(0.1, 0.9, 5) * problem.T
        points = [(float(x), float(t)) for x in xs for t in ts]
    sub_tol = tol / 10.0
    worst = 0.0
    for x, t in points:
        res = 0.0
        for theta, sign, coeff in problem.fractional_terms():
            prod = lambda s, _c=coeff: float(_c(x, s)) * float(candidate(x, s))
            res += sign * caputo_oracle(prod, theta, t, tol=sub_tol)
        uxx = _dxx(candidate, x, t)
        res -= float(problem.a(x, t)) * uxx
        res += float(problem.d(x, t)) * _dx(candidate, x, t)
        if problem.kernel_beta is not None:
            conv = weakly_singular_conv(
                lambda s: float(problem.b(x, s)) * _dxx(candidate, x, s),
                problem.kernel_beta, t, tol=sub_tol,
            )
            res -= conv
        res -= float(problem.f(x, t, float(candidate(x, t))))
        res -= float(problem.g(x, t))
        worst = max(worst, abs(res))
    return worst


@dataclass(frozen=True)
class ValidationReport:
    """Warn-only report on the structural hypotheses; never blocks a solve."""

    entries: tuple[tuple[str, str, str], ...]

    @property
    def overall(self) -> str:
        return "warn" if any(s == "warn" for _, s, _ in self.entries) else "pass"

    def warnings(self):
        return [e for e in self.entries if e[1] == "warn"]


def validate_hypotheses(problem: ProblemSpec, samples: int = 50) -> ValidationReport:
    """Check the order-ordering, positivity, coefficient-monotonicity and
    kernel-exponent conditions on a sampled grid. Reporting only."""
    entries = []
    o = problem.orders

    # h1: ordering chain; the alpha-dependent upper bound is reported
    # informationally at the strictest reference alpha = 1, i.e. nu/2
    try:
        FractionalOrders(o.nu, o.nu_list, o.mu_list)
        bound = o.nu / 2.0
        offenders = [v for v in (*o.nu_list, *o.mu_list) if v >= bound]
        if offenders:
            entries.append(("h1", "pass",
                            f"ordering holds; note {offenders} >= nu/2 = {bound:g} "
                            "(the alpha = 1 reference bound)"))
        else:
            entries.append(("h1", "pass", "order ordering and alpha=1 bound hold"))
    except ValueError as exc:
        entries.append(("h1", "warn", str(exc)))

    xs = np.linspace(0.0, problem.L, samples)
    ts = np.linspace(0.0, problem.T, samples)
    xx, tt = np.meshgrid(xs, ts)

    a_min = min(float(np.min(np.asarray(problem.a(xx, t)))) for t in ts)
    if a_min > 0.0:
        entries.append(("h2", "pass", f"min a = {a_min:g} > 0"))
    else:
        entries.append(("h2", "warn", f"ellipticity fails: min a = {a_min:g}"))

    named = [("rho0", problem.rho0)]
    named += [(f"rho{i+1}", c) for i, c in enumerate(problem.rho_list)]
    named += [(f"gamma{j+1}", c) for j, c in enumerate(problem.gamma_list)]
    for name, coeff in named:
        vals = np.array([float(np.min(np.asarray(coeff(xs, t)))) for t in ts])
        if np.min(vals) <= 0.0:
            entries.append(("h2", "warn", f"{name} not strictly positive (min {np.min(vals):g})"))
        diffs = np.diff(vals)
        if np.min(diffs) < -1e-10:
            entries.append(("h3", "warn",
                            f"{name} decreases in t (min slope sample {np.min(diffs):g})"))
    if not any(e[0] == "h3" for e in entries):
        entries.append(("h3", "pass", "sampled product coefficients nondecreasing in t"))

    if problem.kernel_beta is not None:
        beta = problem.kernel_beta
        if 0.0 < beta <= 1.0 - o.nu:
            entries.append(("h4", "pass", f"beta = {beta:g} in (0, 1-nu]"))
        else:
            entries.append(("h4", "warn",
                            f"kernel exponent beta = {beta:g} outside (0, 1-nu] with nu = {o.nu:g}"))
    else:
        entries.append(("h4", "pass", "no memory kernel"))

    if problem.exact is not None:
        xs_fine = np.linspace(0.0, problem.L, 101)
        gap = float(np.max(np.abs(np.asarray(problem.exact(xs_fine, 0.0))
                                  - np.asarray(problem.u0(xs_fine)))))
        status = "pass" if gap < 1e-12 else "warn"
        entries.append(("h7", status, f"|exact(x,0) - u0| = {gap:g}"))

    return ValidationReport(entries=tuple(entries))
