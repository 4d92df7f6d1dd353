"""Special functions and fractional-calculus primitives.

Gamma/digamma, the power kernel omega_theta(t) = t^(theta-1)/Gamma(theta),
the sign kernel N(t; theta1, theta2), positivity thresholds, Mittag-Leffler,
Grunwald-Letnikov weights, and a high-accuracy Caputo quadrature used as an
independent oracle by the tests.

All functions here are pure; no shared state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

EULER_GAMMA = 0.5772156649015328606

# largest time horizon for which the nu_hat_gamma root exists: exp(-EulerGamma)
T_GAMMA = math.exp(-EULER_GAMMA)


class NonConvergenceError(RuntimeError):
    """A series or iterative refinement hit its cap before converging."""


class BracketingError(ValueError):
    """A root finder could not bracket a sign change."""


def gamma_fn(x: float) -> float:
    """Euler Gamma function.

    Relative error well below 1e-13 on [0.05, 50] (Lanczos-class libm
    implementation). Raises ValueError at the poles x = 0, -1, -2, ...
    """
    if x <= 0.0 and x == math.floor(x):
        raise ValueError(f"gamma pole at x = {x}")
    return math.gamma(x)


# Asymptotic expansion coefficients: -B_{2n}/(2n) for psi(x) ~ ln x - 1/(2x) + sum c_n x^(-2n)
_PSI_ASYMPT = (
    -1.0 / 12.0,
    1.0 / 120.0,
    -1.0 / 252.0,
    1.0 / 240.0,
    -1.0 / 132.0,
    691.0 / 32760.0,
    -1.0 / 12.0,
)


def digamma_fn(x: float) -> float:
    """Digamma psi(x) for x > 0, absolute error <= 1e-12 on [0.05, 50].

    Shifts the argument up past 10 with psi(x+1) = psi(x) + 1/x, then uses
    the standard asymptotic series.
    """
    if x <= 0.0:
        raise ValueError(f"digamma requires x > 0, got {x}")
    acc = 0.0
    while x < 10.0:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    power = inv2
    for c in _PSI_ASYMPT:
        series += c * power
        power *= inv2
    return acc + math.log(x) - 0.5 / x + series


def omega(theta: float, t: float) -> float:
    """Power kernel t^(theta-1)/Gamma(theta) for theta > 0."""
    if theta <= 0.0:
        raise ValueError(f"omega requires theta > 0, got {theta}")
    if t <= 0.0:
        if theta < 1.0:
            raise ValueError(f"omega({theta}, t) singular at t = {t} <= 0")
        if t < 0.0:
            raise ValueError(f"omega requires t > 0, got {t}")
    return t ** (theta - 1.0) / gamma_fn(theta)


def kernel_N(t: float, theta1: float, theta2: float) -> float:
    """Sign kernel omega_{1-theta1}(t) - omega_{1-theta2}(t).

    Nonnegative on (0, T*] exactly when theta1 is below the positivity
    threshold for the pair; see nu_star.
    """
    if not (0.0 < theta2 <= theta1 < 1.0):
        raise ValueError(
            f"kernel_N requires 0 < theta2 <= theta1 < 1, got ({theta1}, {theta2})"
        )
    return omega(1.0 - theta1, t) - omega(1.0 - theta2, t)


def _bisect(fn, lo: float, hi: float, tol: float = 1e-6) -> float:
    flo, fhi = fn(lo), fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise BracketingError(
            f"no sign change on [{lo}, {hi}]: f(lo)={flo:g}, f(hi)={fhi:g}"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fmid = fn(mid)
        if fmid == 0.0:
            return mid
        if flo * fmid < 0.0:
            hi = mid
        else:
            lo, flo = mid, fmid
    return 0.5 * (lo + hi)


def nu_star(t_star: float, ratio: float, tol: float = 1e-6) -> float:
    """Largest nu in (0,1) with N(t; nu, ratio*nu) >= 0 for all t in (0, t_star].

    N(t; nu, r*nu) >= 0 iff t^((r-1)nu) >= Gamma(1-nu)/Gamma(1-r*nu); the left
    side decreases in t, so the constraint binds at t = t_star and the sweep
    reduces to a 1-D root in nu of N(t_star; nu, r*nu) = 0, found by bisection.
    """
    if t_star <= 0.0:
        raise ValueError(f"t_star must be positive, got {t_star}")
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must lie in (0,1), got {ratio}")
    return _bisect(
        lambda nu: kernel_N(t_star, nu, ratio * nu), 1e-4, 1.0 - 1e-9, tol
    )


def nu_hat_gamma(t_star: float, tol: float = 1e-6) -> float:
    """Threshold nu_hat below which omega_{1-nu}(t) increases in nu on (0, t_star].

    d omega_{1-nu}(t)/d nu = omega_{1-nu}(t) (psi(1-nu) - ln t), so the
    condition is psi(1 - nu) >= ln t_star; the root of
    psi(1 - nu) = ln(t_star) is found by bisection. Requires
    t_star < exp(-EulerGamma) (else the root degenerates to 0).
    """
    if not 0.0 < t_star <= T_GAMMA:
        raise ValueError(
            f"t_star must lie in (0, e^-gamma ~ {T_GAMMA:.4f}], got {t_star}"
        )
    log_t = math.log(t_star)
    if t_star == T_GAMMA:
        return 0.0
    return _bisect(lambda nu: digamma_fn(1.0 - nu) - log_t, 0.0, 1.0 - 1e-9, tol)


def mittag_leffler(theta: float, z: float, max_terms: int = 10**5) -> float:
    """Mittag-Leffler E_theta(z) = sum_m z^m / Gamma(1 + m*theta) by direct series.

    Intended for desk-scale |z| <= 50, theta in (0, 1].
    """
    if not 0.0 < theta <= 1.0:
        raise ValueError(f"theta must lie in (0,1], got {theta}")
    total = 1.0
    z_pow = 1.0
    for m in range(1, max_terms):
        z_pow *= z
        term = z_pow / gamma_fn(1.0 + m * theta)
        total += term
        if abs(term) < 1e-16 * (1.0 + abs(total)):
            return total
    raise NonConvergenceError(
        f"Mittag-Leffler series did not converge in {max_terms} terms (theta={theta}, z={z})"
    )


@dataclass(frozen=True)
class GLWeights:
    """Grunwald-Letnikov weights rho_m = (-1)^m binom(order, m), m = 0..n."""

    order: float
    weights: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.weights)


def gl_weights(theta: float, n: int) -> GLWeights:
    """GL weights of a fractional order theta in (0,1] up to index n.

    Recurrence rho_0 = 1, rho_m = rho_{m-1} (1 - (1+theta)/m).
    """
    if not 0.0 < theta <= 1.0:
        raise ValueError(f"theta must lie in (0,1], got {theta}")
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    w = np.empty(n + 1)
    w[0] = 1.0
    for m in range(1, n + 1):
        w[m] = w[m - 1] * (1.0 - (1.0 + theta) / m)
    return GLWeights(order=theta, weights=w)


def _check_theta_ordering(theta1: float, theta2: float, theta: float, T: float) -> None:
    if not (0.0 < theta2 < theta1 <= theta <= 1.0):
        raise ValueError(
            f"need 0 < theta2 < theta1 <= theta <= 1, got ({theta1}, {theta2}, {theta})"
        )
    if T <= 0.0:
        raise ValueError(f"T must be positive, got {T}")


def threshold_T1(theta1: float, theta2: float, T: float) -> float:
    """Horizon min{T, (theta1 Gamma(1+theta1-theta2)/theta2)^(1/(theta1-theta2))}."""
    _check_theta_ordering(theta1, theta2, theta1, T)
    inner = theta1 * gamma_fn(1.0 + theta1 - theta2) / theta2
    return min(T, inner ** (1.0 / (theta1 - theta2)))


def threshold_T2(theta1: float, theta2: float, theta: float, T: float) -> float:
    """Horizon min{T, (theta1 G(1+theta-theta2)/(theta2 G(1+theta-theta1)))^(1/(theta1-theta2))}."""
    _check_theta_ordering(theta1, theta2, theta, T)
    inner = (
        theta1
        * gamma_fn(1.0 + theta - theta2)
        / (theta2 * gamma_fn(1.0 + theta - theta1))
    )
    return min(T, inner ** (1.0 / (theta1 - theta2)))


# ---------------------------------------------------------------------------
# weakly singular quadrature and the Caputo oracle

_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(8)


def _gauss_cell(phi, a: float, b: float, p: float, t_shift: float) -> float:
    # integral over [a,b] of tau^-p * phi(tau) with 8-point Gauss
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    total = 0.0
    for xi, wi in zip(_GAUSS_X, _GAUSS_W):
        tau = mid + half * xi
        total += wi * tau ** (-p) * phi(tau)
    return total * half


def singular_integral(phi, t: float, p: float, n_cells: int, ratio: float = 0.7) -> float:
    """Integral of tau^-p phi(tau) over (0, t), geometric grading toward both ends.

    The weight is singular at tau = 0; phi itself may carry an integrable
    power singularity at tau = t (e.g. a Caputo integrand of a t^theta power).
    The sliver at tau = 0 uses a two-term Taylor expansion of phi against the
    exact weight antiderivative; the sliver at tau = t fits a local power law
    to phi when it looks singular there.
    """
    half = 0.5 * t
    total = 0.0

    # left half: weight singularity at tau = 0
    edges = half * ratio ** np.arange(n_cells + 1)
    for i in range(n_cells):
        total += _gauss_cell(phi, edges[i + 1], edges[i], p, t)
    a = edges[-1]
    eps = 0.5 * a
    phi_mid = phi(eps)
    dphi = (phi(1.5 * eps) - phi(0.5 * eps)) / eps
    phi_at_0 = phi_mid - dphi * eps
    total += phi_at_0 * a ** (1.0 - p) / (1.0 - p)
    total += dphi * a ** (2.0 - p) / (2.0 - p)

    # right half: possible phi singularity at tau = t
    redges = t - half * ratio ** np.arange(n_cells + 1)
    for i in range(n_cells):
        total += _gauss_cell(phi, redges[i], redges[i + 1], p, t)
    b = t - redges[-1]
    phi1 = phi(t - b)
    phi2 = phi(t - 0.5 * b)
    if phi1 * phi2 > 0.0 and phi2 / phi1 > 0.0:
        # phi(tau) ~ C (t-tau)^(q-1) locally; exact for pure powers
        q = 1.0 - math.log(phi2 / phi1) / math.log(2.0)
        if q > 1e-3:
            c = phi1 / b ** (q - 1.0)
            total += t ** (-p) * c * b ** q / q
            return total
    # regular or sign-changing tail: midpoint rule on the sliver
    total += (t - 0.5 * b) ** (-p) * phi2 * b
    return total


def weakly_singular_conv(fn, kernel_power: float, t: float, tol: float = 1e-8,
                         max_cells: int = 320) -> float:
    """Integral of (t-s)^-p fn(s) ds over (0,t), refined until successive
    graded-mesh evaluations differ by less than tol."""
    if t <= 0.0:
        return 0.0
    phi = lambda tau: fn(t - tau)
    prev = singular_integral(phi, t, kernel_power, 24)
    n = 36
    while n <= max_cells:
        cur = singular_integral(phi, t, kernel_power, n)
        if abs(cur - prev) < tol:
            return cur
        prev = cur
        n = int(n * 1.5)
    raise NonConvergenceError(
        f"singular quadrature did not reach tol={tol} within {max_cells} cells"
    )


def caputo_oracle(fn, theta: float, t: float, tol: float = 1e-8) -> float:
    """Caputo derivative (1/Gamma(1-theta)) int_0^t (t-s)^-theta f'(s) ds.

    Reference implementation by graded composite Gauss quadrature with the
    derivative taken by central differences; independent of the GL scheme.
    """
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta must lie in (0,1), got {theta}")
    if t <= 0.0:
        raise ValueError(f"t must be positive, got {t}")
    h_glob = max(1e-7, 6e-6 * t)

    def dfn(s: float) -> float:
        # shrink the step near s = 0 so central differences survive an
        # integrable derivative singularity of power-type functions
        h = min(h_glob, 1e-3 * s) if s > 0.0 else h_glob
        if s < h:
            return (-3.0 * fn(s) + 4.0 * fn(s + h) - fn(s + 2 * h)) / (2.0 * h)
        return (fn(s + h) - fn(s - h)) / (2.0 * h)

    integral = weakly_singular_conv(dfn, theta, t, tol=tol * gamma_fn(1.0 - theta))
    return integral / gamma_fn(1.0 - theta)


@dataclass(frozen=True)
class PositivityReport:
    """Positivity thresholds for the sign kernel at a given horizon t_star."""

    t_star: float
    nu_hat_gamma: float
    nu_star_by_ratio: dict[float, float]
    samples: list[tuple[float, float]] | None = None


def positivity_report(t_star: float, ratios: tuple[float, ...] = (0.5, 1.0 / 3.0, 0.25),
                      n_samples: int = 0) -> PositivityReport:
    """Compute nu_hat and nu* thresholds at a horizon, optionally sampling
    N(t; nu*, ratio nu*) curves for plotting."""
    stars = {r: nu_star(t_star, r) for r in ratios}
    samples = None
    if n_samples > 0:
        r0 = ratios[0]
        nu = stars[r0]
        ts = np.linspace(t_star / n_samples, t_star, n_samples)
        samples = [(float(t), kernel_N(float(t), nu, r0 * nu)) for t in ts]
    return PositivityReport(
        t_star=t_star,
        nu_hat_gamma=nu_hat_gamma(t_star),
        nu_star_by_ratio=stars,
        samples=samples,
    )
