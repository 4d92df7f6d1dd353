"""Command-line driver: config parsing, the solve/converge/nu-star/
residual-check commands, CSV emission and optional figure rendering."""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

import numpy as np

from . import __version__
from .expressions import ExpressionError, compile_expression
from .problems import (FractionalOrders, ProblemSpec, example_9_1,
                       example_9_2, residual_oracle, validate_hypotheses)
from .scheme import (SchemeError, advance, build_grid, max_abs_error,
                     richardson)
from .special import kernel_N, nu_hat_gamma, nu_star, omega

LIBRARY_PROBLEMS = ("example_9_1", "example_9_2_linear", "example_9_2_nonlinear")

DEFAULT_NU_SWEEP = tuple(round(0.1 * i, 1) for i in range(1, 10))
DEFAULT_GRIDS = ((10, 10), (20, 20), (30, 30))
NU_STAR_RATIOS = (1.0 / 2.0, 1.0 / 3.0, 1.0 / 4.0)


class ConfigError(ValueError):
    """Malformed or incomplete run configuration."""


@dataclass
class RunSpec:
    """Fully resolved description of one CLI run."""

    command: str
    problem: str = "example_9_1"
    nu: float = 0.5
    nu1: float | None = None
    mu1: float | None = None
    custom: dict = field(default_factory=dict)  # expression sources by field name
    L: float = 1.0
    T: float = 1.0
    kernel_beta: float | None = None
    bc: tuple = (1.0, 0.0, "0", 1.0, 0.0, "0")  # c1 c2 phi1 c3 c4 phi2
    grids: tuple = ()
    richardson: bool = True
    richardson_order: int = 1
    snapshots: int = 8
    nu_sweep: tuple = DEFAULT_NU_SWEEP
    t_star: tuple = ()
    sample_nu: float | None = None
    out: str = "fracsolve_out.csv"
    emit_samples: bool = False
    plot: bool = False


_CUSTOM_FIELDS = ("a", "d", "b", "rho0", "rho1", "gamma1", "f", "g", "u0", "exact")


def parse_config(text: str, command: str | None = None) -> RunSpec:
    """Parse a TOML config document into a RunSpec."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML parse error: {exc}") from exc

    problem = doc.get("problem", {})
    orders = doc.get("orders", {})
    grid = doc.get("grid", {})
    kernel = doc.get("kernel", {})
    bc = doc.get("bc", {})
    output = doc.get("output", {})
    run = doc.get("run", {})

    cmd = command or run.get("command")
    if cmd is None:
        raise ConfigError("no command given (CLI subcommand or [run] command)")
    if cmd not in ("solve", "converge", "nu-star", "residual-check"):
        raise ConfigError(f"unknown command {cmd!r}")

    name = problem.get("name", "example_9_1")
    custom = {}
    if name == "custom":
        for key in _CUSTOM_FIELDS:
            if key in problem:
                src = problem[key]
                try:
                    compile_expression(src)
                except ExpressionError as exc:
                    raise ConfigError(f"[problem] {key}: {exc}") from exc
                custom[key] = src
        for key in ("a", "u0"):
            if key not in custom:
                raise ConfigError(f"custom problem requires [problem] {key}")
    elif name not in LIBRARY_PROBLEMS:
        raise ConfigError(f"unknown problem {name!r}; known: {LIBRARY_PROBLEMS} or 'custom'")

    grids: tuple = ()
    if "grids" in grid:
        grids = tuple((int(K), int(J)) for K, J in grid["grids"])
    elif "K" in grid and "J" in grid:
        grids = ((int(grid["K"]), int(grid["J"])),)
    if cmd in ("solve",) and not grids:
        raise ConfigError("[grid] K and J (or grids) required for solve")
    if cmd == "converge" and not grids:
        grids = DEFAULT_GRIDS

    t_star = tuple(run.get("t_star", ()))
    if cmd == "nu-star" and not t_star:
        t_star = tuple(round(0.01 * i, 2) for i in range(1, 12))

    phi1 = str(bc.get("phi1", "0"))
    phi2 = str(bc.get("phi2", "0"))
    for src in (phi1, phi2):
        try:
            compile_expression(src)
        except ExpressionError as exc:
            raise ConfigError(f"[bc] boundary expression: {exc}") from exc

    default_richardson = cmd == "converge"
    return RunSpec(
        command=cmd,
        problem=name,
        nu=float(orders.get("nu", 0.5)),
        nu1=float(orders["nu1"]) if "nu1" in orders else None,
        mu1=float(orders["mu1"]) if "mu1" in orders else None,
        custom=custom,
        L=float(problem.get("L", 1.0)),
        T=float(problem.get("T", 1.0)),
        kernel_beta=float(kernel["beta"]) if "beta" in kernel else None,
        bc=(float(bc.get("c1", 1.0)), float(bc.get("c2", 0.0)), phi1,
            float(bc.get("c3", 1.0)), float(bc.get("c4", 0.0)), phi2),
        grids=grids,
        richardson=bool(run.get("richardson", default_richardson)),
        richardson_order=int(run.get("richardson_order", 1)),
        snapshots=int(run.get("snapshots", 8)),
        nu_sweep=tuple(run.get("nu_sweep", DEFAULT_NU_SWEEP)),
        t_star=t_star,
        sample_nu=float(run["sample_nu"]) if "sample_nu" in run else None,
        out=str(output.get("path", "fracsolve_out.csv")),
        emit_samples=bool(output.get("emit_samples", False)),
        plot=bool(output.get("plot", False)),
    )


def serialize(spec: RunSpec) -> str:
    """Render a RunSpec back to TOML that parse_config round-trips."""
    lines = ["[problem]", f'name = "{spec.problem}"',
             f"L = {_fmt(spec.L)}", f"T = {_fmt(spec.T)}"]
    for key, src in spec.custom.items():
        lines.append(f'{key} = "{src}"')
    lines += ["", "[orders]", f"nu = {_fmt(spec.nu)}"]
    if spec.nu1 is not None:
        lines.append(f"nu1 = {_fmt(spec.nu1)}")
    if spec.mu1 is not None:
        lines.append(f"mu1 = {_fmt(spec.mu1)}")
    if spec.grids:
        inner = ", ".join(f"[{K}, {J}]" for K, J in spec.grids)
        lines += ["", "[grid]", f"grids = [{inner}]"]
    if spec.kernel_beta is not None:
        lines += ["", "[kernel]", f"beta = {_fmt(spec.kernel_beta)}"]
    c1, c2, phi1, c3, c4, phi2 = spec.bc
    lines += ["", "[bc]", f"c1 = {_fmt(c1)}", f"c2 = {_fmt(c2)}", f'phi1 = "{phi1}"',
              f"c3 = {_fmt(c3)}", f"c4 = {_fmt(c4)}", f'phi2 = "{phi2}"']
    lines += ["", "[output]", f'path = "{spec.out}"',
              f"emit_samples = {str(spec.emit_samples).lower()}",
              f"plot = {str(spec.plot).lower()}"]
    lines += ["", "[run]", f'command = "{spec.command}"',
              f"richardson = {str(spec.richardson).lower()}",
              f"richardson_order = {spec.richardson_order}",
              f"snapshots = {spec.snapshots}",
              f"nu_sweep = [{', '.join(_fmt(v) for v in spec.nu_sweep)}]"]
    if spec.t_star:
        lines.append(f"t_star = [{', '.join(_fmt(v) for v in spec.t_star)}]")
    if spec.sample_nu is not None:
        lines.append(f"sample_nu = {_fmt(spec.sample_nu)}")
    return "\n".join(lines) + "\n"


def _fmt(v: float) -> str:
    """Fixed 17-significant-digit float formatting for byte-stable output."""
    return f"{float(v):.17g}"


def build_problem(spec: RunSpec) -> ProblemSpec:
    """Resolve the RunSpec's problem reference into a ProblemSpec."""
    if spec.problem == "example_9_1":
        return example_9_1(spec.nu, spec.nu1, spec.mu1)
    if spec.problem == "example_9_2_linear":
        return example_9_2("linear", spec.nu, spec.nu1, spec.mu1)
    if spec.problem == "example_9_2_nonlinear":
        return example_9_2("nonlinear", spec.nu, spec.nu1, spec.mu1)

    exprs = {k: compile_expression(v) for k, v in spec.custom.items()}
    zero = lambda x, t: np.zeros(np.shape(x))

    def coeff(key, default=zero):
        if key not in exprs:
            return default
        e = exprs[key]
        return lambda x, t: e(x=np.asarray(x, dtype=float), t=t)

    orders = FractionalOrders(
        nu=spec.nu,
        nu_list=(spec.nu1,) if spec.nu1 is not None else (),
        mu_list=(spec.mu1,) if spec.mu1 is not None else (),
    )
    c1, c2, phi1_src, c3, c4, phi2_src = spec.bc
    phi1 = compile_expression(phi1_src)
    phi2 = compile_expression(phi2_src)
    f_expr = exprs.get("f")
    u0_expr = exprs["u0"]
    exact_expr = exprs.get("exact")
    return ProblemSpec(
        orders=orders,
        a=coeff("a"),
        d=coeff("d"),
        b=coeff("b"),
        rho0=coeff("rho0", default=lambda x, t: np.ones(np.shape(x))),
        rho_list=(coeff("rho1"),) if spec.nu1 is not None else (),
        gamma_list=(coeff("gamma1"),) if spec.mu1 is not None else (),
        kernel_beta=spec.kernel_beta,
        f=(lambda x, t, u: f_expr(x=np.asarray(x, dtype=float), t=t, u=u))
        if f_expr else (lambda x, t, u: np.zeros(np.shape(u))),
        g=coeff("g"),
        u0=lambda x: u0_expr(x=np.asarray(x, dtype=float)),
        bc_left=(c1, c2, lambda t: float(phi1(t=t))),
        bc_right=(c3, c4, lambda t: float(phi2(t=t))),
        exact=(lambda x, t: exact_expr(x=np.asarray(x, dtype=float), t=t))
        if exact_expr else None,
        L=spec.L,
        T=spec.T,
    )


def _solve_field(problem, K, J, L, T, use_richardson, p):
    coarse = advance(problem, build_grid(K, J, L, T))
    if not use_richardson:
        return coarse
    fine = advance(problem, build_grid(K, 2 * J, L, T))
    return richardson(coarse, fine, p)


def _write_csv(path: str, header: str, rows: list[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")


def _max_workers() -> int:
    env = os.environ.get("FRACSOLVE_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def cmd_converge(spec: RunSpec) -> list[str]:
    """Error table nu,K,J,gimel over the order sweep and grid list."""

    def job(nu, K, J):
        if spec.problem == "example_9_1":
            problem = example_9_1(nu, spec.nu1, spec.mu1)
        else:
            local = RunSpec(**{**asdict(spec), "nu": nu})
            local.custom = spec.custom
            problem = build_problem(local)
        if problem.exact is None:
            raise ConfigError("converge requires a problem with an exact solution")
        fld = _solve_field(problem, K, J, problem.L, problem.T,
                           spec.richardson, spec.richardson_order)
        return max_abs_error(fld, problem.exact)

    tasks = [(nu, K, J) for nu in spec.nu_sweep for K, J in spec.grids]
    with ThreadPoolExecutor(max_workers=_max_workers()) as pool:
        gimels = list(pool.map(lambda args: job(*args), tasks))
    rows = [f"{_fmt(nu)},{K},{J},{_fmt(gimel)}"
            for (nu, K, J), gimel in zip(tasks, gimels)]
    _write_csv(spec.out, "nu,K,J,gimel", rows)
    if spec.plot:
        from .report import plot_convergence
        plot_convergence(tasks, gimels, _sibling(spec.out, "png"))
    return rows


def cmd_nu_star(spec: RunSpec) -> list[str]:
    """Threshold table t_star,nu_hat,nu_star_1,nu_star_2,nu_star_3."""
    rows = []
    table = []
    for ts in spec.t_star:
        nh = nu_hat_gamma(ts)
        stars = [nu_star(ts, r) for r in NU_STAR_RATIOS]
        table.append((ts, nh, stars))
        rows.append(",".join([_fmt(ts), _fmt(nh)] + [_fmt(v) for v in stars]))
    _write_csv(spec.out, "t_star,nu_hat,nu_star_1,nu_star_2,nu_star_3", rows)

    samples = None
    if spec.emit_samples:
        ts = max(spec.t_star)
        nu = spec.sample_nu if spec.sample_nu is not None else nu_star(ts, 0.5)
        tgrid = np.linspace(ts / 400.0, ts, 400)
        sample_rows = []
        samples = []
        for t in tgrid:
            om = omega(1.0 - nu, float(t))
            kernels = [kernel_N(float(t), nu, nu / (j + 2)) for j in range(3)]
            samples.append((float(t), om, kernels))
            sample_rows.append(",".join(
                [_fmt(t), _fmt(om)] + [_fmt(v) for v in kernels]))
        _write_csv(_sibling(spec.out, "samples.csv"),
                   "t,omega,N_1,N_2,N_3", sample_rows)
    if spec.plot:
        from .report import plot_thresholds
        plot_thresholds(table, samples, _sibling(spec.out, "png"))
    return rows


def cmd_solve(spec: RunSpec) -> list[str]:
    """Long-format t,x,u rows at evenly spaced snapshot levels."""
    problem = build_problem(spec)
    report = validate_hypotheses(problem)
    for hid, status, message in report.entries:
        if status == "warn":
            print(f"warning [{hid}]: {message}", file=sys.stderr)
    K, J = spec.grids[0]
    grid = build_grid(K, J, problem.L, problem.T)
    field_ = _solve_field(problem, K, J, problem.L, problem.T,
                          spec.richardson, spec.richardson_order)
    levels = np.unique(np.linspace(0, field_.grid.J, spec.snapshots).round().astype(int))
    rows = []
    for j in levels:
        t = field_.grid.t[j]
        for k, x in enumerate(field_.grid.x):
            rows.append(f"{_fmt(t)},{_fmt(x)},{_fmt(field_.values[j][k])}")
    _write_csv(spec.out, "t,x,u", rows)
    if spec.plot:
        from .report import plot_snapshots
        plot_snapshots(field_, levels, _sibling(spec.out, "png"))
    return rows


def cmd_residual_check(spec: RunSpec) -> list[str]:
    """Continuous-residual check of a problem's exact solution."""
    problem = build_problem(spec)
    if problem.exact is None:
        raise ConfigError("residual-check requires a problem with an exact solution")
    tol = 1e-4
    res = residual_oracle(problem, problem.exact, tol=tol)
    rows = [f"{_fmt(tol)},{_fmt(res)}"]
    _write_csv(spec.out, "tol,max_residual", rows)
    return rows


def _sibling(path: str, suffix: str) -> str:
    root, _ = os.path.splitext(path)
    return f"{root}.{suffix}"


_COMMANDS = {
    "solve": cmd_solve,
    "converge": cmd_converge,
    "nu-star": cmd_nu_star,
    "residual-check": cmd_residual_check,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fracsolve",
        description="Finite-difference solver for multi-term time-fractional problems",
    )
    parser.add_argument("--version", action="version", version=f"fracsolve {__version__}")
    sub = parser.add_subparsers(dest="command")
    for name in _COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True)
        sp.add_argument("--out")
        sp.add_argument("--no-richardson", action="store_true")
        sp.add_argument("--emit-samples", action="store_true")
        sp.add_argument("--plot", action="store_true")

    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        with open(args.config, encoding="utf-8") as fh:
            spec = parse_config(fh.read(), command=args.command)
    except (OSError, ConfigError, ExpressionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.out:
        spec.out = args.out
    if args.no_richardson:
        spec.richardson = False
    if args.emit_samples:
        spec.emit_samples = True
    if args.plot:
        spec.plot = True
    try:
        _COMMANDS[spec.command](spec)
    except (ConfigError, ExpressionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SchemeError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
