"""Command-line entry point for extremal-sl."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from extremal_sl import __version__
from extremal_sl.config import RunConfig, load_config, resolve_threads, save_config
from extremal_sl.errors import ExtremalSLError, ParameterError
from extremal_sl.grid import GammaParam, GridFunction, build, constant, step

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

SCAN_COLUMNS = ("gamma", "m_hat", "grad_norm", "duality_gap", "converged")
PERIOD_COLUMNS = ("alpha", "omega_minus", "omega_plus", "I0", "err")


# ------------------------------------------------------------------ #
# Argument parsing helpers
# ------------------------------------------------------------------ #

def parse_range(text: str) -> list[float]:
    """`a:b:step` (inclusive of b up to rounding) or a comma-separated list."""
    if ":" in text:
        try:
            a, b, inc = (float(part) for part in text.split(":"))
        except ValueError:
            raise ParameterError(f"expected a:b:step, got {text!r}") from None
        if inc <= 0 or b < a:
            raise ParameterError(f"empty range {text!r}")
        count = int(np.floor((b - a) / inc + 1e-9)) + 1
        return [round(a + i * inc, 12) for i in range(count)]
    return parse_list(text)


def parse_list(text: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ParameterError(f"expected a comma-separated list of numbers, got {text!r}") from None
    if not values:
        raise ParameterError("empty list")
    return values


def parse_alphas(text: str) -> list[float]:
    """Comma list, or `a:b:n` for n equispaced points from a to b inclusive."""
    if ":" in text:
        try:
            a, b, count = text.split(":")
            start, stop, count = float(a), float(b), int(count)
        except ValueError:
            raise ParameterError(f"expected a:b:n, got {text!r}") from None
        if count < 1:
            raise ParameterError(f"a:b:n needs n >= 1, got {text!r}")
        return [float(v) for v in np.linspace(start, stop, count)]
    return parse_list(text)


def parse_potential(text: str, n: int) -> GridFunction:
    """`const:c`, `step:a,b,h` or a file of newline-separated values."""
    kind, _, rest = text.partition(":")
    if kind == "const" and rest:
        return constant(float(rest), n)
    if kind == "step" and rest:
        try:
            a, b, height = (float(part) for part in rest.split(","))
        except ValueError:
            raise ParameterError(f"expected step:a,b,h, got {text!r}") from None
        return step(a, b, height, n)
    path = Path(text)
    if not path.exists():
        raise ParameterError(f"potential {text!r} is neither const:c, step:a,b,h nor an existing file")
    return build(np.loadtxt(path, dtype=float, ndmin=1))


# ------------------------------------------------------------------ #
# Writers
# ------------------------------------------------------------------ #

def _csv_cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def render_csv(rows: Iterable[dict[str, Any]], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(row[c]) for c in columns])
    return buf.getvalue()


def render_json(payload: dict[str, Any]) -> str:
    return json.dumps({"schema_version": SCHEMA_VERSION, **payload}, indent=2, ensure_ascii=False) + "\n"


def _emit(text: str, config: RunConfig) -> None:
    if config.output_path is None:
        sys.stdout.write(text)
        return
    path = Path(config.output_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info("wrote %s", path)


def _emit_rows(rows: list[dict[str, Any]], columns: Sequence[str], config: RunConfig) -> None:
    if config.format == "json":
        _emit(render_json({"rows": rows}), config)
    else:
        _emit(render_csv(rows, columns), config)


# ------------------------------------------------------------------ #
# Subcommands
# ------------------------------------------------------------------ #

def cmd_eig(args: argparse.Namespace, config: RunConfig) -> int:
    from extremal_sl.sturm import lambda_k

    q = parse_potential(args.q, config.grid_n)
    _emit(render_json(lambda_k(q, args.k, config.tol_alg).to_dict()), config)
    return EXIT_OK


def cmd_minimize(args: argparse.Namespace, config: RunConfig) -> int:
    from extremal_sl.optimize import alternating_minimize, minimize_G

    gamma = GammaParam(args.gamma)
    if args.method == "alternating":
        report = alternating_minimize(gamma, config, iterations=args.iterations)
        payload = {
            "gamma": report.gamma,
            "method": "alternating",
            "m_hat": report.m_hat,
            "eigenvalues": list(report.eigenvalues),
            "minimizer": report.minimizer.values.tolist(),
            "extremal_potential": report.extremal_potential.values.tolist(),
        }
    else:
        payload = {"method": "gradient", **minimize_G(gamma, config).to_dict()}
    _emit(render_json(payload), config)
    return EXIT_OK


def cmd_scan(args: argparse.Namespace, config: RunConfig) -> int:
    from extremal_sl.optimize import scan_gamma

    table = scan_gamma(parse_range(args.gammas), config)
    _emit_rows([r.to_row() for r in table.reports], SCAN_COLUMNS, config)
    return EXIT_OK


def cmd_period(args: argparse.Namespace, config: RunConfig) -> int:
    from extremal_sl.period import I0

    gamma = GammaParam(args.gamma)
    alphas = parse_alphas(args.alphas)
    with ThreadPoolExecutor(max_workers=min(resolve_threads(config), len(alphas))) as pool:
        profiles = list(pool.map(lambda a: I0(gamma, a, config.tol_quad), alphas))
    _emit_rows([p.to_row() for p in profiles], PERIOD_COLUMNS, config)
    return EXIT_OK


def cmd_shoot(args: argparse.Namespace, config: RunConfig) -> int:
    from extremal_sl.period import period_identity_error, predicted_half_period, shoot

    gamma = GammaParam(args.gamma)
    y0 = args.y0 * gamma.constant_solution(args.mu) if args.relative else args.y0
    traj = shoot(gamma, args.mu, y0)
    payload = traj.to_dict()
    payload["predicted_half_period"] = predicted_half_period(gamma, args.mu, traj.alpha_hat, config.tol_quad)
    payload["period_identity_rel_error"] = period_identity_error(traj, config.tol_quad)
    _emit(render_json(payload), config)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, config: RunConfig) -> int:
    from extremal_sl.verify import AcceptanceSuite

    results = AcceptanceSuite(config).run()
    lines = [r.line() for r in results]
    failed = sum(not r.passed for r in results)
    lines.append(f"{len(results) - failed}/{len(results)} checks passed")
    _emit("\n".join(lines) + "\n", config)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_config(args: argparse.Namespace, config: RunConfig) -> int:
    settings = config.to_mapping()
    if args.save:
        save_config(settings, args.config)
        logger.info("saved settings to %s", args.config or "the per-user config")
    _emit(render_json({"config": settings}), config)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config file (default: the per-user config)")
    common.add_argument("--grid-n", type=int, help="number of grid cells")
    common.add_argument("--threads", type=int, help="worker cap (EXTREMAL_SL_THREADS overrides)")
    common.add_argument("--max-iters", type=int, help="optimizer iteration budget")
    common.add_argument("--output", "-o", type=Path, help="write results here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), help="table format for scan and period")
    common.add_argument("--verbose", "-v", action="store_true", help="log progress to stderr")

    parser = argparse.ArgumentParser(
        prog="extremal-sl",
        description="Least Neumann Sturm-Liouville eigenvalue over the L_gamma unit sphere of potentials",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eig", parents=[common], help="eigenpair of -y'' + q y = lambda y, Neumann")
    p.add_argument("--q", required=True, help="const:c, step:a,b,h or a file of values")
    p.add_argument("--k", type=int, default=1, help="eigenvalue index (1-based)")
    p.set_defaults(func=cmd_eig)

    p = sub.add_parser("minimize", parents=[common], help="estimate m_gamma by minimizing G")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--method", choices=("gradient", "alternating"), default="gradient")
    p.add_argument("--iterations", type=int, default=50, help="rounds of the alternating scheme")
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("scan", parents=[common], help="m_gamma over a gamma grid (CSV)")
    p.add_argument("--gammas", required=True, help="a:b:step or a comma list")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("period", parents=[common], help="period integral I0 over an alpha grid (CSV)")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--alphas", required=True, help="comma list or a:b:n")
    p.set_defaults(func=cmd_period)

    p = sub.add_parser("shoot", parents=[common], help="half-period of an Euler-Lagrange trajectory")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--y0", type=float, required=True)
    p.add_argument("--relative", action="store_true", help="read --y0 as a multiple of the constant solution")
    p.set_defaults(func=cmd_shoot)

    p = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("config", parents=[common], help="show the effective settings")
    p.add_argument("--save", action="store_true", help="write them to --config or the per-user config file")
    p.set_defaults(func=cmd_config)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse argv, dispatch, and return the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="[extremal-sl] %(levelname)s %(name)s: %(message)s",
    )
    try:
        config = RunConfig.from_mapping(load_config(args.config)).replace(
            grid_n=args.grid_n,
            threads=args.threads,
            max_iters=args.max_iters,
            output_path=args.output,
            format=args.format,
        )
        return args.func(args, config)
    except ExtremalSLError as exc:
        print(f"extremal-sl: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
