"""Command-line front end for contraction-number sweeps.

Examples:
    curlmg --preset table1 --output table1.csv --format csv
    curlmg --domain fichera --smoother vertex --max-level 2 --steps 1,2
    curlmg --config sweep.cfg --jobs 2

Exit codes: 0 full success, 1 configuration error, 2 partial results
(some cells unconverged or over their time budget).
"""

from __future__ import annotations

import argparse
import sys
import time

from .errors import ConfigurationError, CurlMGError
from .experiment import (
    DEFAULT_MAX_ITERATIONS,
    DEFAULT_POWER_TOL,
    PRESETS,
    CellResult,
    ExperimentConfig,
    default_coefficient_sets,
    emit,
    run_table,
)
from .assembly import CoefficientField
from .lattice import Domain
from .smoother import SmootherVariant

_COEFF_FLAGS = ("alpha_black", "beta_black", "alpha_white", "beta_white")


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="curlmg",
        description="Measure multigrid V-cycle contraction numbers for the "
        "curl-curl model problem with substructuring smoothers.",
    )
    p.add_argument("--preset", choices=sorted(PRESETS), help="benchmark sweep shorthand")
    p.add_argument("--config", help="key = value file mirroring the flags (flags win)")
    p.add_argument("--domain", choices=[d.value for d in Domain])
    p.add_argument("--smoother", choices=[v.value for v in SmootherVariant])
    p.add_argument("--max-level", type=int, help="finest level k (default 4)")
    p.add_argument("--steps", help="comma-separated smoothing counts (default 1,2,3,4,5)")
    p.add_argument("--alpha-black", type=float, help="custom coefficient set: alpha on black cells")
    p.add_argument("--beta-black", type=float)
    p.add_argument("--alpha-white", type=float)
    p.add_argument("--beta-white", type=float)
    p.add_argument("--eta", type=float, help="smoother damping override")
    p.add_argument("--tol", type=float, help=f"power-iteration tolerance (default {DEFAULT_POWER_TOL:g})")
    p.add_argument("--max-iterations", type=int, help=f"power-iteration cap (default {DEFAULT_MAX_ITERATIONS})")
    p.add_argument("--seed", type=int, help="start-vector seed (default 0)")
    p.add_argument("--output", help="output path (default: stdout)")
    p.add_argument("--format", choices=["csv", "markdown", "json-lines"])
    p.add_argument("--jobs", type=int, help="coefficient sets run in parallel (default 1)")
    p.add_argument("--max-dofs", type=int, help="refuse sweeps above this finest-level size")
    p.add_argument("--cell-budget-seconds", type=float, help="wall-time budget per cell (default 1800)")
    p.add_argument("--quiet", action="store_true", help="suppress per-cell progress lines")
    return p


def _read_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
                key, val = (part.strip() for part in line.split("=", 1))
                values[key.replace("-", "_")] = val
    except OSError as err:
        raise ConfigurationError(f"cannot read config file: {err}") from err
    return values


def _parse_steps(text: str) -> tuple[int, ...]:
    try:
        steps = tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError as err:
        raise ConfigurationError(f"bad --steps value {text!r}") from err
    if not steps:
        raise ConfigurationError("empty --steps")
    return steps


def _merge(args: argparse.Namespace) -> ExperimentConfig:
    file_vals = _read_config_file(args.config) if args.config else {}

    def pick(name, cast=None):
        cli = getattr(args, name)
        if cli is not None:
            return cli
        if name in file_vals:
            raw = file_vals[name]
            return cast(raw) if cast else raw
        return None

    kwargs = {}
    preset = args.preset or file_vals.get("preset")
    if preset:
        if preset not in PRESETS:
            raise ConfigurationError(f"unknown preset {preset!r}")
        kwargs.update(PRESETS[preset])

    domain = pick("domain")
    if domain is not None:
        kwargs["domain"] = Domain(domain)
    smoother = pick("smoother")
    if smoother is not None:
        kwargs["smoother"] = SmootherVariant(smoother)
    for name, cast in (
        ("max_level", int), ("eta", float), ("tol", float),
        ("max_iterations", int), ("seed", int), ("jobs", int),
        ("max_dofs", int), ("cell_budget_seconds", float),
    ):
        val = pick(name, cast)
        if val is not None:
            kwargs[name] = val
    steps = pick("steps")
    if steps is not None:
        kwargs["steps"] = _parse_steps(steps) if isinstance(steps, str) else steps
    out = pick("output")
    if out is not None:
        kwargs["output"] = out
    fmt = pick("format")
    if fmt is not None:
        kwargs["format"] = fmt

    coeff_vals = {name: pick(name, float) for name in _COEFF_FLAGS}
    if any(v is not None for v in coeff_vals.values()):
        kwargs["coefficient_sets"] = (
            CoefficientField(
                alpha_black=coeff_vals["alpha_black"] if coeff_vals["alpha_black"] is not None else 1.0,
                beta_black=coeff_vals["beta_black"] if coeff_vals["beta_black"] is not None else 1.0,
                alpha_white=coeff_vals["alpha_white"] if coeff_vals["alpha_white"] is not None else 1.0,
                beta_white=coeff_vals["beta_white"] if coeff_vals["beta_white"] is not None else 1.0,
            ),
        )
    return ExperimentConfig(**kwargs)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help, 2 for usage errors; map the latter
        # onto the configuration-error code
        return 0 if exc.code == 0 else 1

    try:
        cfg = _merge(args)
    except (ConfigurationError, CurlMGError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1

    def progress(cell: CellResult):
        if not args.quiet:
            flag = "" if cell.converged else "  [unconverged]"
            print(
                f"  {cell.coeffs.label()}  k={cell.level} m={cell.steps}: "
                f"rho={cell.rho:.4f}  ({cell.iterations} its, {cell.seconds:.1f}s){flag}",
                file=sys.stderr,
            )

    t0 = time.monotonic()
    try:
        report = run_table(cfg, progress=progress)
    except (ConfigurationError, CurlMGError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    emit(report)
    if not args.quiet:
        print(f"done in {time.monotonic() - t0:.1f}s", file=sys.stderr)
    if report.partial:
        print("warning: some cells did not converge", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
