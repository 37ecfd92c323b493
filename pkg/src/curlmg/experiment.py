"""Experiment harness: contraction-number sweeps over levels, smoothing
counts and checkerboard coefficient sets, with CSV / markdown / JSON-lines
reporting."""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field

from . import __version__
from .assembly import CoefficientField, DofMap
from .errors import ConfigurationError
from .lattice import Domain, build_hierarchy_meshes
from .smoother import SmootherConfig, SmootherVariant
from .spectral import DEFAULT_MAX_IT, DEFAULT_TOL, contraction_number
from .vcycle import build_hierarchy

DEFAULT_POWER_TOL = DEFAULT_TOL
DEFAULT_MAX_ITERATIONS = DEFAULT_MAX_IT

#: benchmark sweep: black-subdomain alpha varies, everything else is 1
DEFAULT_ALPHA_BLACKS = (0.01, 0.1, 1.0, 10.0, 100.0)


def default_coefficient_sets() -> tuple[CoefficientField, ...]:
    return tuple(CoefficientField(ab, 1.0, 1.0, 1.0) for ab in DEFAULT_ALPHA_BLACKS)


@dataclass(frozen=True)
class ExperimentConfig:
    domain: Domain = Domain.CUBE
    smoother: SmootherVariant = SmootherVariant.EDGE
    max_level: int = 4
    steps: tuple[int, ...] = (1, 2, 3, 4, 5)
    coefficient_sets: tuple[CoefficientField, ...] = field(
        default_factory=default_coefficient_sets
    )
    eta: float | None = None
    tol: float = DEFAULT_POWER_TOL
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    seed: int = 0
    output: str | None = None
    format: str = "markdown"
    max_dofs: int = 2_000_000
    cell_budget_seconds: float = 1800.0
    jobs: int = 1

    def __post_init__(self):
        if self.max_level < 1:
            raise ConfigurationError("max_level must be >= 1")
        if not self.steps or any(m < 1 for m in self.steps):
            raise ConfigurationError("smoothing step counts must be >= 1")
        if self.format not in ("csv", "markdown", "json-lines"):
            raise ConfigurationError(f"unknown output format {self.format!r}")
        if self.tol <= 0 or self.max_iterations < 1:
            raise ConfigurationError("invalid power-iteration settings")
        if self.jobs < 1:
            raise ConfigurationError("jobs must be >= 1")

    def smoother_config(self) -> SmootherConfig:
        return SmootherConfig(self.smoother, eta=self.eta)


PRESETS = {
    "table1": {"domain": Domain.CUBE, "smoother": SmootherVariant.EDGE},
    "table2": {"domain": Domain.CUBE, "smoother": SmootherVariant.VERTEX},
    "table3": {"domain": Domain.FICHERA, "smoother": SmootherVariant.EDGE},
    "table4": {"domain": Domain.FICHERA, "smoother": SmootherVariant.VERTEX},
}


def preset_config(name: str, **overrides) -> ExperimentConfig:
    if name not in PRESETS:
        raise ConfigurationError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return ExperimentConfig(**{**PRESETS[name], **overrides})


@dataclass
class CellResult:
    coeffs: CoefficientField
    level: int
    steps: int
    rho: float
    iterations: int
    converged: bool
    seconds: float


@dataclass
class TableReport:
    config: ExperimentConfig
    cells: list[CellResult]
    version: str = __version__

    @property
    def partial(self) -> bool:
        return any(not c.converged for c in self.cells)

    def cell(self, coeffs: CoefficientField, k: int, m: int) -> CellResult:
        for c in self.cells:
            if c.coeffs == coeffs and c.level == k and c.steps == m:
                return c
        raise KeyError((coeffs, k, m))


def _run_coefficient_set(cfg: ExperimentConfig, coeffs: CoefficientField, meshes=None,
                         progress=None) -> list[CellResult]:
    h = build_hierarchy(
        cfg.domain, cfg.max_level, coeffs, cfg.smoother_config(), meshes=meshes
    )
    cells = []
    for k in range(1, cfg.max_level + 1):
        for m in cfg.steps:
            r = contraction_number(
                h, k, m,
                tol=cfg.tol, max_it=cfg.max_iterations, seed=cfg.seed,
                budget_seconds=cfg.cell_budget_seconds,
            )
            cells.append(
                CellResult(
                    coeffs=coeffs, level=k, steps=m, rho=r.rho,
                    iterations=r.iterations, converged=r.converged,
                    seconds=r.seconds,
                )
            )
            if progress:
                progress(cells[-1])
    return cells


def _pool_worker(args):
    cfg_kwargs, coeffs = args
    cfg = ExperimentConfig(**cfg_kwargs)
    return _run_coefficient_set(cfg, coeffs)


def run_table(cfg: ExperimentConfig, progress=None) -> TableReport:
    """Measure contraction numbers for every (coefficient set, k, m) cell.

    Meshes are shared across coefficient sets; per-level operators, patch
    factorizations and transfer operators are built once per set and reused
    by all (k, m) cells.  With jobs > 1, coefficient sets run in separate
    processes (results are identical either way).
    """
    meshes = build_hierarchy_meshes(cfg.domain, cfg.max_level)
    n_fine = DofMap(meshes[-1]).n
    if n_fine > cfg.max_dofs:
        raise ConfigurationError(
            f"finest level has {n_fine} unknowns, above the cap {cfg.max_dofs}"
        )

    if cfg.jobs > 1 and len(cfg.coefficient_sets) > 1:
        import multiprocessing as mp

        cfg_kwargs = {
            "domain": cfg.domain, "smoother": cfg.smoother,
            "max_level": cfg.max_level, "steps": cfg.steps,
            "coefficient_sets": cfg.coefficient_sets, "eta": cfg.eta,
            "tol": cfg.tol, "max_iterations": cfg.max_iterations,
            "seed": cfg.seed, "max_dofs": cfg.max_dofs,
            "cell_budget_seconds": cfg.cell_budget_seconds,
        }
        with mp.Pool(min(cfg.jobs, len(cfg.coefficient_sets))) as pool:
            chunks = pool.map(
                _pool_worker, [(cfg_kwargs, c) for c in cfg.coefficient_sets]
            )
        cells = [cell for chunk in chunks for cell in chunk]
    else:
        cells = []
        for coeffs in cfg.coefficient_sets:
            cells += _run_coefficient_set(cfg, coeffs, meshes=meshes, progress=progress)
    return TableReport(config=cfg, cells=cells)


# -- reporting -----------------------------------------------------------

CSV_COLUMNS = (
    "domain", "smoother", "alpha_b", "beta_b", "alpha_w", "beta_w",
    "k", "m", "rho", "iterations", "converged", "seconds",
)


def _cell_record(report: TableReport, c: CellResult) -> dict:
    return {
        "domain": report.config.domain.value,
        "smoother": report.config.smoother.value,
        "alpha_b": c.coeffs.alpha_black,
        "beta_b": c.coeffs.beta_black,
        "alpha_w": c.coeffs.alpha_white,
        "beta_w": c.coeffs.beta_white,
        "k": c.level,
        "m": c.steps,
        "rho": c.rho,
        "iterations": c.iterations,
        "converged": c.converged,
        "seconds": c.seconds,
    }


def _config_echo(cfg: ExperimentConfig) -> str:
    eta = cfg.smoother_config().resolved_eta
    return (
        f"domain={cfg.domain.value} smoother={cfg.smoother.value} eta={eta!r} "
        f"max_level={cfg.max_level} steps={','.join(map(str, cfg.steps))} "
        f"tol={cfg.tol!r} max_iterations={cfg.max_iterations} seed={cfg.seed} "
        f"version={__version__}"
    )


def render_csv(report: TableReport) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for c in report.cells:
        rec = _cell_record(report, c)
        lines.append(
            ",".join(
                repr(v) if isinstance(v, float) else str(v)
                for v in (rec[col] for col in CSV_COLUMNS)
            )
        )
    return "\n".join(lines) + "\n"


def render_json_lines(report: TableReport) -> str:
    lines = [json.dumps({"type": "config", "echo": _config_echo(report.config)},
                        sort_keys=True)]
    for c in report.cells:
        lines.append(json.dumps({"type": "cell", **_cell_record(report, c)}, sort_keys=True))
    return "\n".join(lines) + "\n"


def _md_value(c: CellResult) -> str:
    text = ">1" if c.rho > 1.0 else f"{c.rho:.3f}"
    return text if c.converged else text + "*"


def render_markdown(report: TableReport) -> str:
    cfg = report.config
    out = [
        f"# Contraction numbers: {cfg.domain.value} domain, {cfg.smoother.value} smoother",
        "",
        f"`{_config_echo(cfg)}`",
        "",
    ]
    header = "|     | " + " | ".join(f"m={m}" for m in cfg.steps) + " |"
    rule = "|-----|" + "|".join("-------" for _ in cfg.steps) + "|"
    for coeffs in cfg.coefficient_sets:
        out.append(
            f"## alpha_b={coeffs.alpha_black:g} beta_b={coeffs.beta_black:g} "
            f"alpha_w={coeffs.alpha_white:g} beta_w={coeffs.beta_white:g}"
        )
        out.append("")
        out.append(header)
        out.append(rule)
        for k in range(1, cfg.max_level + 1):
            row = [f"| k={k} |"]
            for m in cfg.steps:
                row.append(f" {_md_value(report.cell(coeffs, k, m))} |")
            out.append("".join(row))
        out.append("")
    if report.partial:
        out.append("`*` power iteration stopped before convergence")
        out.append("")
    return "\n".join(out)


RENDERERS = {"csv": render_csv, "markdown": render_markdown, "json-lines": render_json_lines}


def emit(report: TableReport, format: str | None = None, path: str | None = None) -> str:
    """Render the report; write it to `path` (or stdout) and return the text."""
    fmt = format or report.config.format
    if fmt not in RENDERERS:
        raise ConfigurationError(f"unknown output format {fmt!r}")
    text = RENDERERS[fmt](report)
    target = path if path is not None else report.config.output
    if target is not None:
        with open(target, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return text


def parse_csv(text: str) -> list[dict]:
    """Inverse of render_csv (exact float round trip)."""
    import csv as _csv
    import io

    rows = []
    for rec in _csv.DictReader(io.StringIO(text)):
        rows.append(
            {
                **rec,
                "alpha_b": float(rec["alpha_b"]),
                "beta_b": float(rec["beta_b"]),
                "alpha_w": float(rec["alpha_w"]),
                "beta_w": float(rec["beta_w"]),
                "k": int(rec["k"]),
                "m": int(rec["m"]),
                "rho": float(rec["rho"]),
                "iterations": int(rec["iterations"]),
                "converged": rec["converged"] == "True",
                "seconds": float(rec["seconds"]),
            }
        )
    return rows
