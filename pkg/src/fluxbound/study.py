"""End-to-end efficiency-index studies and their table emitters.

A study fixes the scalar order p1 and sweeps mesh sizes and flux orders:
for each mesh the primal problem is solved once, then for each flux
order the majorant is minimized and one row is produced.  Flux orders
use 1-based labels p2 in {1, 2, 3} mapping to RT_0, RT_1, RT_2.
"""

import json
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .assembly import assemble_majorant, energy_error, solve_primal
from .mesh import build_rect_mesh
from .minimize import minimize_majorant
from .problem import example1_problem
from .spaces import FluxSpace, ScalarSpace

__all__ = ["StudyConfig", "StudyRow", "run_study", "emit_table", "load_config"]

_CSV_COLUMNS = ("N1", "p2", "N2", "k", "maj_sq", "dual", "equi", "Ieff",
                "maj", "beta")


@dataclass
class StudyConfig:
    """Study parameters; every field has a default, so {} is a valid config."""

    mesh_sizes: list = field(default_factory=lambda: [20])
    p1: int = 1
    p2: list = field(default_factory=lambda: [1, 2, 3])
    k1: int = 1
    k2: int = 1
    matrix: list = field(default_factory=lambda: [[2.0, 1.0], [0.0, 3.0]])
    lambda_override: Optional[float] = None
    c_f: Optional[float] = None
    eps: float = 1e-6
    imax: int = 50
    quad_degree: Optional[int] = None

    _FIELDS = ("mesh_sizes", "p1", "p2", "k1", "k2", "matrix",
               "lambda_override", "c_f", "eps", "imax", "quad_degree")

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - set(cls._FIELDS)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        config = cls(**data)
        config.validate()
        return config

    def validate(self):
        if self.p1 not in (1, 2):
            raise ValueError(f"p1 must be 1 or 2, got {self.p1}")
        if any(p not in (1, 2, 3) for p in self.p2):
            raise ValueError(f"p2 entries must be in {{1, 2, 3}}, got {self.p2}")
        if any(int(n) < 1 for n in self.mesh_sizes):
            raise ValueError(f"mesh sizes must be >= 1, got {self.mesh_sizes}")
        if self.eps <= 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.imax < 1:
            raise ValueError(f"imax must be >= 1, got {self.imax}")
        return self


def load_config(path):
    with open(path, "r", encoding="utf-8") as handle:
        return StudyConfig.from_dict(json.load(handle))


@dataclass(frozen=True, eq=False)
class StudyRow:
    """One (mesh size, flux order) result.

    ieff is the squared-quantities ratio maj_sq / error_sq; ieff_lin is
    the auxiliary unsquared ratio maj / error.  error is a diagnostic
    message when the row failed (all numeric fields are then nan).
    """

    n: int
    n1: int
    p2: int
    n2: int
    k: int
    maj_sq: float
    dual: float
    equi: float
    ieff: float
    maj: float
    beta: float
    ieff_lin: float
    error_sq: float
    error: Optional[str] = None

    @property
    def failed(self):
        return self.error is not None


def _failed_row(n, n1, p2, n2, message):
    nan = float("nan")
    return StudyRow(n=n, n1=n1, p2=p2, n2=n2, k=0, maj_sq=nan, dual=nan,
                    equi=nan, ieff=nan, maj=nan, beta=nan, ieff_lin=nan,
                    error_sq=nan, error=message)


def run_study(config):
    """Run the study and return one StudyRow per (mesh size, p2) pair.

    A failure in any stage produces a failed row carrying the diagnostic
    and the remaining rows still run.
    """
    config.validate()
    rows = []
    for n in config.mesh_sizes:
        n = int(n)
        mesh = build_rect_mesh((0.0, 1.0), (0.0, 1.0), n, n)
        scalar_space = ScalarSpace(mesh, config.p1)
        n1 = scalar_space.dof_count
        try:
            problem = example1_problem(config.k1, config.k2, config.matrix,
                                       lambda_override=config.lambda_override)
            if config.c_f is not None:
                problem = _with_c_f(problem, config.c_f)
            v = solve_primal(scalar_space, problem,
                             quad_degree=config.quad_degree)
            err_sq = energy_error(v, problem, quad_degree=config.quad_degree)
        except Exception as exc:
            for p2 in config.p2:
                n2 = FluxSpace(mesh, p2 - 1).dof_count
                rows.append(_failed_row(n, n1, p2, n2,
                                        f"primal stage failed: {exc}"))
            continue
        for p2 in config.p2:
            flux_space = FluxSpace(mesh, p2 - 1)
            n2 = flux_space.dof_count
            try:
                system = assemble_majorant(flux_space, v, problem,
                                           quad_degree=config.quad_degree)
                result = minimize_majorant(system, eps=config.eps,
                                           imax=config.imax)
            except Exception as exc:
                rows.append(_failed_row(n, n1, p2, n2, str(exc)))
                continue
            ieff = result.maj_sq / err_sq if err_sq > 0 else float("nan")
            ieff_lin = result.maj / np.sqrt(err_sq) if err_sq > 0 else float("nan")
            rows.append(StudyRow(
                n=n, n1=n1, p2=p2, n2=n2, k=result.iterations,
                maj_sq=result.maj_sq, dual=result.dual, equi=result.equi,
                ieff=ieff, maj=result.maj, beta=result.beta,
                ieff_lin=ieff_lin, error_sq=err_sq))
    return rows


def _with_c_f(problem, c_f):
    return replace(problem, c_f=float(c_f))


def _format_cells(row):
    return {
        "N1": str(row.n1),
        "p2": str(row.p2),
        "N2": str(row.n2),
        "k": str(row.k),
        "maj_sq": f"{row.maj_sq:.2E}",
        "dual": f"{row.dual:.2E}",
        "equi": f"{row.equi:.2E}",
        "Ieff": f"{row.ieff:.4f}",
        "maj": f"{row.maj:.6E}",
        "beta": f"{row.beta:.6E}",
    }


def emit_table(rows, format="csv"):
    """Render successful rows as CSV (ten columns) or a markdown table.

    The markdown layout mirrors the eight columns N1, p2, N2, k, maj_sq,
    dual, equi, Ieff; the CSV appends the auxiliary maj and beta.
    """
    good = [row for row in rows if not row.failed]
    if format == "csv":
        lines = [",".join(_CSV_COLUMNS)]
        for row in good:
            cells = _format_cells(row)
            lines.append(",".join(cells[name] for name in _CSV_COLUMNS))
        return "\n".join(lines) + "\n"
    if format == "markdown":
        names = _CSV_COLUMNS[:8]
        lines = ["| " + " | ".join(names) + " |",
                 "|" + "---|" * len(names)]
        for row in good:
            cells = _format_cells(row)
            lines.append("| " + " | ".join(cells[name] for name in names) + " |")
        return "\n".join(lines) + "\n"
    raise ValueError(f"format must be 'csv' or 'markdown', got {format!r}")
