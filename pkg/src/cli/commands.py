"""
Subcommand handlers. Each one resolves its inputs from the RunConfig, calls
the analysis modules and records outputs, checks and tables in a Report.
"""

import math
from dataclasses import replace
from typing import Callable, Dict

import numpy as np

from cli.report import Report, Table
from cli.run_config import RunConfig
from core.field import sample
from core.grid import Grid1D, Grid2D
from core.params import BsParams, MgParams
from martingale.residuals import (
    bs_martingale_residual,
    extended_martingale_rows,
    find_constraint_brackets,
    martingale_constraint_residual,
    solve_constraint_roots,
    solve_constraint_y,
)
from martingale.symmetry import broken_generator_report, commutator_expectation
from operators.hamiltonians import build_bs_hamiltonian, build_mg_hamiltonian
from operators.stencils import d_dx, d_dy
from potentials.bs import bs_potential, bs_potential_slope, bs_vacuum
from potentials.mg import (
    lx_symmetry_residual,
    ly_symmetry_residual,
    mg_stationarity_errors,
    mg_vacuum_curve,
)
from potentials.quartic import (
    manifold_errors,
    quartic_root_residual,
    quartic_vacuum,
    vacuum_manifold,
)
from potentials.vacuum import VacuumSolution
from pricing.european import monotonicity_defect, price_european_call
from pricing.evolution import EvolutionConfig, martingale_evolution_check
from utils.errors import InvalidConfigError

Handler = Callable[[RunConfig], Report]


def _bs_inputs(p: BsParams) -> dict:
    return {"r": p.r, "sigma": p.sigma, "sigma2": p.sigma2}


def _mg_inputs(p: MgParams) -> dict:
    return {
        "r": p.r,
        "lam": p.lam,
        "mu": p.mu,
        "zeta": p.zeta,
        "alpha": p.alpha,
        "rho": p.rho,
    }


def _grid_inputs(grid) -> dict:
    if isinstance(grid, Grid1D):
        return {"x_min": grid.x_min, "x_max": grid.x_max, "nx": grid.n}
    return {
        "x_min": grid.gx.x_min,
        "x_max": grid.gx.x_max,
        "nx": grid.gx.n,
        "y_min": grid.gy.x_min,
        "y_max": grid.gy.x_max,
        "ny": grid.gy.n,
    }


def _evolution_inputs(cfg: EvolutionConfig) -> dict:
    return {
        "maturity": cfg.maturity,
        "steps": cfg.steps,
        "scheme": cfg.scheme.value,
        "rannacher_steps": cfg.rannacher_steps,
    }


def _new_report(cfg: RunConfig) -> Report:
    return Report(command=cfg.command, tolerances=cfg.tolerances)


def bs_vacuum_command(cfg: RunConfig) -> Report:
    report = _new_report(cfg)
    p = cfg.bs_params()
    solution = bs_vacuum(p)
    phi = solution.values["phi"]

    report.inputs = {"bs": _bs_inputs(p)}
    report.outputs = {
        "phi_vac": phi,
        "classification": solution.classification.value,
        "stable": p.stable,
        "potential_at_vacuum": bs_potential(p, phi),
    }
    report.check("stationarity", abs(bs_potential_slope(p, phi)), cfg.tolerance("stationarity"))
    return report


def _mg_vacuum_row(p: MgParams, y: float, solution: VacuumSolution) -> dict:
    stationarity, ratio_relation = mg_stationarity_errors(p, y, solution)
    return {
        "y": y,
        "A": lx_symmetry_residual(p, y),
        "B": ly_symmetry_residual(p, y),
        "ratio": solution.ratio,
        "phi_x": solution.values["phi_x"],
        "phi_y": solution.values["phi_y"],
        "S": solution.values["S"],
        "classification": solution.classification.value,
        "stationarity": stationarity,
        "ratio_relation": ratio_relation,
    }


def mg_vacuum_command(cfg: RunConfig) -> Report:
    report = _new_report(cfg)
    p = cfg.mg_params()
    report.inputs = {"mg": _mg_inputs(p)}

    sweep = cfg.sections["analysis"].get("ys")
    if sweep is None:
        y = cfg.number("y")
        report.inputs["y"] = y
        ys = [y]
    else:
        ys = cfg.numbers("ys")
        report.inputs["ys"] = ys
    rows = [_mg_vacuum_row(p, y, solution) for y, solution in mg_vacuum_curve(p, ys)]

    if sweep is None:
        report.outputs = {k: v for k, v in rows[0].items() if k != "y"}
    else:
        columns = ["y", "A", "B", "ratio", "phi_x", "phi_y", "S", "classification"]
        report.tables.append(Table("vacuum_curve", columns, [[r[c] for c in columns] for r in rows]))
        report.outputs = {"points": len(rows)}

    tol = cfg.tolerance("stationarity")
    report.check("stationarity", max((r["stationarity"] for r in rows), default=0.0), tol)
    report.check("ratio_relation", max((r["ratio_relation"] for r in rows), default=0.0), tol)
    return report


def mg_extended_martingale_command(cfg: RunConfig) -> Report:
    report = _new_report(cfg)
    p = cfg.mg_params()
    grid = cfg.grid_2d(-1.0, 1.0, 201, -1.0, 1.0, 201)
    report.inputs = {"mg": _mg_inputs(p), "grid": _grid_inputs(grid)}

    rows = extended_martingale_rows(p, grid)
    table = Table("rows", ["y", "G", "residual", "annihilation"])
    for row in zip(rows.ys, rows.drift, rows.residual, rows.annihilation):
        table.add_row([float(v) for v in row])
    report.tables.append(table)

    tol = cfg.tolerance("residual")
    vacuum_rows = rows.vacuum_rows(tol)
    report.outputs = {
        "residual_interior_max": float(rows.residual.max()),
        "vacuum_rows": [float(v) for v in rows.ys[vacuum_rows]],
    }
    report.check("extended_residual", report.outputs["residual_interior_max"], tol)
    if np.any(vacuum_rows):
        worst = float(rows.annihilation[vacuum_rows].max())
        report.outputs["vacuum_rows_annihilation_max"] = worst
        report.check("vacuum_rows_annihilated", worst, tol)
    return report


def _bracket(cfg: RunConfig):
    bracket = cfg.numbers("bracket")
    if len(bracket) != 2:
        raise InvalidConfigError(f"analysis.bracket needs two numbers, got {bracket}.")
    return bracket


def constraint_root_command(cfg: RunConfig) -> Report:
    report = _new_report(cfg)
    p = cfg.mg_params()
    y_lo, y_hi = _bracket(cfg)
    report.inputs = {"mg": _mg_inputs(p), "bracket": [y_lo, y_hi]}

    y_star = solve_constraint_y(p, y_lo, y_hi)
    residual = martingale_constraint_residual(p, y_star).residual
    report.outputs = {"y_star": y_star, "sigma2_star": math.exp(y_star), "residual": residual}
    report.check("root_residual", abs(residual), cfg.tolerance("root"))
    return report


def constraint_scan_command(cfg: RunConfig) -> Report:
    report = _new_report(cfg)
    p = cfg.mg_params()
    y_lo, y_hi = _bracket(cfg)
    samples = int(cfg.number("samples", 401))
    report.inputs = {"mg": _mg_inputs(p), "bracket": [y_lo, y_hi], "samples": samples}

    table = Table("constraint", ["y", "residual"])
    for y in np.linspace(y_lo, y_hi, samples):
        table.add_row([float(y), martingale_constraint_residual(p, y).residual])
    report.tables.append(table)

    brackets = find_constraint_brackets(p, y_lo, y_hi, samples)
    roots = solve_constraint_roots(p, y_lo, y_hi, samples)
    residuals = [abs(martingale_constraint_residual(p, y).residual) for y in roots]
    report.outputs = {
        "roots": roots,
        "brackets": [list(b) for b in brackets],
    }
    if roots:
        report.check("root_residual", max(residuals), cfg.tolerance("root"))
    return report


def symmetry_report_command(cfg: RunConfig) -> Report:
    report = _new_report(cfg)
    bs = cfg.bs_params()
    mg = cfg.mg_params()
    grid1 = cfg.grid_1d(-2.0, 2.0, 401)
    grid2 = cfg.grid_2d(-1.0, 1.0, 101, -1.0, 1.0, 101)
    report.inputs = {
        "bs": _bs_inputs(bs),
        "mg": _mg_inputs(mg),
        "grid_bs": _grid_inputs(grid1),
        "grid_mg": _grid_inputs(grid2),
    }
    tol_comm = cfg.tolerance("commutator")
    tol_broken = cfg.tolerance("broken")

    h_bs = build_bs_hamiltonian(bs, grid1)
    h_mg = build_mg_hamiltonian(mg, grid2)
    e_x = sample(grid1, np.exp)
    e_x_2d = sample(grid2, lambda x, y: np.exp(x + 0.0 * y))
    e_xy = sample(grid2, lambda x, y: np.exp(x + y))

    ledger = [
        ("bs_p_on_ex", h_bs, d_dx(grid1), e_x),
        ("mg_px_on_ex", h_mg, d_dx(grid2), e_x_2d),
        ("mg_py_on_ex", h_mg, d_dy(grid2), e_x_2d),
        ("mg_px_on_exy", h_mg, d_dx(grid2), e_xy),
        ("mg_py_on_exy", h_mg, d_dy(grid2), e_xy),
    ]
    table = Table(
        "generators",
        ["entry", "generator", "commutator_norm", "commutes_with_h", "action_norm_ratio", "broken"],
    )
    entries = {}
    for label, h, gen, vacuum in ledger:
        entry = broken_generator_report(h, gen, vacuum, tol_comm, tol_broken)
        entries[label] = entry
        table.add_row(
            [
                label,
                entry.generator_name,
                entry.commutator_norm,
                entry.commutes_with_h,
                entry.action_norm_ratio,
                entry.broken,
            ]
        )
    report.tables.append(table)

    # Commutator expectation <S|[p, phibar]|S> on S = e^x.
    grid_e = cfg.grid_1d(-1.0, 1.0, 201)
    vacuum = sample(grid_e, np.exp)
    shifted_fields = {
        "exp": (np.exp, np.exp),
        "x": (lambda x: x, lambda x: np.ones_like(x)),
        "x2": (lambda x: x**2, lambda x: 2.0 * x),
        "sin": (np.sin, np.cos),
    }
    expectation = Table("commutator_expectation", ["phibar", "i1", "i2", "abs_diff", "centered", "shift"])
    for name, (phibar, phi) in shifted_fields.items():
        result = commutator_expectation(vacuum, sample(grid_e, phibar), sample(grid_e, phi))
        expectation.add_row(
            [name, result.i1, result.i2, abs(result.i1 - result.i2), result.centered, result.shift]
        )
    report.tables.append(expectation)

    tol_ratio = cfg.tolerance("residual")
    report.outputs = {
        label: {
            "commutes_with_h": e.commutes_with_h,
            "broken": e.broken,
            "action_norm_ratio": e.action_norm_ratio,
            "commutator_norm": e.commutator_norm,
        }
        for label, e in entries.items()
    }
    report.flag("bs_p_broken", entries["bs_p_on_ex"].broken)
    report.check("bs_p_ratio", abs(entries["bs_p_on_ex"].action_norm_ratio - 1.0), tol_ratio)
    report.flag("mg_px_commutes", entries["mg_px_on_ex"].commutes_with_h)
    report.check("mg_py_on_ex_ratio", entries["mg_py_on_ex"].action_norm_ratio, tol_comm)
    report.check("mg_px_on_exy_ratio", abs(entries["mg_px_on_exy"].action_norm_ratio - 1.0), tol_ratio)
    report.check("mg_py_on_exy_ratio", abs(entries["mg_py_on_exy"].action_norm_ratio - 1.0), tol_ratio)
    report.check(
        "expectation_agreement",
        max(row[3] for row in expectation.rows),
        grid_e.dx**2 * 10.0,
    )
    return report


def quartic_vacuum_command(cfg: RunConfig) -> Report:
    report = _new_report(cfg)
    q = cfg.quartic_params()
    solution = quartic_vacuum(q)
    report.inputs = {"quartic": {"mu2": q.mu2, "lam4": q.lam4}}
    report.outputs = dict(solution.values)
    report.outputs["classification"] = solution.classification.value
    report.outputs["admissible"] = "S_plus" if solution.values["S"] > 0 else None

    report.check("root_residual", quartic_root_residual(q, solution), cfg.tolerance("manifold"))
    return report


def vacuum_manifold_command(cfg: RunConfig) -> Report:
    report = _new_report(cfg)
    q = cfg.quartic_params()
    ys = cfg.numbers("ys", [-1.0, -0.5, 0.0, 0.5, 1.0])
    report.inputs = {"quartic": {"mu2": q.mu2, "lam4": q.lam4}, "ys": ys}

    points = vacuum_manifold(q, ys)
    table = Table("manifold", ["y", "x", "s_norm"])
    for pt in points:
        table.add_row([pt.y, pt.x, pt.s_norm])
    report.tables.append(table)

    errors = manifold_errors(q, points)
    report.outputs = {"s_norm": q.s_norm, "points": len(points)}
    tol = cfg.tolerance("manifold")
    report.check("norm", errors.norm, tol)
    report.check("slope", errors.slope, tol)
    report.check("flat_direction", errors.flat_direction, tol)
    return report


def price_command(cfg: RunConfig) -> Report:
    report = _new_report(cfg)
    p = cfg.bs_params()
    strike = cfg.number("strike", 100.0)
    spot = cfg.number("spot", 100.0)
    if spot <= 0:
        raise InvalidConfigError(f"analysis.spot must be > 0, got {spot}.")
    x0 = math.log(spot)
    evolution = cfg.evolution(1.0, 400)
    half_width = 10.0 * p.sigma * math.sqrt(evolution.maturity)
    grid = cfg.grid_1d(x0 - half_width, x0 + half_width, 801)
    evolution = replace(evolution, grid=grid)
    report.inputs = {
        "bs": _bs_inputs(p),
        "grid": _grid_inputs(grid),
        "evolution": _evolution_inputs(evolution),
        "strike": strike,
        "spot": spot,
    }

    result = price_european_call(p, grid, strike, evolution, x0)
    values = result.values.values
    table = Table("price", ["x", "S", "value"])
    for x, v in zip(grid.points, values):
        table.add_row([float(x), float(math.exp(x)), float(v)])
    report.tables.append(table)

    report.outputs = {
        "spot_price": result.spot_price,
        "oracle_price": result.oracle_price,
        "rel_error": result.rel_error,
    }
    report.check("rel_error", result.rel_error, cfg.tolerance("price"))
    report.check("monotone", monotonicity_defect(result.values), 1e-9)
    return report


def martingale_check_command(cfg: RunConfig) -> Report:
    model = cfg.choice("model", "bs")
    if model == "bs":
        return _bs_martingale_check(cfg)
    if model == "mg":
        return _mg_martingale_check(cfg)
    raise InvalidConfigError(f"analysis.model must be 'bs' or 'mg', got {model!r}.")


def _bs_martingale_check(cfg: RunConfig) -> Report:
    report = _new_report(cfg)
    p = cfg.bs_params()
    grid = cfg.grid_1d(-2.0, 2.0, 401)
    evolution = cfg.evolution(1.0, 200, grid)
    report.inputs = {
        "model": "bs",
        "bs": _bs_inputs(p),
        "grid": _grid_inputs(grid),
        "evolution": _evolution_inputs(evolution),
    }

    residual = bs_martingale_residual(p, grid)
    deviation = martingale_evolution_check(build_bs_hamiltonian(p, grid), sample(grid, np.exp), evolution)
    report.outputs = {"static_residual": residual, "evolution_deviation": deviation}
    report.check("static_residual", residual, grid.dx**2)
    report.check("evolution_deviation", deviation, cfg.tolerance("deviation"))
    return report


def _mg_martingale_check(cfg: RunConfig) -> Report:
    report = _new_report(cfg)
    p = cfg.mg_params()
    y_lo, y_hi = _bracket(cfg)
    y_star = solve_constraint_y(p, y_lo, y_hi)
    grid: Grid2D = cfg.grid_2d(-1.0, 1.0, 41, y_star - 0.1, y_star + 0.1, 21)
    evolution = cfg.evolution(0.01, 10, grid)
    report.inputs = {
        "model": "mg",
        "mg": _mg_inputs(p),
        "bracket": [y_lo, y_hi],
        "grid": _grid_inputs(grid),
        "evolution": _evolution_inputs(evolution),
    }

    h = build_mg_hamiltonian(p, grid)
    deviation = martingale_evolution_check(h, sample(grid, lambda x, y: np.exp(x + y)), evolution)
    report.outputs = {"y_star": y_star, "evolution_deviation": deviation}
    report.check("evolution_deviation", deviation, cfg.tolerance("deviation"))
    return report


COMMANDS: Dict[str, Handler] = {
    "bs-vacuum": bs_vacuum_command,
    "mg-vacuum": mg_vacuum_command,
    "mg-extended-martingale": mg_extended_martingale_command,
    "constraint-root": constraint_root_command,
    "constraint-scan": constraint_scan_command,
    "symmetry-report": symmetry_report_command,
    "quartic-vacuum": quartic_vacuum_command,
    "vacuum-manifold": vacuum_manifold_command,
    "price": price_command,
    "martingale-check": martingale_check_command,
}
