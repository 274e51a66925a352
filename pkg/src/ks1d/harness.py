"""Scenario runs, epsilon sweeps, convergence studies and per-claim verdicts."""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, elliptic, interface, pme, stepper
from .config import load
from .model import Scenario, Trajectory

CLAIMS = (
    "linf_bound",
    "mass_conservation",
    "dxv_bound",
    "lipschitz_uniformity",
    "holder",
    "cone_mass",
    "vacuum",
    "pme_convergence",
    "psi_bounds",
    "cutoff_bounds",
)

ANCHORS = {
    "linf_bound": "sup u(t) <= sup u0 + 2 for t < T0 = (sup u0 + 2)^-q",
    "mass_conservation": "total mass is conserved under zero-flux boundaries",
    "dxv_bound": "sup |dv/dx| <= 2 * mass(u0)",
    "lipschitz_uniformity": "Lipschitz bound on (u+eps)^(m-1) uniform in eps",
    "holder": "|u(x)-u(y)| controlled by |u^(m-1)(x) - u^(m-1)(y)|",
    "cone_mass": "integral of u+eps between the inner interfaces is constant",
    "vacuum": "u stays zero strictly between the inner interfaces",
    "pme_convergence": "drift-free runs converge to the Barenblatt source solution",
    "psi_bounds": "1/2 <= |psi''/psi'| <= 1, -1 <= (psi''/psi')' <= -1/4 and the barrier constant",
    "cutoff_bounds": "|eta'| <= c1 eta^(3/4), -c2 eta <= eta'' <= c3",
}

STATUSES = ("pass", "fail", "outside-window")


@dataclass(frozen=True)
class Tolerances:
    """Every threshold a verdict depends on."""

    linf_slack: float = stepper.LINF_SLACK
    mass_rel: float = 1e-12
    dxv_slack: float = 1e-10
    lipschitz_band: float = 2.0
    holder_margin: float = analysis.MARGIN_TOL
    cone_mass_rel: float = 0.02
    vacuum_eps_factor: float = 2.0
    vacuum_slope_cells: float = 5.0
    vacuum_noise: float = 0.10
    support_cells: float = 5.0
    pme_ratio: float = 1.5
    order_min: float = 0.8

    def as_dict(self) -> dict:
        return asdict(self)


TOLERANCES = Tolerances()


@dataclass
class VerificationReport:
    claim: str
    status: str
    measured: dict
    tolerances: dict
    anchor: str = ""

    def __post_init__(self) -> None:
        if self.claim not in CLAIMS:
            raise ValueError(f"unknown claim {self.claim!r}")
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        self.anchor = ANCHORS[self.claim]

    @property
    def ok(self) -> bool:
        return self.status != "fail"

    def line(self) -> str:
        return f"{self.claim:<22} {self.status:<15} {_fmt(self.measured)}"

    def record(self) -> dict:
        return {
            "claim": self.claim,
            "status": self.status,
            "anchor": self.anchor,
            "measured": self.measured,
            "tolerances": self.tolerances,
        }


def _fmt(d: dict) -> str:
    parts = []
    for k in sorted(d):
        v = d[k]
        parts.append(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}")
    return " ".join(parts)


def _report(claim: str, ok: bool, measured: dict, tol: Tolerances, keys: tuple[str, ...]) -> VerificationReport:
    used = {k: getattr(tol, k) for k in keys}
    return VerificationReport(claim, "pass" if ok else "fail", measured, used)


def all_passed(reports) -> bool:
    return all(r.ok for r in reports)


# ---------------------------------------------------------------- single runs


def _linf_report(traj: Trajectory, tol: Tolerances) -> VerificationReport:
    sc = traj.scenario
    bound = sc.u0_sup + 2.0
    inside = [d for d in traj.diagnostics if d.t < sc.t0_window]
    outside = len(traj.diagnostics) - len(inside)
    worst = max((d.max_u for d in inside), default=0.0)
    measured = {
        "bound": bound,
        "max_u_inside": worst,
        "frames_inside": len(inside),
        "frames_outside_window": outside,
        "t0_window": sc.t0_window,
    }
    ok = worst <= bound + tol.linf_slack
    if ok and not inside:
        return VerificationReport("linf_bound", "outside-window", measured, {"linf_slack": tol.linf_slack})
    return _report("linf_bound", ok, measured, tol, ("linf_slack",))


def _mass_report(traj: Trajectory, tol: Tolerances) -> VerificationReport:
    masses = np.array([d.mass for d in traj.diagnostics])
    m0 = masses[0]
    drift = float(np.abs(masses - m0).max() / m0) if m0 > 0 else float(np.abs(masses).max())
    measured = {"initial_mass": float(m0), "relative_drift": drift, "clamped_mass": traj.clamped_mass}
    return _report("mass_conservation", drift <= tol.mass_rel, measured, tol, ("mass_rel",))


def _dxv_report(traj: Trajectory, tol: Tolerances) -> VerificationReport:
    bound = 2.0 * traj.diagnostics[0].mass
    worst = max(d.sup_dxv for d in traj.diagnostics)
    measured = {"bound": bound, "max_sup_dxv": worst}
    return _report("dxv_bound", worst <= bound + tol.dxv_slack, measured, tol, ("dxv_slack",))


def _holder_report(traj: Trajectory, tol: Tolerances) -> VerificationReport:
    sc = traj.scenario
    u_sup = max(max(d.max_u for d in traj.diagnostics), 1e-300)
    worst = math.inf
    for frame in traj.frames:
        rep = analysis.holder_check(frame.u, sc.m, u_sup)
        worst = min(worst, rep.worst_margin)
    measured = {"worst_margin": worst, "u_sup": u_sup, "m": sc.m}
    return _report("holder", worst >= -tol.holder_margin, measured, tol, ("holder_margin",))


def _psi_report(sc: Scenario, tol: Tolerances) -> VerificationReport:
    p = analysis.PsiTransform.from_data(sc.m, sc.u0_sup, sc.epsilon)
    rep = analysis.ratio_bounds_check(p)
    measured = {
        "L": p.L,
        "ratio_min": rep.ratio_min,
        "ratio_max": rep.ratio_max,
        "dratio_min": rep.dratio_min,
        "dratio_max": rep.dratio_max,
        "coefficient_max": rep.coefficient_max,
        "barrier": rep.barrier,
        "violations": len(rep.violations),
    }
    return VerificationReport("psi_bounds", "pass" if rep.passed else "fail", measured, {"samples": rep.samples})


def _cutoff_report() -> VerificationReport:
    try:
        c1, c2, c3 = analysis.cutoff_property_check()
        measured, ok = {"c1": c1, "c2": c2, "c3": c3}, True
    except ArithmeticError as exc:
        measured, ok = {"error": str(exc)}, False
    return VerificationReport("cutoff_bounds", "pass" if ok else "fail", measured, {"coefficient": 8.0})


def slope_scale(traj: Trajectory) -> float:
    """Largest ``|Δu|/dx`` over frames."""
    dx = traj.grid.dx
    return max(float(np.abs(np.diff(f.u.values)).max()) / dx for f in traj.frames)


def checked_frames(traj: Trajectory, pair: interface.InterfacePair) -> int:
    """Leading frames with ``t < T0`` on which the hole is still open."""
    inside = sum(1 for t in pair.times if t < traj.t0_window)
    return max(1, min(inside, interface.hole_lifetime_index(pair)))


@dataclass
class InterfaceSummary:
    pair: interface.InterfacePair
    frames: int
    drift: np.ndarray
    vacuum: interface.VacuumReport
    vacuum_bound: float


def interface_summary(traj: Trajectory, tol: Tolerances = TOLERANCES, convention: str = "intro") -> InterfaceSummary:
    sc = traj.scenario
    a, b = sc.hole
    pair = interface.integrate_interfaces(traj, a, b, convention)
    n = checked_frames(traj, pair)
    drift = interface.cone_mass_drift(traj, pair, n)
    vac = interface.vacuum_check(traj, pair)
    bound = max(tol.vacuum_eps_factor * sc.epsilon, tol.vacuum_slope_cells * traj.grid.dx * slope_scale(traj))
    return InterfaceSummary(pair, n, drift, vac, bound)


def _interface_reports(traj: Trajectory, tol: Tolerances) -> list[VerificationReport]:
    s = interface_summary(traj, tol)
    n = s.frames
    excluded = s.pair.times.size - n
    cone = {
        "max_drift": float(s.drift.max()),
        "frames_checked": n,
        "frames_excluded": excluded,
    }
    interior = s.vacuum.interior_max_u[:n]
    vac = {
        "max_interior_u": float(interior.max()),
        "bound": s.vacuum_bound,
        "max_interior_integral": float(s.vacuum.interior_integral[:n].max()),
        "frames_checked": n,
    }
    return [
        _report("cone_mass", cone["max_drift"] <= tol.cone_mass_rel, cone, tol, ("cone_mass_rel",)),
        _report("vacuum", vac["max_interior_u"] <= s.vacuum_bound, vac, tol, ("vacuum_eps_factor", "vacuum_slope_cells")),
    ]


def _pme_report(traj: Trajectory, tol: Tolerances) -> VerificationReport:
    sc = traj.scenario
    t0, mass = sc.u0.params
    curve = pme.pme_error(traj, pme.BarenblattProfile.from_mass(sc.m, mass), t0)
    excess = float(np.max(curve.support_edge_numeric - curve.support_edge_exact)) / curve.dx
    measured = {"l1_error_end": float(curve.l1_error[-1]), "support_excess_cells": excess}
    return _report("pme_convergence", excess <= tol.support_cells, measured, tol, ("support_cells",))


def is_pme_scenario(sc: Scenario) -> bool:
    return not sc.drift_enabled and sc.u0.kind == "barenblatt"


def verify(traj: Trajectory, tol: Tolerances = TOLERANCES, formulas: bool = True) -> list[VerificationReport]:
    """All claims checkable on one trajectory, in a fixed order."""
    sc = traj.scenario
    reports = [_linf_report(traj, tol), _mass_report(traj, tol), _dxv_report(traj, tol), _holder_report(traj, tol)]
    if sc.hole is not None:
        reports += _interface_reports(traj, tol)
    if is_pme_scenario(sc):
        reports.append(_pme_report(traj, tol))
    if formulas:
        reports += [_psi_report(sc, tol), _cutoff_report()]
    return reports


def run_scenario(path, tol: Tolerances = TOLERANCES, formulas: bool = True):
    """Load, integrate and verify one config file."""
    sc = load(path)
    traj = stepper.run(sc)
    return traj, verify(traj, tol, formulas)


# ---------------------------------------------------------------- sweeps


@dataclass
class SweepRow:
    epsilon: float
    lipschitz_sup: float
    vacuum_max: float
    cone_drift: float
    error: str = ""


@dataclass
class SweepReport:
    rows: list[SweepRow]
    report: VerificationReport
    vacuum_report: VerificationReport | None = None

    @property
    def passed(self) -> bool:
        return self.report.ok and (self.vacuum_report is None or self.vacuum_report.ok)


def _sweep_member(sc: Scenario) -> SweepRow:
    try:
        traj = stepper.run(sc)
        lip = analysis.lipschitz_sup(traj)
        vac = drift = 0.0
        if sc.hole is not None:
            s = interface_summary(traj)
            vac = float(s.vacuum.interior_max_u[: s.frames].max())
            drift = float(s.drift.max())
        return SweepRow(sc.epsilon, lip, vac, drift)
    except (stepper.SimulationAborted, interface.InterfaceEscape) as exc:
        return SweepRow(sc.epsilon, math.nan, math.nan, math.nan, f"{type(exc).__name__}: {exc}")


def _map(fn, items, workers: int | None):
    items = list(items)
    if workers is None:
        workers = min(len(items), os.cpu_count() or 1)
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


class SweepError(RuntimeError):
    pass


def sweep_epsilon(sc: Scenario, eps_list, tol: Tolerances = TOLERANCES, workers: int | None = None) -> SweepReport:
    """Run the scenario once per epsilon (concurrently) and judge uniformity."""
    eps = [float(e) for e in eps_list]
    if len(eps) < 3:
        raise ValueError("need at least 3 epsilon values")
    if len(set(eps)) != len(eps) or any(e < 0 for e in eps):
        raise ValueError("epsilon values must be distinct and nonnegative")
    rows = _map(_sweep_member, [sc.with_(epsilon=e) for e in eps], workers)
    failed = [r for r in rows if r.error]
    if failed:
        raise SweepError("; ".join(f"eps={r.epsilon:g}: {r.error}" for r in failed))
    lips = [r.lipschitz_sup for r in rows]
    first, last = lips[0], lips[-1]
    lip_ok = last <= tol.lipschitz_band * first or (first == 0.0 and last == 0.0)
    band = max(lips) / min(lips) if min(lips) > 0 else (1.0 if max(lips) == 0 else math.inf)
    rep = _report(
        "lipschitz_uniformity",
        lip_ok,
        {"first": first, "last": last, "band": band},
        tol,
        ("lipschitz_band",),
    )
    vac_rep = None
    if sc.hole is not None:
        vals = [r.vacuum_max for r in rows]
        ok = all(b <= (1.0 + tol.vacuum_noise) * a + 1e-300 for a, b in zip(vals, vals[1:]))
        vac_rep = _report("vacuum", ok, {"first": vals[0], "last": vals[-1]}, tol, ("vacuum_noise",))
    return SweepReport(rows, rep, vac_rep)


# ---------------------------------------------------------------- convergence


@dataclass
class ConvergenceReport:
    sizes: list[int]
    l1_differences: list[float]
    l1_orders: list[float]
    cone_drifts: list[float]
    cone_orders: list[float]
    pme_errors: list[float]
    pme_ratios: list[float]
    reports: list[VerificationReport] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all_passed(self.reports)


def restrict(u: np.ndarray, factor: int = 2) -> np.ndarray:
    """Average fine cells onto the grid ``factor`` times coarser."""
    return u.reshape(-1, factor).mean(axis=1)


def check_sizes(sizes) -> list[int]:
    sizes = [int(n) for n in sizes]
    if len(sizes) < 3:
        raise ValueError("need at least 3 grid sizes")
    for a, b in zip(sizes, sizes[1:]):
        if b != 2 * a:
            raise ValueError(f"grid sizes must double: {a} -> {b}")
    return sizes


def _order(a: float, b: float) -> float:
    if a == 0.0 and b == 0.0:
        return math.inf
    if b == 0.0:
        return math.inf
    return math.log2(a / b)


def _convergence_member(sc: Scenario):
    traj = stepper.run(sc)
    drift = math.nan
    if sc.hole is not None:
        drift = float(interface_summary(traj).drift.max())
    pme_err = math.nan
    if is_pme_scenario(sc):
        t0, mass = sc.u0.params
        curve = pme.pme_error(traj, pme.BarenblattProfile.from_mass(sc.m, mass), t0)
        pme_err = float(curve.l1_error[-1])
    return traj.frames[-1].u.values.copy(), drift, pme_err


def refined_scenarios(sc: Scenario, sizes: list[int]) -> list[Scenario]:
    """Grids at each size, with frame spacing shrinking in proportion to dx."""
    base = sizes[0]
    return [sc.with_cells(n).with_(n_frames=sc.n_frames * n // base) for n in sizes]


def convergence_study(sc: Scenario, sizes, tol: Tolerances = TOLERANCES, workers: int | None = None) -> ConvergenceReport:
    sizes = check_sizes(sizes)
    results = _map(_convergence_member, refined_scenarios(sc, sizes), workers)
    dx = [sc.grid.length / n for n in sizes]
    finals = [r[0] for r in results]
    diffs = [dx[i] * float(np.abs(finals[i] - restrict(finals[i + 1])).sum()) for i in range(len(sizes) - 1)]
    l1_orders = [_order(a, b) for a, b in zip(diffs, diffs[1:])]
    drifts = [r[1] for r in results]
    pme_errs = [r[2] for r in results]
    cone_orders = [_order(a, b) for a, b in zip(drifts, drifts[1:])] if sc.hole is not None else []
    ratios = [a / b if b > 0 else math.inf for a, b in zip(pme_errs, pme_errs[1:])] if is_pme_scenario(sc) else []
    out = ConvergenceReport(sizes, diffs, l1_orders, drifts, cone_orders, pme_errs, ratios)
    l1_ok = min(l1_orders) >= tol.order_min
    measured = {"min_l1_order": min(l1_orders), "sizes": " ".join(map(str, sizes))}
    if sc.hole is not None:
        measured["min_cone_order"] = min(cone_orders)
        out.reports.append(
            _report("cone_mass", l1_ok and min(cone_orders) >= tol.order_min, measured, tol, ("order_min",))
        )
    if is_pme_scenario(sc):
        pm = dict(measured, min_error_ratio=min(ratios))
        out.reports.append(
            _report(
                "pme_convergence",
                l1_ok and min(ratios) >= tol.pme_ratio,
                pm,
                tol,
                ("order_min", "pme_ratio"),
            )
        )
    if not out.reports:
        out.reports.append(_report("mass_conservation", l1_ok, measured, tol, ("order_min",)))
    return out


# ---------------------------------------------------------------- output files

FIELD_COLUMNS = ("t", "x", "u", "v", "dxv", "w")
DIAG_COLUMNS = ("t", "mass", "max_u", "lip_w", "sup_dxv", "linf_ok")
INTERFACE_COLUMNS = ("t", "xi", "Xi", "cone_mass", "interior_max_u")
PME_COLUMNS = ("t", "l1_error", "support_edge_numeric", "support_edge_exact")

GNUPLOT_STUB = """\
# gnuplot -persist plot.gp
set datafile separator ","
set key autotitle columnhead
set multiplot layout 2,1
plot for [f in system("ls fields_*.csv")] f using 2:3 with lines notitle
plot "diagnostics.csv" using 1:3 with lines, "diagnostics.csv" using 1:4 with lines
unset multiplot
"""


def _num(x) -> str:
    return repr(float(x))


def _write_csv(path: Path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        w.writerows(rows)


def emit_plots(traj: Trajectory, out_dir, pair: interface.InterfacePair | None = None) -> list[Path]:
    """Write per-frame CSVs, diagnostics, interface and PME tables plus a gnuplot script."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sc = traj.scenario
    written = []
    x = sc.grid.centers
    for k, frame in enumerate(traj.frames):
        u, v = frame.u.values, frame.v.values
        dxv = elliptic.gradient(frame.u, frame.v, sc.gamma).values
        w = sc.m / (sc.m - 1.0) * (u + sc.epsilon) ** (sc.m - 1.0)
        path = out / f"fields_{k:04d}.csv"
        rows = ((_num(frame.t), _num(x[i]), _num(u[i]), _num(v[i]), _num(dxv[i]), _num(w[i])) for i in range(x.size))
        _write_csv(path, FIELD_COLUMNS, rows)
        written.append(path)
    path = out / "diagnostics.csv"
    _write_csv(
        path,
        DIAG_COLUMNS,
        ((_num(d.t), _num(d.mass), _num(d.max_u), _num(d.lip_w), _num(d.sup_dxv), d.linf_ok) for d in traj.diagnostics),
    )
    written.append(path)
    rows = []
    if pair is not None:
        vac = interface.vacuum_check(traj, pair)
        for k in range(pair.times.size):
            rows.append(
                (
                    _num(pair.times[k]),
                    _num(pair.xi[k]),
                    _num(pair.Xi[k]),
                    _num(interface.cone_mass(traj, pair, k)),
                    _num(vac.interior_max_u[k]),
                )
            )
    path = out / "interfaces.csv"
    _write_csv(path, INTERFACE_COLUMNS, rows)
    written.append(path)
    if traj.frames and is_pme_scenario(sc):
        t0, mass = sc.u0.params
        curve = pme.pme_error(traj, pme.BarenblattProfile.from_mass(sc.m, mass), t0)
        path = out / "pme_error.csv"
        _write_csv(path, PME_COLUMNS, ([_num(c) for c in row] for row in curve.rows()))
        written.append(path)
    path = out / "plot.gp"
    path.write_text(GNUPLOT_STUB)
    written.append(path)
    return written

