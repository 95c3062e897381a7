"""
ε-sweep of expansion error and defect

For each ε the reference solver and U_N are sampled on the same window and
snapshots; E(ε) is the sup-norm difference away from the truncated edges.
Per-ε pipelines run in a thread pool and are reduced in input order.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ..errors import HarnessError, SolverError
from ..expansion.assemble import ExpansionSet, assemble_field, build_expansion, required_zeta_range
from ..models.schemas import ConvergenceEntry, ConvergenceReport, ProblemSpec
from ..problem.initial import truncation_window, validate_initial_decay, window_grid
from ..settings import HarnessSettings, RunSettings
from ..solver.convergence import self_convergence
from ..solver.reference import solve_reference
from ..spectral.conditions import check_conditions
from ..spectral.eigen import SpectralData, drift_coefficient, eigendecompose
from .defect import dense_defect, layer_exit_time
from .slopes import fit_slope

logger = logging.getLogger(__name__)

SEPARATION_FACTOR = 0.1


def validate_eps(eps_values: Sequence[float]) -> List[float]:
    """ε list: at least three values in (0, 1), strictly decreasing"""
    eps = [float(e) for e in eps_values]
    if len(eps) < 3:
        raise HarnessError(f"sweep needs at least 3 eps values, got {len(eps)}")
    if any(not 0.0 < e < 1.0 for e in eps):
        raise HarnessError("eps values must lie in (0, 1)")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise HarnessError("eps values must be strictly decreasing")
    return eps


def snapshot_times(eps: float, horizon: float, settings: HarnessSettings) -> np.ndarray:
    """Layer samples τ·ε² plus fractions of the horizon, sorted and unique"""
    times = [tau * eps * eps for tau in settings.layer_tau] + [f * horizon for f in settings.fractions]
    times = sorted({round(t, 15) for t in times if 0.0 < t <= horizon})
    return np.array(times)


def build_report(order: int, entries: List[ConvergenceEntry], horizon: float,
                 flags: Optional[List[str]] = None, grid: Optional[Dict[str, Any]] = None) -> ConvergenceReport:
    """Fit slopes and assemble a report from per-ε entries."""
    flags = list(flags or [])
    eps = [e.eps for e in entries]
    errors = [e.error for e in entries]
    if any(b >= a for a, b in zip(errors, errors[1:])):
        flags.append("inconclusive sweep")

    def optional_fit(values):
        if all(v > 0.0 for v in values):
            return fit_slope(eps, values)
        return None

    return ConvergenceReport(
        order=order, entries=entries, error_fit=fit_slope(eps, errors),
        defect_fit=optional_fit([e.defect for e in entries]),
        kernel_defect_fit=optional_fit([e.kernel_defect for e in entries]),
        c_hat=max(e.ratio for e in entries), horizon=horizon, flags=flags, grid=dict(grid or {}),
    )


def separation_failures(entries: Sequence[ConvergenceEntry], factor: float = SEPARATION_FACTOR) -> List[float]:
    """ε values whose measured solver error exceeds factor·E(ε)"""
    return [e.eps for e in entries
            if e.solver_error is not None and e.solver_error > factor * e.error]


class SweepRunner:
    """
    One expansion, many ε

    Features:
    - Expansion terms built once over the ζ-range of every window
    - Reference and expansion sampled on identical nodes
    - Dense-mode defect after the initial layer
    - Refined re-solve at every ε bounds the reference-solver error
    """

    def __init__(self, spec: ProblemSpec, order: int, eps_values: Sequence[float],
                 settings: Optional[RunSettings] = None, sd: Optional[SpectralData] = None):
        self.spec = spec
        self.order = order
        self.eps = validate_eps(eps_values)
        self.settings = settings or RunSettings()
        self.sd = sd or eigendecompose(spec.L, spec.W, self.settings.spectral)
        self.horizon = min(spec.T, self.settings.harness.horizon_cap)
        self.cert = validate_initial_decay(spec)
        self.exp_set: Optional[ExpansionSet] = None
        self.stage_seconds: Dict[str, float] = {}

    def check(self):
        report = check_conditions(self.spec, self.settings.spectral)
        if not report.passed:
            raise HarnessError(f"conditions failed: {', '.join(report.failed())}")

    def expand(self) -> ExpansionSet:
        started = time.perf_counter()
        B = drift_coefficient(self.sd, self.spec.D)
        zeta_range = required_zeta_range(self.spec, B, self.eps, self.horizon, self.settings.solver.decay_width)
        self.exp_set = build_expansion(self.spec, self.sd, self.order, zeta_range, self.horizon,
                                       self.settings.expansion)
        self.stage_seconds['expand'] = time.perf_counter() - started
        return self.exp_set

    def window(self, eps: float):
        centre, half = truncation_window(self.spec, self.cert, eps, self.horizon,
                                         self.settings.solver.decay_width)
        return window_grid(centre, half, self.settings.solver.grid_step * eps)

    def measure(self, eps: float) -> ConvergenceEntry:
        """Error, defect and reference-solver error for one ε"""
        harness = self.settings.harness
        x = self.window(eps)
        times = snapshot_times(eps, self.horizon, harness)
        reference = solve_reference(self.spec, eps, x, times, sd=self.sd, settings=self.settings.solver)
        approx = assemble_field(self.exp_set, self.order, eps, x, times)

        keep = slice(harness.edge_cells, x.size - harness.edge_cells)
        error = float(np.max(np.abs(reference.values[:, keep] - approx.values[:, keep])))

        t_exit = layer_exit_time(self.order, eps, self.sd.gap)
        centres = [t for t in times if t >= t_exit] or [self.horizon]
        edge = harness.edge_cells * reference.dx
        full, projected = dense_defect(self.exp_set, self.spec, self.sd, self.order, eps,
                                       (x[0] + edge, x[-1] - edge), centres, harness.dense_delta)

        solver_error = None
        if harness.check_separation:
            fine_x = x[0] + 0.5 * reference.dx * np.arange(2 * (x.size - 1) + 1)
            fine = solve_reference(self.spec, eps, fine_x, times, sd=self.sd, settings=self.settings.solver,
                                   step=0.5 * reference.scheme['dt'])
            solver_error = float(np.max(np.abs(fine.values[:, ::2][:, keep] - reference.values[:, keep])))

        logger.info(f"eps={eps:g}: E={error:.4e}, defect={full:.4e}, kernel defect={projected:.4e}"
                    + (f", solver error={solver_error:.3e}" if solver_error is not None else ""))
        return ConvergenceEntry(
            eps=eps, error=error, defect=full, kernel_defect=projected,
            ratio=error / eps ** (self.order + 1), dx=reference.dx, dt=float(reference.scheme['dt']),
            snapshots=[float(t) for t in times], solver_error=solver_error,
        )

    def run(self, workers: Optional[int] = None) -> ConvergenceReport:
        self.check()
        if self.exp_set is None:
            self.expand()

        harness = self.settings.harness
        flags: List[str] = []
        grid: Dict[str, Any] = {
            'grid_step': self.settings.solver.grid_step, 'cfl': self.settings.solver.cfl,
            'relaxation_step': self.settings.solver.relaxation_step, 'kernel': self.settings.solver.kernel,
            'dzeta': self.settings.expansion.dzeta, 'edge_cells': harness.edge_cells,
            'dense_delta': harness.dense_delta, **self.exp_set.summary(),
        }

        if harness.check_separation:
            started = time.perf_counter()
            try:
                study = self_convergence(self.spec, self.eps[0], sd=self.sd, settings=self.settings.solver,
                                         horizon=self.horizon)
                grid['self_convergence'] = study.sentinel or round(study.order, 6)
            except SolverError as e:
                logger.warning(f"Solver self-convergence: {e}")
                flags.append("solver self-convergence inconclusive")
            self.stage_seconds['self_convergence'] = time.perf_counter() - started

        started = time.perf_counter()
        with ThreadPoolExecutor(max_workers=max(1, workers or harness.workers)) as executor:
            entries = list(executor.map(self.measure, self.eps))
        self.stage_seconds['sweep'] = time.perf_counter() - started

        unseparated = separation_failures(entries)
        if unseparated:
            logger.warning(f"Solver error above 0.1*E at eps={', '.join(f'{e:g}' for e in unseparated)}")
            flags.append("oracle separation")
        report = build_report(self.order, entries, self.horizon, flags, grid)
        if report.kernel_defect_fit is not None and report.kernel_defect_fit.slope < self.order + 1.6:
            report.flags.append("kernel defect slope low")
        return report


def error_sweep(spec: ProblemSpec, order: int, eps_values: Sequence[float],
                settings: Optional[RunSettings] = None, sd: Optional[SpectralData] = None,
                workers: Optional[int] = None) -> ConvergenceReport:
    """
    Measure E(ε) and the defects of U_N across a sweep.

    Args:
        spec: problem instance; every condition must pass
        order: expansion order N ∈ {0, 1}
        eps_values: strictly decreasing, at least three values in (0, 1)
        settings: run settings
        workers: thread count (settings.harness.workers when omitted)

    Raises:
        HarnessError: invalid ε list or failed conditions
    """
    return SweepRunner(spec, order, eps_values, settings, sd).run(workers)
