"""
Discrete comparison principles

Each check returns a LemmaOutcome. Hypotheses that do not hold give SKIP
with "hypothesis not met"; strict inequalities are witnessed up to a
tolerance floor.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import LinAlgError, expm, lu_factor, lu_solve

from ..errors import PrinciplesError, SpectralError
from ..models.schemas import LemmaOutcome, LemmaVerdict, Triangle
from ..spectral.conditions import is_metzler
from ..spectral.eigen import eigendecompose, zero_mode
from .transport import GaussianData, TransportInstance, TriangleSolution, solve_on_triangle
from .triangle import characteristic_triangle

logger = logging.getLogger(__name__)

FLOOR = 1e-12


def _skip(lemma: int, instance: int, reason: str) -> LemmaOutcome:
    return LemmaOutcome(lemma=lemma, instance=instance, verdict=LemmaVerdict.SKIP,
                        detail=f"hypothesis not met: {reason}")


def lemma1_comparison(Lop, f1, f2, floor: float = FLOOR, instance: int = 0) -> LemmaOutcome:
    """
    Operator comparison: Lop·y₁ = f₁, Lop·y₂ = f₂ with f₂ > |f₁| and Lop⁻¹
    positive implies y₂ > |y₁|.
    """
    Lop = np.asarray(Lop, dtype=float)
    f1 = np.asarray(f1, dtype=float)
    f2 = np.asarray(f2, dtype=float)

    gap = float(np.min(f2 - np.abs(f1)))
    if gap <= floor:
        return _skip(1, instance, f"f2 - |f1| = {gap:.3e} is not strictly positive")

    try:
        lu = lu_factor(Lop, check_finite=True)
    except (LinAlgError, ValueError) as e:
        return _skip(1, instance, f"operator not factorizable ({e})")
    if np.min(np.abs(np.diag(lu[0]))) <= floor * max(1.0, float(np.max(np.abs(Lop)))):
        return _skip(1, instance, "operator singular")

    probes = lu_solve(lu, np.eye(Lop.shape[0]))
    if float(np.min(probes)) < -floor:
        return _skip(1, instance, "inverse does not preserve positivity")

    y1 = lu_solve(lu, f1)
    y2 = lu_solve(lu, f2)
    margin = float(np.min(y2 - np.abs(y1)))
    verdict = LemmaVerdict.PASS if margin > -floor else LemmaVerdict.FAIL
    return LemmaOutcome(lemma=1, instance=instance, verdict=verdict, margin=margin,
                        detail=f"min(y2 - |y1|) = {margin:.3e}")


def _hypothesis_gap(solution: TriangleSolution) -> Tuple[float, float]:
    """Smallest initial value on Γ₀ and smallest source value on Δ₀"""
    base = solution.mask[0]
    u0 = float(np.min(solution.values[0][base])) if base.any() else float(np.min(solution.values[0]))
    f = float(np.min(solution.inside(solution.source_values))) if solution.mask.any() else 0.0
    return u0, f


def lemma2_positivity(instance: TransportInstance, triangle: Triangle, cells: int = 200,
                      floor: float = FLOOR, index: int = 0,
                      check_hypotheses: bool = True) -> LemmaOutcome:
    """
    Positivity on Δ₀ for f > 0 and u⁰ > 0.

    The operator conditions are recorded, not enforced, so that instances
    breaking quasimonotonicity can expose counterexamples.
    """
    solution = solve_on_triangle(instance, triangle, cells)
    metzler = is_metzler(instance.L)
    if check_hypotheses:
        u0_min, f_min = _hypothesis_gap(solution)
        if u0_min <= floor or f_min <= floor:
            return _skip(2, index, f"min u0 = {u0_min:.3e}, min f = {f_min:.3e}")

    low, (x, t, state) = solution.minimum()
    detail = f"metzler={'yes' if metzler else 'no'}; min u = {low:.3e}"
    if low > -floor:
        return LemmaOutcome(lemma=2, instance=index, verdict=LemmaVerdict.PASS, margin=low, detail=detail)
    return LemmaOutcome(lemma=2, instance=index, verdict=LemmaVerdict.FAIL, margin=low,
                        detail=f"{detail} at x={x:.6g}, t={t:.6g}, state={state}")


def lemma3_barrier(first: TransportInstance, second: TransportInstance, triangle: Triangle,
                   cells: int = 200, floor: float = FLOOR, index: int = 0,
                   cross_check: bool = True) -> LemmaOutcome:
    """
    Barrier comparison: u₁⁰ > |u₂⁰| and f₁ > |f₂| give u₁ > |u₂| on Δ₀.

    With cross_check the verdict is compared with Lemma 2 applied to the
    sum and difference systems.
    """
    if first.L.shape != second.L.shape or not np.array_equal(first.L, second.L) \
            or not np.array_equal(first.D, second.D):
        raise PrinciplesError("barrier instances must share the operator and speeds")

    barrier = solve_on_triangle(first, triangle, cells)
    other = solve_on_triangle(second, triangle, cells)

    base = barrier.mask[0]
    u_gap = float(np.min(barrier.values[0][base] - np.abs(other.values[0][base]))) if base.any() else 0.0
    f_gap = float(np.min(barrier.inside(barrier.source_values) - np.abs(other.inside(other.source_values))))
    if u_gap <= floor or f_gap <= floor:
        return _skip(3, index, f"u1 - |u2| = {u_gap:.3e} on the base, f1 - |f2| = {f_gap:.3e}")

    margin = float(np.min(barrier.inside() - np.abs(other.inside())))
    verdict = LemmaVerdict.PASS if margin > -floor else LemmaVerdict.FAIL
    detail = f"min(u1 - |u2|) = {margin:.3e}"

    if cross_check:
        combined = []
        for sign in (1.0, -1.0):
            system = TransportInstance(L=first.L, D=first.D,
                                       initial=first.initial.combine(second.initial, sign),
                                       source=first.source.combine(second.source, sign))
            combined.append(lemma2_positivity(system, triangle, cells, floor, index).verdict)
        agree = (verdict == LemmaVerdict.PASS) == all(v == LemmaVerdict.PASS for v in combined)
        detail += f"; sum/difference systems {LemmaVerdict(combined[0]).value}/{LemmaVerdict(combined[1]).value}, " \
                  f"{'consistent' if agree else 'INCONSISTENT'}"
        if not agree:
            logger.warning(f"Lemma 3 instance {index}: barrier verdict disagrees with sum/difference check")

    return LemmaOutcome(lemma=3, instance=index, verdict=verdict, margin=margin, detail=detail)


def bound_ratio(solution: TriangleSolution) -> Optional[float]:
    """‖u‖_Δ / (‖u⁰‖_Γ + t₀‖f‖_Δ), None for an all-zero instance"""
    denominator = solution.base_sup() + solution.triangle.t0 * solution.source_sup()
    if denominator <= 0.0:
        return None
    return solution.sup_norm() / denominator


def lemma4_ratio(instance: TransportInstance, triangle: Triangle, cells: int = 200,
                 refine: int = 0, index: int = 0) -> LemmaOutcome:
    """One sample of the a-priori bound"""
    solution = solve_on_triangle(instance, triangle, cells, refine=refine)
    ratio = bound_ratio(solution)
    if ratio is None:
        return LemmaOutcome(lemma=4, instance=index, verdict=LemmaVerdict.SKIP, detail="zero instance")
    return LemmaOutcome(lemma=4, instance=index, verdict=LemmaVerdict.PASS, ratio=ratio,
                        detail=f"t0={triangle.t0:.4g}, dx={solution.dx:.3e}, dt={solution.dt:.3e}")


@dataclass
class BoundEstimate:
    """Ĉ and the per-sample ratios behind it"""
    c_hat: float
    outcomes: List[LemmaOutcome] = field(default_factory=list)

    @property
    def ratios(self) -> List[float]:
        return [o.ratio for o in self.outcomes if o.ratio is not None]


def lemma4_bound(samples: Sequence[Tuple[TransportInstance, Triangle]], cells: int = 200,
                 refine: int = 0, workers: int = 1) -> BoundEstimate:
    """
    Ĉ = max over samples of the bound ratio; zero instances are skipped.

    Samples run concurrently; outcomes keep the input order.
    """
    def run(item):
        k, (instance, triangle) = item
        return lemma4_ratio(instance, triangle, cells, refine, index=k)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        outcomes = list(executor.map(run, enumerate(samples)))

    ratios = [o.ratio for o in outcomes if o.ratio is not None]
    c_hat = max(ratios) if ratios else 0.0
    logger.info(f"Lemma 4: C_hat={c_hat:.6g} over {len(ratios)} samples "
                f"({len(outcomes) - len(ratios)} skipped)")
    return BoundEstimate(c_hat=c_hat, outcomes=outcomes)


def lemma4_grid_stability(samples: Sequence[Tuple[TransportInstance, Triangle]], cells: int = 200,
                          workers: int = 1, coarse: Optional[float] = None) -> Tuple[float, float, float]:
    """Ĉ on the coarse grid, on the grid with dx and dt halved, and their relative change"""
    if coarse is None:
        coarse = lemma4_bound(samples, cells, refine=0, workers=workers).c_hat
    fine = lemma4_bound(samples, cells, refine=1, workers=workers).c_hat
    change = abs(fine - coarse) / coarse if coarse > 0.0 else 0.0
    return coarse, fine, change


def relaxation_ratio(L, u0, times) -> float:
    """max over the given times of ‖e^{Lt}u⁰‖∞ / ‖u⁰‖∞ by direct exponentiation"""
    L = np.asarray(L, dtype=float)
    u0 = np.asarray(u0, dtype=float)
    norm = float(np.max(np.abs(u0)))
    return max(float(np.max(np.abs(expm(L * t) @ u0))) for t in times) / norm


@dataclass
class NonlinearBound:
    """Result of the weakly nonlinear bound check"""
    outcome: LemmaOutcome
    horizon: float
    halvings: int
    c1: float
    ratio: float
    c_hat_linear: float
    scaled_ratio: Optional[float] = None

    @property
    def scale_change(self) -> Optional[float]:
        if self.scaled_ratio is None:
            return None
        return abs(self.scaled_ratio - self.ratio) / self.ratio if self.ratio > 0.0 else 0.0


def _admissible_solve(instance: TransportInstance, triangle: Triangle, K: float, cells: int,
                      max_halvings: int) -> Tuple[TriangleSolution, int]:
    t0 = triangle.t0
    for halvings in range(max_halvings + 1):
        current = characteristic_triangle(triangle.x0, t0, instance.D)
        try:
            solution = solve_on_triangle(instance, current, cells)
            if solution.sup_norm() < K:
                return solution, halvings
        except PrinciplesError:
            pass
        logger.debug(f"Solution leaves |u| < {K:g} before t0={t0:.4g}, halving")
        t0 *= 0.5
    raise PrinciplesError(f"no admissible horizon after {max_halvings} halvings")


def lemma5_nonlinear_bound(instance: TransportInstance, triangle: Triangle, K: float,
                           cells: int = 200, max_halvings: int = 20, h0: Optional[np.ndarray] = None,
                           scale: Optional[float] = 10.0, index: int = 0) -> NonlinearBound:
    """
    Weakly nonlinear a-priori bound.

    Args:
        instance: problem with f₂(0) = 0 on |u| < K
        triangle: apex at the largest t₀ tried
        K: admissible amplitude
        h0: positive kernel vector of L (computed when omitted)
        scale: operator rescaling for the norm-independence check; None skips it

    Raises:
        PrinciplesError: "no admissible horizon"; L without a positive kernel vector
    """
    if h0 is None:
        try:
            h0, _ = zero_mode(eigendecompose(instance.L, np.ones(instance.m)))
        except SpectralError as e:
            raise PrinciplesError(f"cannot form C1: {e}")
    h0 = np.abs(np.asarray(h0, dtype=float))
    c1 = 1.0 / float(np.min(h0))

    u0_norm = float(np.max(np.abs(instance.initial(np.linspace(triangle.m2, triangle.m1, 201)))))
    if not u0_norm < c1 * K:
        outcome = _skip(5, index, f"|u0| = {u0_norm:.3e} is not below C1*K = {c1 * K:.3e}")
        return NonlinearBound(outcome=outcome, horizon=triangle.t0, halvings=0,
                              c1=c1, ratio=float('nan'), c_hat_linear=float('nan'))

    logger.debug("Nonlinear bound checked in one spatial variable; a second x-coordinate is not modelled")
    solution, halvings = _admissible_solve(instance, triangle, K, cells, max_halvings)
    ratio = bound_ratio(solution)
    horizon = solution.triangle.t0
    if ratio is None:
        return NonlinearBound(outcome=LemmaOutcome(lemma=5, instance=index, verdict=LemmaVerdict.SKIP,
                                                   detail="zero instance"),
                              horizon=horizon, halvings=halvings, c1=c1, ratio=0.0, c_hat_linear=0.0)

    linear = instance.linearized()
    family = [
        (linear, solution.triangle),
        (TransportInstance(L=linear.L, D=linear.D, initial=linear.initial,
                           source=GaussianData.constant(np.zeros(linear.m))), solution.triangle),
        (TransportInstance(L=linear.L, D=linear.D, initial=GaussianData.constant(np.zeros(linear.m)),
                           source=linear.source), solution.triangle),
    ]
    c_hat = lemma4_bound(family, cells).c_hat

    scaled_ratio = None
    if scale is not None:
        scaled_solution = solve_on_triangle(instance.rescaled(scale), solution.triangle, cells)
        scaled_ratio = bound_ratio(scaled_solution)

    passed = ratio <= c_hat * (1.0 + FLOOR)
    detail = f"T0={horizon:.4g} after {halvings} halvings, C1={c1:.4g}, C_hat_lin={c_hat:.6g}"
    if scaled_ratio is not None:
        detail += f", ratio under L x {scale:g}: {scaled_ratio:.6g}"
    outcome = LemmaOutcome(lemma=5, instance=index, verdict=LemmaVerdict.PASS if passed else LemmaVerdict.FAIL,
                           ratio=ratio, margin=c_hat - ratio, detail=detail)
    logger.info(f"Lemma 5: ratio={ratio:.6g} vs C_hat_lin={c_hat:.6g} ({LemmaVerdict(outcome.verdict).value})")
    return NonlinearBound(outcome=outcome, horizon=horizon, halvings=halvings, c1=c1, ratio=ratio,
                          c_hat_linear=c_hat, scaled_ratio=scaled_ratio)
