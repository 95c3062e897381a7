"""Log-log slope fits and the residual-estimate verdict"""

import logging
from typing import Sequence

import numpy as np

from ..errors import HarnessError
from ..models.schemas import ConvergenceReport, SlopeFit, TheoremVerdict

logger = logging.getLogger(__name__)

RATIO_SPREAD_LIMIT = 10.0


def fit_slope(eps: Sequence[float], values: Sequence[float]) -> SlopeFit:
    """
    Least-squares line log E = slope·log ε + intercept.

    Raises:
        HarnessError: fewer than three pairs or a nonpositive entry
    """
    eps = np.asarray(eps, dtype=float)
    values = np.asarray(values, dtype=float)
    if eps.size < 3 or eps.size != values.size:
        raise HarnessError(f"slope fit needs at least 3 matched pairs, got {eps.size}/{values.size}")
    if np.any(eps <= 0.0) or np.any(values <= 0.0) or not np.all(np.isfinite(values)):
        raise HarnessError("slope fit needs positive finite entries")

    log_eps, log_values = np.log(eps), np.log(values)
    slope, intercept = np.polyfit(log_eps, log_values, 1)
    residual = float(np.max(np.abs(log_values - (slope * log_eps + intercept))))
    return SlopeFit(slope=float(slope), intercept=float(intercept), residual=residual)


def theorem_check(report: ConvergenceReport, slack: float = 0.3) -> TheoremVerdict:
    """
    ‖R_N‖ ≤ Ĉ ε^{N+1} is substantiated when the error slope reaches N + 1 − δ
    and E(ε)/ε^{N+1} stays within a factor 10 across the sweep. An
    "oracle separation" flag on the report fails the verdict.
    """
    required = report.order + 1 - slack
    ratios = [e.error / e.eps ** (report.order + 1) for e in report.entries]
    low, high = min(ratios), max(ratios)
    spread = high / low if low > 0.0 else float('inf')

    reasons = []
    if report.slope < required:
        reasons.append(f"slope {report.slope:.3f} below required {required:.3f}")
    if spread > RATIO_SPREAD_LIMIT:
        reasons.append(f"E/eps^{report.order + 1} spread {spread:.3g} exceeds {RATIO_SPREAD_LIMIT:g}")
    if "oracle separation" in report.flags:
        reasons.append("reference-solver error not separated from E(eps)")

    verdict = TheoremVerdict(passed=not reasons, slope=report.slope, required_slope=required,
                             ratio_spread=spread, c_hat=high, reasons=reasons)
    logger.info(f"Theorem check N={report.order}: slope {report.slope:.3f} (need {required:.3f}), "
                f"C_hat {high:.4g}, spread {spread:.3g} -> {'pass' if verdict.passed else 'fail'}")
    return verdict
