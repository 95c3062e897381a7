"""
Seeded randomized suites for the comparison principles

Each instance draws from its own child of a SeedSequence, so results do not
depend on the worker count or on scheduling order.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import SpectralError
from ..models.schemas import LemmaOutcome, LemmaVerdict, ProblemSpec, Triangle
from ..settings import PrinciplesSettings
from ..spectral.eigen import eigendecompose, zero_mode
from .lemmas import (
    BoundEstimate,
    NonlinearBound,
    lemma1_comparison,
    lemma2_positivity,
    lemma3_barrier,
    lemma4_bound,
    lemma4_grid_stability,
    lemma5_nonlinear_bound,
)
from .transport import GaussianData, TransportInstance, quadratic_damping
from .triangle import characteristic_triangle

logger = logging.getLogger(__name__)

CANONICAL_L = np.array([[-1.0, 1.0], [1.0, -1.0]])
CANONICAL_D = np.array([2.0, 1.0])

Seed = Union[int, np.random.SeedSequence]


def child_generators(seed: Seed, count: int) -> List[np.random.Generator]:
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.default_rng(s) for s in root.spawn(count)]


def random_metzler(rng: np.random.Generator, m: int) -> np.ndarray:
    """Off-diagonal entries U(0.1, 1), columns summing to zero"""
    L = rng.uniform(0.1, 1.0, size=(m, m))
    np.fill_diagonal(L, 0.0)
    np.fill_diagonal(L, -L.sum(axis=0))
    return L


def random_apex(rng: np.random.Generator, D: np.ndarray, t_max: float = 1.0) -> Triangle:
    return characteristic_triangle(float(rng.uniform(-1.0, 1.0)), float(rng.uniform(0.2, t_max)), D)


def _run(tasks: Sequence, worker: Callable, workers: int) -> List:
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        return list(executor.map(worker, tasks))


def lemma1_suite(samples: int, seed: Seed, workers: int = 1) -> List[LemmaOutcome]:
    """Lop = 2·I − L for random Metzler L, f₂ = |f₁| + U(0.1, 1)"""
    def draw(item):
        k, rng = item
        m = int(rng.integers(2, 6))
        Lop = 2.0 * np.eye(m) - random_metzler(rng, m)
        f1 = rng.uniform(-1.0, 1.0, m)
        f2 = np.abs(f1) + rng.uniform(0.1, 1.0, m)
        return lemma1_comparison(Lop, f1, f2, instance=k)

    return _run(list(enumerate(child_generators(seed, samples))), draw, workers)


def positivity_instance(rng: np.random.Generator, m: int = 5,
                        L: Optional[np.ndarray] = None) -> Tuple[TransportInstance, Triangle]:
    """u⁰ = 0.1 + Gaussian, f = 0.01"""
    L = random_metzler(rng, m) if L is None else L
    D = rng.uniform(-2.0, 2.0, m)
    initial = GaussianData(offset=np.full(m, 0.1), amplitude=rng.uniform(0.0, 1.0, m),
                           center=float(rng.uniform(-1.0, 1.0)), beta=float(rng.uniform(0.5, 1.5)))
    instance = TransportInstance(L=L, D=D, initial=initial, source=GaussianData.constant(np.full(m, 0.01)))
    return instance, random_apex(rng, D)


def lemma2_suite(samples: int, seed: Seed, cells: int = 200, workers: int = 1) -> List[LemmaOutcome]:
    def draw(item):
        k, rng = item
        instance, triangle = positivity_instance(rng)
        return lemma2_positivity(instance, triangle, cells, index=k)

    return _run(list(enumerate(child_generators(seed, samples))), draw, workers)


def break_quasimonotonicity(rng: np.random.Generator, L: np.ndarray) -> np.ndarray:
    """One off-diagonal entry set strongly negative"""
    L = L.copy()
    m = L.shape[0]
    i, j = rng.choice(m, size=2, replace=False)
    L[i, j] = -float(rng.uniform(3.0, 8.0))
    return L


def lemma2_counterexample_search(attempts: int, seed: Seed, cells: int = 200,
                                 workers: int = 1) -> List[LemmaOutcome]:
    """
    Positivity instances whose operator is no longer quasimonotone.

    The first FAIL outcome, when any, is the counterexample; its detail
    records the violating node.
    """
    def draw(item):
        k, rng = item
        m = int(rng.integers(2, 6))
        L = break_quasimonotonicity(rng, random_metzler(rng, m))
        instance, triangle = positivity_instance(rng, m, L)
        return lemma2_positivity(instance, triangle, cells, index=k)

    outcomes = _run(list(enumerate(child_generators(seed, attempts))), draw, workers)
    failures = [o for o in outcomes if o.verdict == LemmaVerdict.FAIL]
    if failures:
        logger.info(f"Counterexample to positivity without quasimonotonicity: instance "
                    f"{failures[0].instance}, {failures[0].detail}")
    else:
        logger.warning(f"No positivity counterexample in {attempts} attempts")
    return outcomes


def barrier_pair(rng: np.random.Generator, m: int) -> Tuple[TransportInstance, TransportInstance, Triangle]:
    """u₂ with signed data, u₁ dominating it pointwise"""
    L = random_metzler(rng, m)
    D = rng.uniform(-2.0, 2.0, m)
    center = float(rng.uniform(-1.0, 1.0))
    beta = float(rng.uniform(0.5, 1.5))
    a = rng.uniform(-1.0, 1.0, m)
    b = rng.uniform(-0.05, 0.05, m)
    second = TransportInstance(
        L=L, D=D,
        initial=GaussianData(offset=np.zeros(m), amplitude=a, center=center, beta=beta),
        source=GaussianData(offset=np.zeros(m), amplitude=b, center=center, beta=beta),
    )
    first = TransportInstance(
        L=L, D=D,
        initial=GaussianData(offset=np.full(m, 0.1), amplitude=np.abs(a) + rng.uniform(0.0, 0.5, m),
                             center=center, beta=beta),
        source=GaussianData(offset=np.full(m, 0.01), amplitude=np.abs(b) + rng.uniform(0.0, 0.05, m),
                            center=center, beta=beta),
    )
    return first, second, random_apex(rng, D)


def lemma3_suite(samples: int, seed: Seed, cells: int = 200, workers: int = 1) -> List[LemmaOutcome]:
    def draw(item):
        k, rng = item
        first, second, triangle = barrier_pair(rng, int(rng.integers(2, 6)))
        return lemma3_barrier(first, second, triangle, cells, index=k)

    return _run(list(enumerate(child_generators(seed, samples))), draw, workers)


def bound_samples(samples: int, seed: Seed) -> List[Tuple[TransportInstance, Triangle]]:
    """Linear instances with m ≤ 5, t₀ ≤ 1 and signed data"""
    out = []
    for rng in child_generators(seed, samples):
        m = int(rng.integers(2, 6))
        L = random_metzler(rng, m)
        D = rng.uniform(-2.0, 2.0, m)
        center = float(rng.uniform(-1.0, 1.0))
        beta = float(rng.uniform(0.5, 1.5))
        instance = TransportInstance(
            L=L, D=D,
            initial=GaussianData(offset=rng.uniform(-0.2, 0.2, m), amplitude=rng.uniform(-1.0, 1.0, m),
                                 center=center, beta=beta),
            source=GaussianData(offset=np.zeros(m), amplitude=rng.uniform(-0.5, 0.5, m),
                                center=center, beta=beta),
        )
        out.append((instance, random_apex(rng, D)))
    return out


def nonlinear_instance(L: np.ndarray = CANONICAL_L, D: np.ndarray = CANONICAL_D,
                       h0: Optional[np.ndarray] = None, amplitude: float = 0.1,
                       source: float = 0.05) -> TransportInstance:
    """f₂ = −u² with data of sup-norm `amplitude` along the positive kernel vector h₀"""
    h0 = np.ones(len(D)) if h0 is None else np.abs(np.asarray(h0, dtype=float))
    return TransportInstance(
        L=L, D=D,
        initial=GaussianData(offset=0.5 * amplitude * h0, amplitude=0.5 * amplitude * h0, beta=1.0),
        source=GaussianData.constant(source * h0),
        reaction=quadratic_damping, reaction_slope=2.0, label="f2 = -u^2",
    )


def _nonlinear_instance_for(spec: Optional[ProblemSpec]) -> TransportInstance:
    if spec is None:
        return nonlinear_instance()
    try:
        h0, _ = zero_mode(eigendecompose(spec.L, spec.W))
    except SpectralError:
        h0 = None
    return nonlinear_instance(spec.L, spec.D, h0)


@dataclass
class SuiteReport:
    """Outcomes of the selected lemmas plus the scalar estimates"""
    outcomes: Dict[int, List[LemmaOutcome]] = field(default_factory=dict)
    bound: Optional[BoundEstimate] = None
    stability: Optional[Tuple[float, float, float]] = None
    nonlinear: Optional[NonlinearBound] = None

    def rows(self) -> List[dict]:
        rows = []
        for lemma in sorted(self.outcomes):
            for o in self.outcomes[lemma]:
                rows.append({'lemma': o.lemma, 'instance': o.instance, 'verdict': LemmaVerdict(o.verdict).value,
                             'ratio': o.ratio, 'margin': o.margin, 'detail': o.detail})
        return rows

    def summary(self, lemma: int) -> str:
        outcomes = self.outcomes.get(lemma, [])
        counts = {v.value: sum(1 for o in outcomes if LemmaVerdict(o.verdict) == v) for v in LemmaVerdict}
        line = (f"lemma {lemma}: {len(outcomes)} instances, {counts['pass']} pass, "
                f"{counts['fail']} fail, {counts['skip']} skip")
        if lemma == 4 and self.bound is not None:
            line += f", C_hat={self.bound.c_hat:.6g}"
            if self.stability is not None:
                line += f", refined {self.stability[1]:.6g} ({100 * self.stability[2]:.2f}% change)"
        if lemma == 5 and self.nonlinear is not None:
            nl = self.nonlinear
            line += f", T0={nl.horizon:.4g}, ratio={nl.ratio:.6g}, C_hat_lin={nl.c_hat_linear:.6g}"
            if nl.scale_change is not None:
                line += f", L x 10 change {100 * nl.scale_change:.2f}%"
        return line

    @property
    def passed(self) -> bool:
        """No FAIL outside the deliberate counterexample search"""
        for lemma, outcomes in self.outcomes.items():
            if lemma == 2 and any('metzler=no' in o.detail for o in outcomes):
                outcomes = [o for o in outcomes if 'metzler=no' not in o.detail]
            if any(LemmaVerdict(o.verdict) == LemmaVerdict.FAIL for o in outcomes):
                return False
        if self.stability is not None and self.stability[2] > 0.05:
            return False
        if self.nonlinear is not None:
            change = self.nonlinear.scale_change
            if change is not None and change > 0.10:
                return False
        return True


def run_suites(lemmas: Sequence[int], settings: Optional[PrinciplesSettings] = None,
               samples: Optional[int] = None, seed: Optional[int] = None, workers: int = 1,
               counterexamples: bool = True, spec: Optional[ProblemSpec] = None) -> SuiteReport:
    """
    Run the selected lemma suites.

    Args:
        lemmas: subset of 1..5
        settings: suite sizes, seed, grid cells
        samples: override of the per-suite sample count
        seed: override of the root seed
        workers: thread count
        counterexamples: also search for a Lemma 2 counterexample
        spec: operator and speeds for the Lemma 5 instance (canonical when omitted)
    """
    settings = settings or PrinciplesSettings()
    n = samples or settings.samples
    seed = settings.seed if seed is None else seed
    cells = settings.cells
    report = SuiteReport()
    # one independent branch of the root seed per lemma, plus the counterexample search
    branches = np.random.SeedSequence(seed).spawn(6)

    for lemma in sorted(set(lemmas)):
        branch = branches[lemma] if 1 <= lemma <= 5 else None
        if lemma == 1:
            report.outcomes[1] = lemma1_suite(n, branch, workers)
        elif lemma == 2:
            outcomes = lemma2_suite(n, branch, cells, workers)
            if counterexamples:
                search = lemma2_counterexample_search(n, branches[0], cells, workers)
                outcomes += [o.model_copy(update={'instance': n + o.instance}) for o in search]
            report.outcomes[2] = outcomes
        elif lemma == 3:
            report.outcomes[3] = lemma3_suite(n, branch, cells, workers)
        elif lemma == 4:
            draws = bound_samples(samples or settings.lemma4_samples, branch)
            report.bound = lemma4_bound(draws, cells, workers=workers)
            report.outcomes[4] = report.bound.outcomes
            report.stability = lemma4_grid_stability(draws, cells, workers, coarse=report.bound.c_hat)
        elif lemma == 5:
            instance = _nonlinear_instance_for(spec)
            triangle = characteristic_triangle(0.0, 1.0, instance.D)
            report.nonlinear = lemma5_nonlinear_bound(instance, triangle, K=1.0, cells=cells,
                                                      max_halvings=settings.max_halvings)
            report.outcomes[5] = [report.nonlinear.outcome]
        else:
            raise ValueError(f"unknown lemma {lemma}")
        logger.info(report.summary(lemma))
    return report
