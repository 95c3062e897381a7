from .schemas import (
    GaussianBump,
    ProblemSpec,
    DecayCertificate,
    ConditionVerdict,
    ConditionReport,
    Triangle,
    LemmaVerdict,
    LemmaOutcome,
    SelfConvergence,
    SlopeFit,
    ConvergenceEntry,
    ConvergenceReport,
    TheoremVerdict,
    RunManifest,
)
from .fields import GridField, SpaceTimeField
