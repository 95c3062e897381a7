"""
Exception hierarchy for the asymptotics toolkit.

Verdicts (failed conditions, failed lemma checks, failed theorem checks) are
returned as values. Exceptions are reserved for inputs the pipeline cannot
work with and for numerical breakdowns.
"""

from typing import Optional


class AsymptoticsError(Exception):
    """Root of every error raised by the toolkit"""


class ConfigError(AsymptoticsError):
    """Problem document or defaults table could not be accepted"""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        self.field = field
        self.line = line
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field is not None:
            location.append(f"field '{field}'")
        suffix = f" ({', '.join(location)})" if location else ""
        super().__init__(f"{message}{suffix}")
        self.reason = message


class SpectralError(AsymptoticsError):
    """Operator violates a structural condition needed for the decomposition"""


class ExpansionError(AsymptoticsError):
    """Profile solve or term construction failed"""


class SolverError(AsymptoticsError):
    """Reference solver breakdown or inconclusive refinement"""


class PrinciplesError(AsymptoticsError):
    """Comparison-principle suite could not be set up"""


class HarnessError(AsymptoticsError):
    """Sweep inputs or measurements are unusable"""
