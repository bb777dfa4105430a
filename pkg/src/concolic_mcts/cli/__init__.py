from .coverage import CoverageReport, coverage_of
from .oracle import ReadPastEnd, oracle_outcomes, oracle_paths

__all__ = ["CoverageReport", "ReadPastEnd", "coverage_of", "oracle_outcomes", "oracle_paths"]
