"""Homology groups and cohomology rings of Reeb spaces built by bubbling operations."""

from .errors import PreconditionViolated, ReebError, StepError
from .exact_algebra import CoefficientRing, GradedModule
from .graded_ring import GradedAlgebra
from .reeb_state import ReebState

__all__ = ["CoefficientRing", "GradedAlgebra", "GradedModule", "PreconditionViolated", "ReebError",
           "ReebState", "StepError"]
