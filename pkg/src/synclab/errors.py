"""Exception types shared across the toolkit."""


class SynclabError(Exception):
    """Base class for all toolkit-specific errors."""


class CoincidentPhase(SynclabError):
    """Stereographic phase projection requested at a phase equal to the reference."""


class CoincidentPoint(SynclabError):
    """Stereographic sphere projection requested at the reference point."""


class DegenerateDenominator(SynclabError):
    """Cross-ratio denominator fell below the degeneracy threshold."""


class ZeroFactor(SynclabError):
    """A pairwise-distance product contains a factor below the coincidence threshold."""


class SingularDifference(SynclabError):
    """A matrix difference needed for a cross-ratio is numerically singular."""


class PassedThroughProjectionPoint(SynclabError):
    """A projected sphere trajectory blew up: some particle crossed the projection point."""


class IntegrationError(SynclabError):
    """Time integration failed (non-finite state, violated a-priori bound, ...)."""


class StepSizeUnderflow(IntegrationError):
    """Adaptive step-size control shrank the step below the representable limit."""


class ScenarioError(SynclabError):
    """A scenario document is malformed or inconsistent."""
