"""Exception hierarchy shared by all modules."""


class KarmaFhnError(Exception):
    """Base class for every error raised by the package."""


class DomainError(KarmaFhnError, ValueError):
    pass


class ConfigError(KarmaFhnError, ValueError):
    pass


class ConditionViolated(KarmaFhnError):
    pass


class IntegrationError(KarmaFhnError):
    """Integration stopped early; ``t`` and ``state`` hold the last valid point."""

    def __init__(self, msg, t=None, state=None):
        super().__init__(msg)
        self.t = t
        self.state = state


class StepSizeUnderflow(IntegrationError):
    pass


class Divergence(IntegrationError):
    pass


class NoCrossing(KarmaFhnError):
    pass


class AnalysisError(KarmaFhnError):
    pass


class ThresholdNotFound(AnalysisError):
    pass


class RegimeAmbiguous(AnalysisError):
    pass


class ScalingInconclusive(AnalysisError):
    pass


class ShootMissed(KarmaFhnError):
    """Shot manifold never reached the section.

    ``turned`` is set when the orbit reversed its E-direction before the
    section; ``extreme_E`` records where that happened.
    """

    def __init__(self, msg, turned=False, extreme_E=None):
        super().__init__(msg)
        self.turned = turned
        self.extreme_E = extreme_E


class RootNotBracketed(KarmaFhnError):
    pass


class ContinuationError(KarmaFhnError):
    def __init__(self, msg, partial=None, index=None):
        super().__init__(msg)
        self.partial = partial if partial is not None else []
        self.index = index


class CertificationFailed(KarmaFhnError):
    pass


class AssemblyInfeasible(KarmaFhnError):
    pass


class GeometryError(KarmaFhnError, ValueError):
    pass


class BlowUpError(KarmaFhnError):
    def __init__(self, msg, time=None):
        super().__init__(msg)
        self.time = time


class WaveLost(KarmaFhnError):
    pass
