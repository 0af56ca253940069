"""Exception types shared across the package."""


class IdempotentError(Exception):
    """Base class for every error raised by this package."""


class OrderLimitExceeded(IdempotentError):
    pass


class IllFormedHomomorphism(IdempotentError):
    pass


class GroupMismatch(IdempotentError):
    pass


class NotAlmostInteger(IdempotentError):
    def __init__(self, element, deviation):
        super().__init__(f"element {element} deviates by {deviation:.6g} from the nearest integer")
        self.element = element
        self.deviation = deviation


class EmptyCoveringSet(IdempotentError):
    pass


class SearchBudgetExceeded(IdempotentError):
    pass


class ZeroNotInT(IdempotentError):
    pass


class EtaOutOfRange(IdempotentError):
    pass


class LambdaOutOfRange(IdempotentError):
    pass


class NullSet(IdempotentError):
    pass


class NotProbability(IdempotentError):
    pass


class HypothesisViolated(IdempotentError):
    pass


class NoKappaFound(IdempotentError):
    pass


class ZeroFunction(IdempotentError):
    pass


class CertificateMissing(IdempotentError):
    pass


class IterationBudgetExceeded(IdempotentError):
    pass


class NotSymmetric(IdempotentError):
    pass


class InvariantBroken(IdempotentError):
    pass


class InclusionFailed(IdempotentError):
    pass


class BudgetExceeded(IdempotentError):
    pass


class NotConnected(IdempotentError):
    pass


class EpsilonTooLarge(IdempotentError):
    pass


class ClaimFailed(IdempotentError):
    def __init__(self, claim, detail=""):
        super().__init__(f"claim {claim!r} failed {detail}".strip())
        self.claim = claim


class RoundBudgetExceeded(IdempotentError):
    pass


class Infeasible(IdempotentError):
    pass


class SamplingFailed(IdempotentError):
    pass
