"""Exception hierarchy shared by all pipeline stages."""


class SrlHopError(Exception):
    """Base class for every error raised by this package."""


class MalformedRecord(SrlHopError):
    pass


class DanglingSupportingFact(SrlHopError):
    pass


class SpanOutOfRange(SrlHopError):
    pass


class UnknownSentenceRef(SrlHopError):
    pass


class EmptyPhrase(SrlHopError):
    pass


class EmptyLeftSequence(SrlHopError):
    pass


class EmptySequence(SrlHopError):
    pass


class TooFewParagraphs(SrlHopError):
    pass


class BadMask(SrlHopError):
    pass


class ShapeMismatch(SrlHopError):
    pass


class UnknownNode(SrlHopError):
    pass


class NoNeighbors(SrlHopError):
    pass


class GoldPathDisconnected(SrlHopError):
    pass


class LengthMismatch(SrlHopError):
    pass


class GoldSpanOutOfRange(SrlHopError):
    pass


class NonFiniteLoss(SrlHopError):
    pass


class AuditFailure(SrlHopError):
    def __init__(self, message, ids=()):
        super().__init__(message)
        self.ids = list(ids)


class ConfigError(SrlHopError):
    pass
