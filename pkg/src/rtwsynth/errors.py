"""Exception hierarchy for the synthesis engine."""


class EngineError(Exception):
    """Base class for all engine errors."""


class MapFormatError(EngineError):
    """A map file violates the RTWMAP1 binary format.

    ``offset`` is the byte offset at which the problem was detected.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class BadMagic(MapFormatError):
    pass


class DimensionOverflow(MapFormatError):
    pass


class BadChannelCount(MapFormatError):
    pass


class TruncatedFile(MapFormatError):
    pass


class NonFiniteSample(MapFormatError):
    pass


class IoFailure(EngineError):
    pass


class WrongChannelCount(EngineError):
    pass


class ThresholdOutOfRange(EngineError):
    pass


class EmptyCorpus(EngineError):
    pass


class MalformedUtf8(EngineError):
    def __init__(self, path, line_number: int):
        super().__init__(f"{path}: not valid UTF-8 at line {line_number}")
        self.line_number = line_number


class NoUsableFonts(EngineError):
    pass


class UnsupportedGlyph(EngineError):
    pass


class DegenerateRegion(EngineError):
    pass


class NumericallySingular(EngineError):
    pass


class EmptyDomain(EngineError):
    pass


class DidNotConverge(EngineError):
    """Raised only when the caller asks for strict convergence; the solver
    normally returns its best iterate plus a flag instead."""


class MissingMap(EngineError):
    def __init__(self, kind: str, path):
        super().__init__(f"missing {kind} map: {path}")
        self.kind = kind


class CorruptInput(EngineError):
    def __init__(self, path, cause: Exception):
        super().__init__(f"corrupt input {path}: {cause}")
        self.path = path
        self.cause = cause


class MissingFile(EngineError):
    pass


class BadConfig(EngineError):
    pass
