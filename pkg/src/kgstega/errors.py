"""Exception types shared across the package.

CLI diagnostics print the class name verbatim (``ERROR <Name>: <detail>``),
so class names are part of the observable contract.
"""


class KgStegaError(Exception):
    """Base class for all errors raised by this package."""


# --- graph loading / validation ---------------------------------------------

class MalformedLine(KgStegaError):
    def __init__(self, source: str, line_no: int, reason: str):
        super().__init__(f"{source} line {line_no}: {reason}")
        self.source = source
        self.line_no = line_no
        self.reason = reason


class DuplicateId(KgStegaError):
    pass


class DuplicateLabel(KgStegaError):
    pass


class DuplicateEdge(KgStegaError):
    pass


class UnknownEndpoint(KgStegaError):
    pass


class NonPositiveWeight(KgStegaError):
    pass


class LevelViolation(KgStegaError):
    def __init__(self, src: int, dst: int, detail: str = ""):
        super().__init__(f"edge {src}->{dst} does not strictly descend{detail}")
        self.src = src
        self.dst = dst


class UnknownNode(KgStegaError):
    pass


class EmptyViableGraph(KgStegaError):
    pass


# --- path codec ---------------------------------------------------------------

class NoViableEdges(KgStegaError):
    pass


class PinUnreachable(KgStegaError):
    def __init__(self, level: int, label: str, detail: str = ""):
        super().__init__(f"pin {level}:{label} unreachable{': ' + detail if detail else ''}")
        self.level = level
        self.label = label


class PinMismatch(KgStegaError):
    pass


class EdgeNotInGraph(KgStegaError):
    pass


class PayloadTooLarge(KgStegaError):
    pass


class TruncatedStream(KgStegaError):
    pass


class ZeroCapacityGraph(KgStegaError):
    pass


# --- realizer -----------------------------------------------------------------

class NoTemplateForArity(KgStegaError):
    pass


class CoverageExhausted(KgStegaError):
    def __init__(self, attempts: int):
        super().__init__(f"no candidate covered all labels after {attempts} attempts")
        self.attempts = attempts


class GeneratorFailed(KgStegaError):
    pass


# --- extractor ----------------------------------------------------------------

class NoPathFound(KgStegaError):
    pass


class AmbiguousMatch(KgStegaError):
    pass


class UnknownSentence(KgStegaError):
    pass


# --- metrics ------------------------------------------------------------------

class EmptyCorpus(KgStegaError):
    pass


class EmptySentence(KgStegaError):
    pass


class LengthMismatch(KgStegaError):
    pass


class EmptyReference(KgStegaError):
    pass


class EmptyInput(KgStegaError):
    pass

# --- keys -----------------------------------------------------------------------

class InvalidKey(KgStegaError):
    pass
