"""Exception hierarchy for the strategos package.

Every error raised on purpose anywhere in the package derives from
StrategosError, so callers can catch one type at the boundary.
"""


class StrategosError(Exception):
    """Base class for all package errors."""


# --- game construction -------------------------------------------------------

class GameError(StrategosError):
    pass


class DuplicateAction(GameError):
    pass


class MissingProfile(GameError):
    pass


class LengthMismatch(GameError):
    pass


class DaxityNeedsTwoPlayers(GameError):
    pass


class NonTerminalPath(GameError):
    pass


class CycleDetected(GameError):
    pass


# --- oracle -------------------------------------------------------------------

class OracleError(StrategosError):
    pass


class EmptySupport(OracleError):
    pass


class EnumerationTooLarge(OracleError):
    """Fair-deal enumeration would exceed the configured guard."""


# --- prompt compiler ----------------------------------------------------------

class CompilerError(StrategosError):
    pass


class UnsolvableInput(CompilerError):
    pass


class UnsupportedFamily(CompilerError):
    pass


class NumTriesZero(CompilerError):
    pass


class SessionFinished(CompilerError):
    pass


# --- tool DSL -------------------------------------------------------------------

class DslError(StrategosError):
    pass


class ParseError(DslError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class UnknownTool(DslError):
    pass


class ArityMismatch(DslError):
    pass


class DivergentBackend(DslError):
    """A search sub-context produced something that is not a number."""


class DepthExceeded(DslError):
    pass


class BudgetExhausted(DslError):
    pass


class MaxToolCallsExceeded(DslError):
    pass


# --- gateway --------------------------------------------------------------------

class GatewayError(StrategosError):
    pass


class ProviderError(GatewayError):
    def __init__(self, status: int, body: str):
        super().__init__(f"provider returned {status}: {body[:200]}")
        self.status = status
        self.body = body


class ReplayMiss(GatewayError):
    pass


class CorruptTranscript(GatewayError):
    pass


class NoValidAction(GatewayError):
    pass


# --- negotiation -----------------------------------------------------------------

class NegotiationError(StrategosError):
    pass


class NotYourTurn(NegotiationError):
    pass


class OverAllocation(NegotiationError):
    pass


class SessionClosed(NegotiationError):
    pass


class NoOfferToAccept(NegotiationError):
    pass


class EmptyPot(NegotiationError):
    pass


class CountMismatch(NegotiationError):
    pass


class MalformedLine(NegotiationError):
    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


# --- harness ---------------------------------------------------------------------

class HarnessError(StrategosError):
    pass


class UnknownFamily(HarnessError):
    pass


class ContextWithoutProposal(HarnessError):
    pass
