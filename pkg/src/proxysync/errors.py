"""Exception hierarchy shared across the package."""


class ProxySyncError(Exception):
    """Base class for every error raised by proxysync."""


# geometry
class NonCardinalRotation(ProxySyncError):
    pass


class EmptyRoomSet(ProxySyncError):
    pass


class BadTileIndex(ProxySyncError):
    pass


# proxy
class CommandOutOfLimits(ProxySyncError):
    pass


# mapping
class UnboundObject(ProxySyncError):
    pass


class MissingRoomProxy(ProxySyncError):
    pass


class EmptyPool(ProxySyncError):
    pass


class OracleTooLarge(ProxySyncError):
    def __init__(self, message: str, bound: int):
        super().__init__(message)
        self.bound = bound


# gesture
class DegenerateAxis(ProxySyncError):
    pass


# sync / codec
class CodecError(ProxySyncError):
    pass


class BadMagic(CodecError):
    pass


class UnknownVersion(CodecError):
    pass


class TruncatedBody(CodecError):
    pass


class MalformedBody(CodecError):
    pass


class Underflow(ProxySyncError):
    pass


# scenarios
class CellOccupied(ProxySyncError):
    pass


class OutOfTurn(ProxySyncError):
    pass


class ScriptValidation(ProxySyncError):
    """Invalid scenario script. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")
