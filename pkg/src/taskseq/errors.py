"""Exception types raised across the package."""

from __future__ import annotations


class TaskSeqError(Exception):
    """Base class for every error raised by taskseq."""


class ChromaticityError(TaskSeqError, ValueError):
    def __init__(self, pid, simplex=None):
        self.pid = pid
        self.simplex = simplex
        super().__init__(f"pid {pid!r} appears twice in simplex {simplex!r}")


class EmptyPidsError(TaskSeqError, ValueError):
    pass


class InvalidParameter(TaskSeqError, ValueError):
    pass


class InvalidAdaptiveBound(InvalidParameter):
    pass


class CarrierError(TaskSeqError, KeyError):
    """Carrier lookup on a simplex that is not in the input complex."""


class PreconditionError(TaskSeqError):
    """An invocation is not enabled in the current object state."""


class NondeterminismError(TaskSeqError):
    """Two branches of one transition share a response but not a next state."""


class WellFormednessError(TaskSeqError, ValueError):
    def __init__(self, index: int, reason: str):
        self.index = index
        self.reason = reason
        super().__init__(f"event {index}: {reason}")


class UnknownInputVertex(TaskSeqError, ValueError):
    pass


class ExplosionError(TaskSeqError, RuntimeError):
    def __init__(self, count: int, cap: int, what: str = "states"):
        self.count = count
        self.cap = cap
        super().__init__(f"{what} exceeded cap: {count} > {cap}")


class SchemaError(TaskSeqError, ValueError):
    def __init__(self, message: str, pointer: str = ""):
        self.pointer = pointer
        super().__init__(f"{pointer or '/'}: {message}")
