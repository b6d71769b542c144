"""Exceptions raised by the batch-voting library."""


class BatchVoteError(Exception):
    """Base class for every error raised by batchvote."""


class OutOfRange(BatchVoteError, ValueError):
    """A model parameter lies outside its admissible range."""

    def __init__(self, field: str, value: object = None, detail: str = ""):
        self.field = field
        self.value = value
        msg = f"{field} out of range: {value!r}"
        if detail:
            msg = f"{msg} ({detail})"
        super().__init__(msg)


class DomainError(BatchVoteError, ValueError):
    """An operation was called outside its precondition (even K, y off support, ...)."""


class SearchExhausted(BatchVoteError):
    """The optimal batch-size search hit the K_max cap."""

    def __init__(self, k_max: int):
        self.k_max = k_max
        super().__init__(f"batch-size search exhausted at K_max={k_max}")


class InsufficientSignals(BatchVoteError, ValueError):
    """Fewer signals were supplied than the mechanism needs."""

    def __init__(self, needed: int, got: int):
        self.needed = needed
        self.got = got
        super().__init__(f"need {needed} signals, got {got}")


class CostGuard(BatchVoteError):
    """An exhaustive enumeration was requested beyond its size cap."""

    def __init__(self, limit: int, requested: int):
        self.limit = limit
        self.requested = requested
        super().__init__(f"enumeration over {requested} agents exceeds cap {limit}")
