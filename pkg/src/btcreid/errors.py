"""Exception hierarchy shared by every stage of the pipeline.

Everything deriving from :class:`DataError` signals bad input data (exit code 1
at the command line); :class:`UsageError` signals a bad request (exit code 2).
"""


class ReidError(Exception):
    """Base class for all errors raised by btcreid."""


class DataError(ReidError):
    pass


class UsageError(ReidError):
    pass


class MalformedRecord(DataError):
    def __init__(self, line, reason):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class ConservationViolation(DataError):
    def __init__(self, index, inputs, outputs, fee):
        self.index = index
        super().__init__(
            f"transaction {index}: inputs sum to {inputs} but outputs + fee = {outputs} + {fee}"
        )


class DanglingInput(DataError):
    def __init__(self, index, address):
        self.index = index
        self.address = address
        super().__init__(f"transaction {index}: input address {address!r} was never emitted earlier")


class UniverseMismatch(DataError):
    def __init__(self, difference):
        self.difference = frozenset(difference)
        shown = sorted(map(str, self.difference))
        tail = "" if len(shown) <= 10 else f" ... ({len(shown)} total)"
        super().__init__("partitions cover different elements: " + ", ".join(shown[:10]) + tail)


class InvalidPartition(DataError):
    pass


class EmptyGraph(DataError):
    pass


class EmptyOverlap(DataError):
    pass


class LevelOutOfRange(UsageError):
    def __init__(self, level, depth):
        self.level = level
        self.depth = depth
        super().__init__(f"level {level} requested but the dendrogram has {depth} level(s)")


class InfeasibleConfig(DataError):
    pass


class IoFailure(ReidError):
    pass
