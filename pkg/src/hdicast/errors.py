"""Exception types raised across the pipeline."""


class HdicastError(Exception):
    """Base class for all pipeline errors."""


class MalformedRow(HdicastError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no


class DuplicateCell(HdicastError):
    pass


class MissingTarget(HdicastError):
    pass


class NonPositiveInput(HdicastError):
    pass


class TooShort(HdicastError):
    pass


class UnknownIndicator(HdicastError):
    pass


class EmptyDesign(HdicastError):
    pass


class NegativeEpsilon(HdicastError):
    pass


class NoCandidates(HdicastError):
    pass


class DegenerateLeaf(HdicastError):
    pass


class ColumnMismatch(HdicastError):
    pass


class LengthMismatch(HdicastError):
    pass


class ZeroActual(HdicastError):
    pass


class DegenerateSplit(HdicastError):
    pass


class InsufficientYears(HdicastError):
    pass


class RankDeficient(HdicastError):
    pass


class InsufficientData(HdicastError):
    pass


class ConfigError(HdicastError):
    pass
