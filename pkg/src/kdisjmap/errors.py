"""Exception hierarchy.

Every error carries the process exit code the command line uses for it.
"""


class KdisjError(Exception):
    exit_code = 1


class ConfigError(KdisjError, ValueError):
    exit_code = 2


class DataError(KdisjError, ValueError):
    exit_code = 3


class SchemaViolationError(DataError):
    """A record holds a label that the schema does not declare."""

    def __init__(self, row, variable, label):
        self.row = row
        self.variable = variable
        self.label = label
        super().__init__(f"row {row}: unknown modality {label!r} for variable {variable!r}")


class IncompleteRecordError(DataError):
    def __init__(self, row, variable):
        self.row = row
        self.variable = variable
        super().__init__(f"row {row}: missing value for variable {variable!r}")


class EmptyModalityError(DataError):
    def __init__(self, modality):
        self.modality = modality
        super().__init__(f"modality {modality!r} is never chosen (empty column)")


class NumericError(KdisjError, ArithmeticError):
    exit_code = 4


class InvalidUnitError(KdisjError, IndexError):
    pass


class ShapeError(KdisjError, ValueError):
    pass
