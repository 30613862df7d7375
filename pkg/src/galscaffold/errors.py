"""Exception hierarchy.

Every error carries a short ``code`` used by the CLI's machine-readable
error records.
"""


class ScaffoldError(Exception):
    code = "Error"
    module = "galscaffold"

    def record(self) -> dict:
        return {"code": self.code, "module": self.module, "detail": str(self)}


class NonzeroUndetectable(ScaffoldError, ArithmeticError):
    """A series is zero to its working precision, so its valuation is unknown."""

    code = "NonzeroUndetectable"
    module = "base_field"


class PrecisionLoss(ScaffoldError, ArithmeticError):
    code = "PrecisionLoss"
    module = "tower"

    def __init__(self, message: str, suggested_precision: int | None = None):
        if suggested_precision is not None:
            message = f"{message}; retry with --precision {suggested_precision}"
        super().__init__(message)
        self.suggested_precision = suggested_precision


class DivisionByZero(ScaffoldError, ZeroDivisionError):
    code = "DivisionByZero"
    module = "base_field"


class NoSolution(ScaffoldError, ValueError):
    code = "NoSolution"
    module = "base_field"


class InvalidSpec(ScaffoldError, ValueError):
    """A tower spec violates one of the defining conditions.

    ``clause`` names the violated condition (``gcd``, ``omega0``,
    ``ordering``, ``independence``, ``epsilon0``, ``epsilon-size``, ...).
    """

    code = "InvalidSpec"
    module = "tower"

    def __init__(self, clause: str, message: str):
        super().__init__(f"[{clause}] {message}")
        self.clause = clause


class NotOneUnit(ScaffoldError, ValueError):
    code = "NotOneUnit"
    module = "group_algebra"


class LemmaViolation(ScaffoldError, AssertionError):
    code = "LemmaViolation"
    module = "scaffold"

    def __init__(self, which: str, i: int, j: int | None = None, detail: str = ""):
        where = f"i={i}" if j is None else f"i={i}, j={j}"
        super().__init__(f"{which} fails at {where}: {detail}".rstrip(": "))
        self.which, self.i, self.j = which, i, j


class AssumptionFailed(ScaffoldError, AssertionError):
    code = "AssumptionFailed"
    module = "scaffold"

    def __init__(self, i: int, j: int, detail: str):
        super().__init__(f"(sigma_{i} - 1) X_{j} fails: {detail}")
        self.i, self.j = i, j


class Mismatch(ScaffoldError, AssertionError):
    code = "Mismatch"
    module = "scaffold"

    def __init__(self, a, expected, got):
        super().__init__(f"row a={tuple(a)}: predicted valuation {expected}, oracle gave {got}")
        self.a, self.expected, self.got = tuple(a), expected, got


class BoundViolated(ScaffoldError, ValueError):
    code = "BoundViolated"
    module = "ramification"

    def __init__(self, i: int, detail: str):
        super().__init__(f"error term epsilon_{i}: {detail}")
        self.i = i


class IdentityFailed(ScaffoldError, AssertionError):
    code = "IdentityFailed"
    module = "examples"


class InvalidInput(ScaffoldError, ValueError):
    code = "InvalidInput"
    module = "examples"
