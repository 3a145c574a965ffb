"""Exception hierarchy.

Every error carries an ``exit_code`` matching the CLI contract:
1 verification failed, 2 input error, 3 unsupported input, 4 resource cap.
"""


class PPCertError(Exception):
    exit_code = 1


class VerificationFailed(PPCertError):
    exit_code = 1


class InputError(PPCertError):
    exit_code = 2


class UnsupportedInput(PPCertError):
    exit_code = 3


class ResourceCapExceeded(PPCertError):
    exit_code = 4


# exactnum
class NotSquarefree(InputError):
    pass


class UnsupportedField(UnsupportedInput):
    pass


# matqz
class NotDiagonalizable(UnsupportedInput):
    pass


class NotPrimitive(InputError):
    pass


class Singular(InputError):
    pass


# projdyn
class NotProximal(VerificationFailed):
    pass


class SourceTouchesRepelling(VerificationFailed):
    pass


class PowerCapExceeded(ResourceCapExceeded):
    pass


# pingpong
class WitnessInC(VerificationFailed):
    pass


class WitnessesCollide(VerificationFailed):
    pass


class ContainmentFails(VerificationFailed):
    pass


class CoverageGap(VerificationFailed):
    def __init__(self, message, word=()):
        super().__init__(message)
        self.word = tuple(word)


class NormalFormCollapse(VerificationFailed):
    pass


class IncompleteChecks(VerificationFailed):
    pass


# groupcheck
class NoOrder3Element(InputError):
    pass


class NotPrime(InputError):
    pass


class TooLarge(ResourceCapExceeded):
    pass


# gl3z
class NotOrderThree(InputError):
    pass


class NoIntegerFixedVector(VerificationFailed):
    pass


class ClosureFails(VerificationFailed):
    pass


class BoundCapExceeded(ResourceCapExceeded):
    pass


# scenarios
class SearchExhausted(ResourceCapExceeded):
    pass


class ParseError(InputError):
    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)
        self.line = line
        self.column = column


class IoFailure(InputError):
    pass
