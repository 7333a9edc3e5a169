"""Exceptions raised by the join tensor library.

Every error carries the process exit code the command line driver reports
for it: 1 verification failure, 2 bad spec (default), 3 guard exceeded.
"""


class JoinTensorError(Exception):
    exit_code = 2


class BadSpec(JoinTensorError, ValueError):
    pass


class NotASemilattice(JoinTensorError, ValueError):
    pass


class NotAPartialOrder(JoinTensorError, ValueError):
    pass


class UnknownElement(JoinTensorError, KeyError):

    def __str__(self):
        # KeyError quotes its argument otherwise
        return Exception.__str__(self)


class MissingValuation(JoinTensorError, KeyError):

    def __str__(self):
        return Exception.__str__(self)


class BadIndex(JoinTensorError, IndexError):
    pass


class BadShape(JoinTensorError, ValueError):
    pass


class BadSplit(JoinTensorError, ValueError):
    pass


class BadValue(JoinTensorError, ValueError):
    pass


class BadOrder(JoinTensorError, ValueError):
    pass


class ModeMismatch(JoinTensorError, TypeError):
    pass


class NotSymmetric(JoinTensorError, ValueError):
    pass


class NotPositive(JoinTensorError, ValueError):
    pass


class OddOrder(JoinTensorError, ValueError):
    pass


class TooLarge(JoinTensorError):
    exit_code = 3


class VerificationFailure(JoinTensorError):
    exit_code = 1


class BoundViolation(VerificationFailure):
    pass
