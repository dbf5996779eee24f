"""Exception hierarchy shared by every stage of the pipeline.

Each class carries the process exit code used by the command-line front end.
"""


class FPCoeffsError(Exception):
    exit_code = 1


class BadParameter(FPCoeffsError, ValueError):
    exit_code = 2


class NonNormalizable(BadParameter):
    pass


class MeshMismatch(BadParameter):
    pass


class AssemblyFailure(FPCoeffsError):
    exit_code = 2


class TunnellingCollapse(FPCoeffsError):
    """The zero mode and the first excited mode cannot be told apart."""

    exit_code = 3


class DivisionHazard(TunnellingCollapse):
    pass


class NoConvergence(FPCoeffsError):
    exit_code = 4


class FactorizationFailure(NoConvergence):
    pass


class NonConvergentQuadrature(NoConvergence):
    pass


class IoFailure(FPCoeffsError, OSError):
    exit_code = 5
