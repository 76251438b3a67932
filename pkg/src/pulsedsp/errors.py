"""Exception taxonomy shared by the library and the command line tool.

The split mirrors the process exit codes: malformed input files raise
:class:`FormatError` (exit 2), formulas leaving their numeric domain raise
:class:`NumericDomainError` (exit 3), and violated call contracts raise
:class:`PreconditionError` (exit 4).
"""


class PulseError(Exception):
    """Base class for all library errors."""


class FormatError(PulseError):
    """A train or signal file does not match the documented text format."""


class NumericDomainError(PulseError):
    """A formula left its numeric domain.

    Raised for the leak ceiling (a constant input can never reach the
    threshold), non-positive logarithm arguments in emission timing, and
    degenerate metric inputs (zero amplitude range, constant sequences).
    """


class PreconditionError(PulseError):
    """The caller violated an operation precondition."""
