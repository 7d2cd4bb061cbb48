"""Exception hierarchy shared across the package."""


class TopomolError(Exception):
    """Base class for all package-specific errors."""


class SmilesSyntaxError(TopomolError):
    """Malformed SMILES text: bad token, unmatched ring closure or parenthesis."""


class ValenceError(TopomolError):
    """An atom exceeds its permitted valence after hydrogen assignment."""


class KekulizationError(TopomolError):
    """No alternating single/double assignment exists for an aromatic system."""


class DisconnectedError(TopomolError):
    """The molecular graph has more than one fragment."""


class DomainError(TopomolError):
    """A numeric argument is outside its mathematical domain."""


class ShapeError(TopomolError):
    """Array or matrix dimensions do not match the expected layout."""


class ConfigError(TopomolError):
    """Invalid, contradictory, or unknown configuration values."""


class LengthMismatch(TopomolError):
    """Two bit vectors of different lengths were combined."""


class UnclassifiedAtom(TopomolError):
    """An atom context is missing from the shipped contribution table."""


class InvalidAction(TopomolError):
    """An action failed revalidation against the state it was applied to."""


class NumericalError(TopomolError):
    """A loss or parameter became non-finite during training."""
