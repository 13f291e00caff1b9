"""Exception hierarchy shared by every palette module."""


class PaletteError(Exception):
    """Base class for all errors raised by this package."""


class InvalidWeight(PaletteError, ValueError):
    pass


class InvalidProbability(PaletteError, ValueError):
    pass


class UnknownToken(PaletteError, KeyError):
    def __init__(self, token, where=None):
        self.token = token
        msg = f"unknown token {token!r}"
        if where:
            msg += f" ({where})"
        super().__init__(msg)

    def __str__(self):
        return self.args[0]


class VocabMismatch(PaletteError, ValueError):
    pass


class DegenerateModel(PaletteError, ValueError):
    pass


class DegenerateProduct(PaletteError, ValueError):
    pass


class DegenerateInstance(PaletteError, ValueError):
    pass


class InvalidScenario(PaletteError, ValueError):
    pass


class EmptySequence(PaletteError, ValueError):
    pass


class EmptyReport(PaletteError, ValueError):
    pass


class ConfigError(PaletteError, ValueError):
    pass


class TransportError(PaletteError, OSError):
    """The remote endpoint could not be reached or timed out."""


class SchemaMismatch(PaletteError, ValueError):
    """The remote response did not have one entry per vocabulary token."""


class InvalidResponse(PaletteError, ValueError):
    """The remote response was malformed or contained non-finite values."""


class GenerationError(PaletteError):
    """A provider failed during decoding; ``step`` is the failing step index."""

    def __init__(self, step, cause):
        self.step = step
        self.cause = cause
        super().__init__(f"generation failed at step {step}: {cause}")
