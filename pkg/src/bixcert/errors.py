"""Exception hierarchy shared by every bixcert module."""


class BixError(Exception):
    """Base class for all library errors."""


class SchemeError(BixError):
    """Unknown hash or signature identifier."""


class ParameterError(BixError):
    """Degenerate or inconsistent curve parameters."""


class SigningError(BixError):
    """Signing gave up after exhausting its nonce budget."""


class EncodingError(BixError, ValueError):
    """A value cannot be encoded, or bytes cannot be decoded."""


class ChainFormatError(BixError):
    """Base for chain file parse failures."""


class BadMagicError(ChainFormatError):
    pass


class UnsupportedVersionError(ChainFormatError):
    pass


class TruncatedChainError(ChainFormatError):
    pass


class UnknownSchemeIdError(ChainFormatError, SchemeError):
    pass


class AppendError(BixError):
    """A chain extension violates a linkage or form invariant."""


class IncomparableChainsError(BixError):
    """Fork detection was asked to compare chains with different roots."""


class ProtocolError(BixError):
    """A party was asked to do something its state does not allow."""


class ProtocolAbort(BixError):
    """A newcomer rejected an issuer's offer; nothing was broadcast."""


class ScriptError(BixError):
    """A simulation script failed validation."""


class GamePreconditionError(BixError, ValueError):
    """An adversary game was set up outside its allowed parameters."""
