"""Exception hierarchy for ftmsim."""


class FtmSimError(Exception):
    """Base class for every error raised by this package."""


# wire
class InvariantViolation(FtmSimError, ValueError):
    pass


class MalformedFrame(FtmSimError, ValueError):
    pass


# phy
class UnsupportedBandwidth(FtmSimError, ValueError):
    pass


class NegativeDistance(FtmSimError, ValueError):
    pass


class NonPositiveDistance(FtmSimError, ValueError):
    pass


# protocol
class ProtocolViolation(FtmSimError):
    pass


class NoResponse(FtmSimError):
    """A frame in the exchange fell below the receiver's sensitivity."""


class ReplayRejected(FtmSimError):
    """Receiver saw a packet number it has already accepted."""


class AuthenticationFailed(FtmSimError):
    """Integrity tag missing or wrong for a protected session."""


class AllFramesDropped(FtmSimError):
    pass


# estimators
class InvalidExponent(FtmSimError, ValueError):
    pass


class EmptySample(FtmSimError, ValueError):
    pass


class DegenerateComparison(FtmSimError, ZeroDivisionError):
    pass


# adversary
class MalformedLog(FtmSimError, ValueError):
    pass


# harness
class ConfigError(FtmSimError):
    """Anything wrong with a scenario config; CLI exit code 2."""


class ParseError(ConfigError):
    pass


class ValidationError(ConfigError, ValueError):
    pass


class UnknownPreset(ConfigError, KeyError):
    def __str__(self):
        return Exception.__str__(self)
