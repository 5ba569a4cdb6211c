"""Exception hierarchy shared by all tropica modules."""


class TropicaError(Exception):
    """Base class; the CLI maps these to exit code 1."""


# tropical core
class NotIdempotent(TropicaError):
    pass


class NotAMonoid(TropicaError):
    pass


class Unsupported(TropicaError):
    pass


class DomainMismatch(TropicaError):
    pass


class DimensionMismatch(TropicaError):
    pass


class NotTotallyOrdered(TropicaError):
    pass


class NotHomomorphism(TropicaError):
    pass


# filters
class EmptyFamily(TropicaError):
    pass


class NotABase(TropicaError):
    def __init__(self, msg, pair=None):
        super().__init__(msg)
        self.pair = pair


class NotAProperFilter(TropicaError):
    pass


class NotAFilter(TropicaError):
    pass


# ultrametrics
class ShapeError(TropicaError):
    pass


class NegativeDistance(TropicaError):
    pass


class NotUltrametric(TropicaError):
    pass


class CoverageError(TropicaError):
    pass


class MonotonicityError(TropicaError):
    pass


class DegenerateDistance(TropicaError):
    def __init__(self, msg, pair=None):
        super().__init__(msg)
        self.pair = pair


class UnknownPoint(TropicaError):
    pass


class NonPositiveInput(TropicaError):
    pass


class NotPrime(TropicaError):
    pass


class CapacityError(TropicaError):
    pass


# nesting
class DigitRange(TropicaError):
    pass


class GridTooCoarse(TropicaError):
    pass


# thermo / dequantify
class ZeroTemperature(TropicaError):
    pass


class NonpositiveTemperature(TropicaError):
    pass


class NotAMinimizer(TropicaError):
    pass


class NotDisjoint(TropicaError):
    pass


# amoeba
class SizeMismatch(TropicaError):
    pass


class TooLarge(TropicaError):
    pass


class NotAnIdeal(TropicaError):
    pass
