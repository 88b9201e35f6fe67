"""Exception types shared across the package."""


class HeadroomError(ValueError):
    """A query needs primes beyond the table's limit."""


class EnumerationCapError(RuntimeError):
    """An exact-enumeration request exceeds the configured cost cap."""


class DivisorCapacityError(RuntimeError):
    """An integer in a sweep segment exceeded the fixed per-integer divisor capacity."""


class CacheFormatError(ValueError):
    """A prime-table cache file is malformed or has an unsupported version."""
