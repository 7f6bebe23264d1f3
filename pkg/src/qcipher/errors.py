"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: input/key problems are usage errors,
integrity errors signal tampering or a wrong key, resource errors signal
register or keyspace size caps.
"""


class CipherError(Exception):
    """Base class for all package errors."""


class InputError(CipherError, ValueError):
    """Malformed arguments, files, or violated preconditions."""


class InvalidKeyError(CipherError, ValueError):
    """A key object or key file violates its structural invariants."""


class IntegrityError(CipherError):
    """Decryption evidence of tampering, corruption, or a wrong key."""


class ResourceError(CipherError):
    """A size cap was exceeded (register width, keyspace enumeration)."""
