"""Shared binary file-format error types."""


class FileFormatError(Exception):
    """Base class for binary artifact format failures."""


class BadMagicError(FileFormatError):
    pass


class VersionMismatchError(FileFormatError):
    pass


class TruncatedFileError(FileFormatError):
    pass
