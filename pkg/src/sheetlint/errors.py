"""Common exception base for the package."""


class SheetLintError(Exception):
    """Base class for every error raised by sheetlint."""
