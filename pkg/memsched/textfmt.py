"""
Tokenizer shared by the SFG, mapping, config and schedule dump formats.

All formats are UTF-8, line oriented, with '#' starting a comment.
"""

from .errors import ParseError


def iter_lines(text):
    """
    Yield the meaningful lines of a text file.

    Args:
        text (str): File contents

    Returns:
        iterator of (line number, list of whitespace separated words)
    """
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def parse_fields(words, lineno, allowed, required=()):
    """
    Parse `key=value` words, rejecting unknown or repeated keys (strict mode).

    Args:
        words (list): The `key=value` words of one line
        lineno (int): Line number used in diagnostics
        allowed (iterable): Keys that may appear
        required (iterable): Keys that must appear

    Returns:
        dict: key -> raw string value
    """
    fields = {}
    for word in words:
        key, sep, value = word.partition("=")
        if not sep or not key or not value:
            raise ParseError(f"expected key=value, got '{word}'", line=lineno)
        if key not in allowed:
            raise ParseError(f"unknown key '{key}'", line=lineno)
        if key in fields:
            raise ParseError(f"duplicate key '{key}'", line=lineno)
        fields[key] = value

    for key in required:
        if key not in fields:
            raise ParseError(f"missing key '{key}'", line=lineno)
    return fields


def parse_int(value, lineno, key, minimum=None):
    """Convert a field to int, enforcing an optional lower bound."""
    try:
        number = int(value)
    except ValueError:
        raise ParseError(f"'{key}' must be an integer, got '{value}'", line=lineno) from None
    if minimum is not None and number < minimum:
        raise ParseError(f"'{key}' must be >= {minimum}, got {number}", line=lineno)
    return number
