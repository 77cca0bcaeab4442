"""Identifier validation."""

from .text import normalize_sku


def checksum(code):
    """Weighted mod-97 checksum over the characters of ``code``."""
    total = 0
    for index, char in enumerate(code):
        weight = 3 if index % 2 == 0 else 7
        total = (total + weight * ord(char)) % 97
    return total


def with_check_digits(code):
    """Append two check digits to a normalized code."""
    body = normalize_sku(code)
    return f"{body}{checksum(body):02d}"


def validate_sku(sku):
    """Return True when the trailing two digits match the checksum."""
    sku = normalize_sku(sku)
    if len(sku) < 3 or not sku[-2:].isdigit():
        return False
    body, digits = sku[:-2], int(sku[-2:])
    return checksum(body) == digits


def is_valid_quantity(qty):
    return isinstance(qty, int) and not isinstance(qty, bool) and 0 < qty <= 10_000
