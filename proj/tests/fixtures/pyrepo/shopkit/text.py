"""Text helpers."""

import re

_SECTION = re.compile(r"^\[(?P<name>[a-z_]+)\]$")


def normalize_sku(raw):
    """Upper-case a SKU and strip separators."""
    cleaned = raw.strip().upper()
    return cleaned.replace("-", "").replace(" ", "")


def slugify(name, sep="-"):
    """Turn a product name into a URL slug."""
    words = [w for w in re.split(r"[^a-zA-Z0-9]+", name.lower()) if w]
    return sep.join(words)


def parse_config(text):
    """Parse an INI-like configuration blob.

    Returns a mapping of section name to a dict of key/value pairs.
    """
    result = {}
    section = "default"
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        # skip blanks and comments
        if not line or line.startswith("#"):
            continue
        match = _SECTION.match(line)
        if match:
            section = match.group("name")
            result.setdefault(section, {})
        elif "=" in line:
            key, value = line.split("=", 1)
            result.setdefault(section, {})[key.strip()] = value.strip()
        else:
            raise ValueError(f"line {lineno}: cannot parse {line!r}")
    return result


def format_money(cents, symbol="$"):
    sign = "-" if cents < 0 else ""
    cents = abs(cents)
    return f"{sign}{symbol}{cents // 100}.{cents % 100:02d}"
