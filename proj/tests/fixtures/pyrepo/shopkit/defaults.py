"""Store-wide defaults computed at import time."""

from .text import parse_config, slugify

_DEFAULTS_TEXT = """
[store]
name = Corner Shop
currency = USD
[limits]
max_lines = 50
max_qty = 500
"""


def build_defaults():
    """Parse the embedded defaults and derive the store slug."""
    config = parse_config(_DEFAULTS_TEXT)
    limits = {k: int(v) for k, v in config["limits"].items()}
    store = dict(config["store"])
    store["slug"] = slugify(store["name"])
    return {"store": store, "limits": limits}


DEFAULTS = build_defaults()
