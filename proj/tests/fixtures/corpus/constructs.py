"""Assorted constructs for the complexity goldens."""

import re
from collections import defaultdict


def empty_with_doc():
    """Nothing here."""


def assign_one(y):
    x = y + 1
    return x


def straight(a, b):
    # a comment line
    total = a * b - a // 2

    total += 3
    return total


def branches(n):
    if n < 0:
        return "neg"
    elif n == 0:
        return "zero"
    elif n < 10 and n % 2 == 0 or n == 11:
        return "small"
    else:
        return "big"


def loops(items):
    out = []
    for i, item in enumerate(items):
        while item > 10:
            item -= 10
        if item not in out:
            out.append(item)
    else:
        out.append(None)
    return out


def comprehensions(rows):
    evens = [r for r in rows if r % 2 == 0 if r]
    pairs = {a: b for a in rows for b in rows if a < b}
    gen = sum(x * x for x in evens)
    return evens, pairs, gen


def guarded(path):
    try:
        with open(path) as fh, open(path + ".bak", "w") as out:
            out.write(fh.read())
    except (OSError, ValueError) as exc:
        raise RuntimeError("copy failed") from exc
    except KeyError:
        pass
    finally:
        del path


def walrus(data):
    if (n := len(data)) > 3:
        return data[1:n:2], data[::-1], data[0]
    return -n if n else ~n


def nested_def(values):
    def helper(v, scale=2):
        return v * scale

    class Box:
        size = 3

    key = lambda item, k=1: item[k]
    return sorted(map(helper, values), key=key), Box.size


def matcher(command):
    match command.split():
        case ["go", direction] if direction in ("north", "south"):
            return direction
        case ["drop", *objects]:
            return objects
        case {"action": action, **rest}:
            return action, rest
        case Point(x=0, y=yy) as p:
            return p, yy
        case "stop" | "halt" | -1:
            return None
        case _:
            return "unknown"


async def fetch_all(client, urls):
    results = defaultdict(list)
    async with client.session() as session:
        async for chunk in session.stream(urls):
            results[chunk.url].append(await chunk.body())
    return {**results, "count": len(results)}


def generator(limit):
    yield 1
    yield from range(limit)
    assert limit is not None, f"bad {limit!r}"


def strings(name):
    pattern = re.compile(r"^[a-z]+$")
    msg = ("hello "
           "world")
    return pattern.match(name) is not None and msg


def imports_inside():
    import os.path as osp
    from json import dumps, loads as parse
    global _CACHE
    return osp.join("a", "b"), dumps, parse


def annotated(x: int) -> int:
    y: int = x << 2
    z: float
    return y | x & 1 ^ 2


def one_liner(x): return x ** 2


class Shape:
    """A shape."""

    sides = 0

    def __init__(self, name, *args, **kwargs):
        self.name = name
        self.extra = dict(*args, **kwargs)

    @property
    def label(self):
        return f"{self.name}:{self.sides}"

    def scaled(self, factor):
        if factor <= 0:
            raise ValueError("factor")
        return [s * factor for s in range(self.sides)]


_CACHE = {}
