def add(a, b):
    return a + b


def clamp(x, lo, hi):
    """Clamp x into [lo, hi]."""
    if x < lo:
        return lo
    if x > hi:
        return hi
    return x


def gcd(a, b):
    while b:
        a, b = b, a % b
    return abs(a)
