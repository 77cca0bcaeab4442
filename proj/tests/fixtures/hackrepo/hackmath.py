def _scale(x):
    return x * 2


def double(x):
    return _scale(x)


def triple(x):
    return x + x + x
