"""Small retail toolkit used as an analysis fixture."""

__version__ = "0.3.1"
