"""Figure renderers for the hexmvop CSV artifacts."""

__version__ = "0.1.0"

from .render import RENDERERS, SchemaError, render  # noqa: F401
