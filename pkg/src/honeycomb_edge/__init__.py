"""Edge states of rationally terminated honeycomb tight-binding lattices."""

__version__ = "0.1.0"
