"""Deep linear networks as implicit preconditioners of gradient descent."""

__version__ = "0.1.0"
