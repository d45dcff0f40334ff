"""Sound, order-optimal symbolic bounds for non-linear arithmetic with floor and reciprocal."""

__version__ = "0.1.0"
