"""Meta-path based collective classification on heterogeneous networks."""

__version__ = "0.1.0"
