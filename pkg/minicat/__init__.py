"""Mini-categories from retail co-purchase product networks."""

__version__ = "0.1.0"
