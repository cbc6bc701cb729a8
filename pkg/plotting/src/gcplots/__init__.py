"""Figure rendering for geocascade outputs."""

__version__ = "0.1.0"
