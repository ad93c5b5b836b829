"""Long-time asymptotics of the focusing MKdV equation with step-like data."""

__version__ = "0.1.0"
