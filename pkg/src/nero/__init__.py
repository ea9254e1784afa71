"""Rule-grounded weakly supervised relation extraction."""

__version__ = "0.1.0"
