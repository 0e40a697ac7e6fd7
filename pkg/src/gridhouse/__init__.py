"""gridhouse: a desk-scale household simulator for collecting and
augmenting hierarchical task demonstrations."""

__version__ = "0.1.0"
