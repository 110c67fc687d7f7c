"""codeloop: turn natural-language instructions into guarded in-app action code."""

__version__ = "0.1.0"
