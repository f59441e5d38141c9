"""Klein bottle immersions as tubes and closed forms, with numerical checks and meshing."""

__version__ = "0.1.0"
