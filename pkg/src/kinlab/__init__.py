"""kinlab: numerical laboratory for exponentially weighted kinetic equations."""
__version__ = "0.1.0"
