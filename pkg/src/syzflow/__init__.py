"""syzflow: gradient-flow torus fibration laboratory."""
__version__ = "0.1.0"
