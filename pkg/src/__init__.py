"""
Inserção plug/socket com campo potencial e aprendizado residual.
"""

__version__ = "0.1.0"
