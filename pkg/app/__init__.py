"""
CIVP - Modèle bit-exact de multiplication entière et flottante à précision variable sur tuiles.
"""

__version__ = "1.0.0"
