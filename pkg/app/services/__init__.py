"""
Services du modèle CIVP.
"""
