"""Documents machine (modèles pydantic)"""
