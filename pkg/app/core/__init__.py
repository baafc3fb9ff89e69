"""Arithmétique bit-exacte : entiers larges, tuiles, plans, flottants"""
