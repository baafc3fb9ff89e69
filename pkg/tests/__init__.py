"""Tests pour WebExtract Service"""
