"""Screening solid-state color centers as cavity-assisted Raman quantum memories."""
__version__ = "0.1.0"
