"""Exact verification toolkit for the Atkin-Lehner quotients X0+(N) of prime level and genus 4 to 6."""

from .errors import X0PlusError
from .modeldb import LEVELS, load_model

__all__ = ["LEVELS", "X0PlusError", "load_model"]
