"""Core components: settings, logging, errors, jets, integrators"""
from .config import get_settings

__all__ = ["get_settings"]
