"""Coordinating mobile haptic proxies across shared and remote tabletop rooms."""

__version__ = "0.1.0"
