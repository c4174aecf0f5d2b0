"""Differential-structure search on toy block ciphers via simulated Bernstein-Vazirani sampling."""

__version__ = "0.1.0"
