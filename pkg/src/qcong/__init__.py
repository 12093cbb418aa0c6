"""Partition statistic congruences from q-series, modular forms and Hecke operators."""

from .series import QSeries, ZZ, QQ, Zmod

__all__ = ["QSeries", "ZZ", "QQ", "Zmod"]
__version__ = "0.1.0"
