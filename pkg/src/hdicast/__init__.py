"""Human Development Index forecasting from indicator panels."""

__version__ = "0.1.0"
