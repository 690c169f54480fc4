"""Blackwell approachability, online linear optimization and calibrated forecasting."""

__version__ = "0.1.0"
