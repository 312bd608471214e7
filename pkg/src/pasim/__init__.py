"""Discrete-event simulator of multi-rate 802.11 DCF cells with dynamic
packet aggregation, baseline remedies, and a closed-form fairness model."""

__version__ = "0.1.0"
