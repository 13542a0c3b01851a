"""Compile time-triggered PDDL 2.1 plans into STN-constrained behavior trees."""

__version__ = "0.1.0"
