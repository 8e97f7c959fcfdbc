"""Potential-field collision avoidance and deterministic simulation for a
6-DOF collaborative arm, with an experiment harness and a live bridge."""

__version__ = "0.1.0"
