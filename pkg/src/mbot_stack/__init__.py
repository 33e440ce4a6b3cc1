"""Desk-scale mobile robot stack: simulator, SLAM, navigation, bridge."""

__version__ = "0.1.0"
