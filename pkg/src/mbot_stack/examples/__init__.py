"""Runnable example programs built on the bridge client API."""
