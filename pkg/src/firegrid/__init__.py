"""Grid-based wildfire spread simulator with a helitack suppression
environment, incident dataset pipeline, and threat reporting."""

__version__ = "0.1.0"
