"""Controllable anomaly synthesis with a unified multi-task discriminator."""

__version__ = "0.1.0"
