"""TWTL monitoring and robustness-shaped accelerated PPO."""

__version__ = "0.1.0"
