"""Event-triggered dynamic average consensus for distributed Kalman-Bucy filtering."""

__version__ = "0.1.0"
