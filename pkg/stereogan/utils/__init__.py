"""Training, data and evaluation engines."""
