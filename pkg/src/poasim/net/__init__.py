"""Deterministic discrete-event network, clock and run driver."""
