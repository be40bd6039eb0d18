"""Cloning-attack planning and double-spend verdicts."""
