"""Closed-form safety/liveness classification and attack bounds."""
