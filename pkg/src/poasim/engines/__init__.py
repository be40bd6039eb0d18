"""Per-sealer state machines for the Aura and Clique protocols."""
