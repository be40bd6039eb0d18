"""
The poasim package.

Deterministic discrete-event simulation of the Aura and Clique
Proof-of-Authority protocols under the cloning attack, together with the
safety/liveness analysis of generalized decision thresholds and the
experiment harness that reproduces the published measurements.
"""

__version__ = "0.1.0"
