import os

# Get the project root directory (2 levels up from this file)
PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), "../.."))

OUTPUT_DIR_ENV = "POASIM_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = os.path.join(os.getcwd(), "output")
DEFAULT_LOG_DIR = os.path.join(PROJECT_ROOT, "logs")

SCHEMA_VERSION = 1

DEFAULT_NETWORK = {
    "base_delay_ms": 50,
    "jitter_ms": 10,
    # Attacker and timers act on a 10 ms polling grid.
    "poll_ms": 10,
}

DEFAULT_AURA = {
    "step_duration_ms": 3000,
}

DEFAULT_CLIQUE = {
    "block_period_ms": 5000,
    # Out-of-order delay is drawn from [0, wiggle_unit_ms * majority].
    "wiggle_unit_ms": 500,
}

DEFAULT_ATTACK = {
    "attacker": 1,
    # Attacks start once the chain has run this many rotations.
    "warmup_rotations": 2,
    # Steps or periods simulated after the heal before the run is scored.
    "settle_rounds": 3,
    "sender": "alice",
    "victim_recipient": "merchant",
    "attacker_recipient": "alice-2",
    "amount": 100,
}

DEFAULT_SWEEP = {
    "workers": 1,
    "ci_z": 1.96,
}
