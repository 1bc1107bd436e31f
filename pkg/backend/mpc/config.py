"""
Configuration and constants for the helper-assisted MPC toolkit.

Values can be overridden from the environment (or a .env file).
"""
import os

from dotenv import load_dotenv

load_dotenv()

# Party names
CLIENT = "Client"
KH = "KH"
EVH = "EVH"
HELPER = "Helper"
HELPER2 = "Helper2"
PARTIES = (CLIENT, KH, EVH, HELPER, HELPER2)

# Message phases
SHARING = "SecretSharing"
COMPUTATION = "Computation"
REVEAL = "Reveal"
PHASES = (SHARING, COMPUTATION, REVEAL)

# Reproducibility
DEFAULT_SEED = os.environ.get("MPC_SEED", "00")

# Fan-in AND
W_MAX = int(os.environ.get("MPC_W_MAX", "16"))

# Exhaustive audit: maximum number of tape bits enumerated
ENUM_BITS = int(os.environ.get("MPC_ENUM_BITS", "24"))
# Fan-in protocols switch from direct enumeration to the symbolic audit above this many bits
EXHAUSTIVE_BITS = int(os.environ.get("MPC_EXHAUSTIVE_BITS", "16"))

# Exponential protocol
DEFAULT_LAMBDA = int(os.environ.get("MPC_LAMBDA", "4"))
DEFAULT_VALUE_BOUND = int(os.environ.get("MPC_VALUE_BOUND", "1024"))
DEFAULT_EXP_KEY_RANGE = int(os.environ.get("MPC_EXP_KEY_RANGE", "4"))
EXP_STATE_BUDGET = int(os.environ.get("MPC_EXP_STATES", str(2 ** 20)))

# CLI
LOG_LEVEL = os.environ.get("MPC_LOG_LEVEL", "WARNING")
OUTPUT_FORMATS = ("text", "json")

# Published three-party comparison rows. Citations only, nothing is run.
REFERENCE_ROWS = [
    {"scheme": "GMW '87", "and_bits": ">50", "all_pairs_bits": "> 3*v^2", "rounds": "2", "max_corrupted": "2"},
    {"scheme": "BMR '90", "and_bits": ">10", "all_pairs_bits": "> 3*v^2", "rounds": ">2", "max_corrupted": "2"},
    {"scheme": "CCS '16", "and_bits": "3", "all_pairs_bits": "3*v(v-1)/2", "rounds": "1", "max_corrupted": "2"},
    {"scheme": "helper-assisted", "and_bits": "5", "all_pairs_bits": "v(v-1)/2 + 4v", "rounds": "2", "max_corrupted": "1"},
]
