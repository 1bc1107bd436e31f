"""
Entry point for the MPC toolkit.

Usage:
    python backend/main.py run-gate and3 1 1
    python backend/main.py audit all
    python backend/main.py cost-report --all-pairs 10
"""
import os
import sys

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Make the mpc package importable when run from the repository root
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from mpc.cli import main

if __name__ == "__main__":
    sys.exit(main())
