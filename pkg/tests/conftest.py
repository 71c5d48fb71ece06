import sys
from pathlib import Path

# Oracles live next to the tests and are imported by name (oracle_*).
sys.path.insert(0, str(Path(__file__).parent))
