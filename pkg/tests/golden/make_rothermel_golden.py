#!/usr/bin/env python3
"""Freeze the kernel golden cases from the independent oracle.

Run from the repository root:

    python tests/golden/make_rothermel_golden.py

Overwrites rothermel_golden.json next to this script with the 27 cases
(3 fuels x 3 moistures x 3 winds) evaluated by tests/oracle_rothermel.py.
The oracle hardcodes its own fuel parameters and formula chain; nothing
from src/ is imported, so regeneration cannot be contaminated by the code
under test.
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

import oracle_rothermel


def main() -> None:
    out = Path(__file__).with_name("rothermel_golden.json")
    cases = oracle_rothermel.all_cases()
    out.write_text(json.dumps(cases, indent=2) + "\n")
    print(f"wrote {len(cases)} cases to {out}")


if __name__ == "__main__":
    main()
