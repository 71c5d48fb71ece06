"""Regenerate the committed wire-protocol transcript.

Builds a fixed request script (reset with an inline scenario, ten steps,
close), runs it through one session, and writes both sides:

    protocol_requests.ndjson    what a client sends
    protocol_transcript.ndjson  the byte-exact replies

Run from the repository root:

    python3 tests/golden/make_protocol_golden.py
"""

import io
import json
from pathlib import Path

from firegrid.protocol import serve_stream
from firegrid.terrain import scenario_to_dict, synthetic_scenario

HERE = Path(__file__).parent


def build_requests() -> list:
    scenario = synthetic_scenario(
        "flat_uniform", width=12, height=10, moisture=0.02,
        wind_speed=4.0, wind_dir_deg=90.0, max_steps=50, seed=7,
        ignitions=[(5, 6, 0), (2, 2, 3), (7, 9, 6)])
    requests = [{"cmd": "reset",
                 "scenario_inline": scenario_to_dict(scenario),
                 "agent_start": [5, 6]}]
    # Drop on the seed, wander, waste a drop, keep moving.
    for action in [4, 0, 3, 4, 1, 2, 0, 4, 3, 2]:
        requests.append({"cmd": "step", "action": action})
    requests.append({"cmd": "close"})
    return requests


def main() -> None:
    requests = build_requests()
    request_text = "".join(
        json.dumps(r, sort_keys=True, separators=(",", ":")) + "\n"
        for r in requests)
    out = io.StringIO()
    serve_stream(io.StringIO(request_text), out)
    (HERE / "protocol_requests.ndjson").write_text(request_text)
    (HERE / "protocol_transcript.ndjson").write_text(out.getvalue())
    print(f"wrote {len(requests)} requests and "
          f"{len(out.getvalue().splitlines())} replies")


if __name__ == "__main__":
    main()
