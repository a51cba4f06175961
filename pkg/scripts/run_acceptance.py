#!/usr/bin/env python3
"""Materialize every experiment the acceptance suite reads.

Safe to re-run: completed runs (matching config + files present) are
skipped.  Expect a few hours on one core for the full set.
"""

import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "tests"))

import acceptance_defs  # noqa: E402


def main() -> int:
    for name in acceptance_defs.RUNS:
        t0 = time.time()
        out = acceptance_defs.ensure_run(name)
        print(f"{name:18s} ready in {time.time() - t0:8.1f}s -> {out}", flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
