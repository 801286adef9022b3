"""Run every example configuration through the CLI and write one JSON artifact per run.

Usage: python3 scripts/run_configs.py [OUTDIR]
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from thetalift.cli import run
from thetalift.config import ConfigError, RunConfig

CONFIGS = Path(__file__).parent / "configs"

RUNS = [
    ("field", "info", "sqrt3_field.json"),
    ("lattice", "disc", "d1_weil.json"),
    ("weil", "check", "d1_weil.json"),
    ("specfun", "eval", "specfun.json"),
    ("whittaker", "eval", "d1_whittaker.json"),
    ("green", "eval", "d1_green.json"),
    ("green", "scan", "d1_green.json"),
    ("green", "pole", "d1_green.json"),
    ("examples", "sqrt3", None),
    ("examples", "shimura-curve", None),
]


def main(outdir: Path) -> int:
    outdir.mkdir(parents=True, exist_ok=True)
    worst = 0
    for group, action, name in RUNS:
        try:
            cfg = RunConfig.load(CONFIGS / name) if name else None
        except ConfigError as exc:
            status, artifact = 1, exc.payload()
        else:
            status, artifact = run((group, action), cfg)
        path = outdir / f"{group}_{action}.json"
        path.write_text(json.dumps(artifact, indent=2, sort_keys=True))
        print(f"{group} {action}: exit {status} -> {path}")
        worst = max(worst, status)
    return worst


if __name__ == "__main__":
    sys.exit(main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path("results")))
