#!/usr/bin/env python3
"""Run both pipelines on the shipped fixture corpora and print their reports.

Everything is offline and deterministic: the embedding pipeline uses the
local hash embedder on the planted corpus, the generative pipeline replays
its scripted backend. Artifacts land under out/demo-*/.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from taxoforge.cli import main  # noqa: E402

FIXTURES = REPO / "tests" / "fixtures"


def run(label: str, args: list[str]) -> None:
    print(f"=== {label} ===")
    code = main(args)
    if code != 0:
        raise SystemExit(f"{label} exited with {code}")
    report_path = Path(args[args.index("--out-dir") + 1]) / "report.json"
    report = json.loads(report_path.read_text(encoding="utf-8"))
    summary = {k: report[k] for k in ("rand_index", "purity", "tcs", "type_count", "depth")}
    print(json.dumps(summary, indent=2, sort_keys=True))


def main_demo() -> None:
    planted = FIXTURES / "planted"
    run(
        "embedding pipeline on the planted corpus",
        [
            "run",
            "--method", "emtt",
            "--embedder", "local-hash",
            "--tables-dir", str(planted / "tables"),
            "--gt-path", str(planted / "gt"),
            "--out-dir", str(REPO / "out" / "demo-emtt"),
            "--seed", "7",
        ],
    )
    scripted = FIXTURES / "gett"
    run(
        "generative pipeline on the scripted corpus",
        [
            "run",
            "--method", "gett",
            "--llm", "scripted",
            "--script-path", str(scripted / "script.json"),
            "--tables-dir", str(scripted / "tables"),
            "--gt-path", str(scripted / "gt"),
            "--out-dir", str(REPO / "out" / "demo-gett"),
            "--edge-scorer", "constant",
            "--seed", "7",
        ],
    )


if __name__ == "__main__":
    main_demo()
