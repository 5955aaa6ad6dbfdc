#!/usr/bin/env python3
"""Check the parking corpus against its frozen goldens.

Run from the repository root:

    python scripts/corpus_check.py            # verify
    python scripts/corpus_check.py --regen    # rewrite goldens, then verify

Exits 0 when every check passes, 1 otherwise.
"""

from __future__ import annotations

import argparse
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from ciot.corpus import corpus_check


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument(
        "--corpus",
        default=str(pathlib.Path(__file__).resolve().parent.parent / "corpus"),
        help="corpus directory (default: <repo>/corpus)",
    )
    ap.add_argument(
        "--regen",
        action="store_true",
        help="regenerate golden traces and timelines before checking",
    )
    args = ap.parse_args(argv)

    report = corpus_check(args.corpus, regen=args.regen)
    print(report.render())
    return 0 if report.ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
