"""Command line entry point for the receiver daemon."""

from __future__ import annotations

import argparse
import asyncio
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from ..transport import parse_hostport
from .daemon import ReceiverDaemonConfig, run_receiver
from .machine import InvalidRangeError, NormalRange

log = logging.getLogger(__name__)


def parse_range(text: str) -> NormalRange:
    low, _, high = text.partition(":")
    try:
        return NormalRange(int(low), int(high))
    except (ValueError, InvalidRangeError) as exc:
        raise ValueError(f"bad range {text!r}: {exc}") from None


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="evok-receiver", description=__doc__)
    parser.add_argument("--listen", type=parse_hostport, default=("0.0.0.0", 45450))
    parser.add_argument("--group", type=int, default=0)
    parser.add_argument("--range", type=parse_range, default=NormalRange(),
                        help="normal bpm range as low:high (default 60:100)")
    parser.add_argument("--alarm-after-ms", type=int, default=15000)
    parser.add_argument("--ui-port", type=int, default=8080)
    parser.add_argument("--headless", action="store_true",
                        help="no UI bridge; print state lines to stdout")
    parser.add_argument("--log", help="session log path (ndjson)")
    parser.add_argument("--ui-assets", help="static UI build directory (default: bundled frontend/dist if present)")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(message)s")

    assets: Optional[Path] = Path(args.ui_assets) if args.ui_assets else None
    if assets is None:
        # repo checkout layout: src/evok/receiver/cli.py -> <root>/frontend/dist
        bundled = Path(__file__).resolve().parents[3] / "frontend" / "dist"
        if bundled.is_dir():
            assets = bundled

    cfg = ReceiverDaemonConfig(
        listen=args.listen,
        group_id=args.group,
        range=args.range,
        alarm_after_ms=args.alarm_after_ms,
        ui_port=args.ui_port,
        headless=args.headless,
        log_path=Path(args.log) if args.log else None,
        ui_assets=assets,
    )
    try:
        asyncio.run(run_receiver(cfg))
    except KeyboardInterrupt:
        pass
    except OSError as exc:
        log.error("%s", exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
