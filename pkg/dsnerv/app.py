import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

if __package__ is None or __package__ == "":
    # Absolute imports need the project root when run as a plain script.
    sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from dsnerv.cli import build_parser, dispatch


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    return dispatch(args)


if __name__ == "__main__":
    sys.exit(main())
