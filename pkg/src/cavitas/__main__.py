"""Module entry point: `python -m cavitas` behaves like the `cavitas` script."""

from .cli import main

if __name__ == "__main__":
    raise SystemExit(main())
