"""Enable `python -m fast_disentangle`."""

from fast_disentangle.cli import main

if __name__ == "__main__":
    raise SystemExit(main())
