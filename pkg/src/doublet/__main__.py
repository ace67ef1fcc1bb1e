"""src/doublet/__main__.py"""

from doublet.cli import main

if __name__ == "__main__":
    raise SystemExit(main())
