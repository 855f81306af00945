"""Entry point for ``python -m clonelab``."""

from clonelab.cli import main

if __name__ == "__main__":
    main()
