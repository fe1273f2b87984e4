"""Entry point for `python -m cadenza`."""

from .shell.cli import main

if __name__ == "__main__":
    main()
