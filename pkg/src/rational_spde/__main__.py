import sys

from rational_spde.cli import main

if __name__ == "__main__":
    sys.exit(main())
