"""CLI 入口点"""

import sys

from hybrid_merton.cli import main

if __name__ == "__main__":
    sys.exit(main())
