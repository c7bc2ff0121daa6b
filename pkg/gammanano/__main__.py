"""
Entry point for running gammanano as a module: python -m gammanano
"""

import sys

from gammanano.cli import main

if __name__ == '__main__':
    sys.exit(main())
