"""Run the acceptance battery through the CLI, writing suite.csv and manifest.json into --out."""

import sys

from besselwave.cli import main

if __name__ == "__main__":
    sys.exit(main(["suite", "--assert", *sys.argv[1:]]))
