"""
Command-line entry point for the fractal operator tools.

    python main.py verify --input problem.json --space sobolev:1,2
    python main.py setup-env
"""
import os
import sys

# Add the src directory to the path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "src"))

from fractal_operator.cli.commands import run
from fractal_operator.utils.config import create_sample_env_file


def main() -> int:
    if sys.argv[1:] == ["setup-env"]:
        path = create_sample_env_file()
        print(f"Sample configuration written to {path}")
        return 0
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
