#!/usr/bin/env python3
"""
SCALEFLOW - Main Hub (Central Entry Point)
Runs the scaleflow experiments from a source checkout without installing the package

Dependencies:
- src/scaleflow/cli_runner.py: Parses flags and runs the experiment
- experiments/*.conf: Example run configurations

CLI Commands:
- python main.py approximate [--preset two-mass-default] [--periods 1..20] [-o out.csv]
- python main.py orbit-dist [--periods 2,4,8,16] [--t-window=-8,8] [--dt 0.01]
- python main.py chain [--preset torus-golden] [--epsilon 0.1] [--s 10]
- python main.py embed [--preset torus-golden] [--tau 0.5] [--format csv]
- python main.py adpt [--curve orbit|constant] [--reading corrected|literal]

Every command accepts --config FILE (flat key = value file); flags override the file.
Set SCALEFLOW_LOG=info or debug for diagnostics on stderr.
"""

import sys
from pathlib import Path

# Add src directory to path for imports
sys.path.insert(0, str(Path(__file__).parent / "src"))

from scaleflow.cli_runner import main as run_cli  # noqa: E402


def main() -> None:
    """Main CLI entry point"""
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
