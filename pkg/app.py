"""
Sparse DIB
Command-line entry point: python app.py <command> [options]
"""

# -------------------------------
# 1. Imports
# -------------------------------
from sparse_dib.cli import main

# -------------------------------
# 2. Run the CLI
# -------------------------------
if __name__ == "__main__":
    main()
