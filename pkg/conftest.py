import os
import sys

# Make the package importable when pytest runs from the repository root
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

# Reference material under examples/ is not part of the suite
collect_ignore = ['examples']


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: benchmark-scale checks (deselect with -m 'not slow')")
