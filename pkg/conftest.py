# conftest.py
# Puts the repository root on sys.path so tests import CONFIGURATION, Initialization and Laboratory.
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))
