import sys
from pathlib import Path

# allow cross-module helpers (tests import fixtures from test_polymat)
sys.path.insert(0, str(Path(__file__).parent))
