from pathlib import Path

__version__ = "0.1.0"

# bundled prompt pool, configs and score tables of a source checkout
ASSETS_DIR = Path(__file__).resolve().parent.parent / "assets"
