"""
Generate YAML config files for the rig presets.
"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from config import RIG_PRESETS, dump_app_config  # noqa: E402
from models import AppConfig  # noqa: E402


def generate_presets(out_dir: Path) -> list:
    """Write one <preset>.yaml per rig preset into `out_dir`."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, factory in RIG_PRESETS.items():
        path = out_dir / f'{name}.yaml'
        dump_app_config(AppConfig(rig=factory()), path)
        written.append(path)
    return written


if __name__ == "__main__":
    output_dir = Path(__file__).parent / 'configs'
    for path in generate_presets(output_dir):
        print(f"✓ Generated {path}")
