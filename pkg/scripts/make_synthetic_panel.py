"""Regenerate the bundled synthetic GCC panel (src/hdicast/data/gcc_panel.csv)."""
import argparse
from pathlib import Path

from hdicast.data_model import write_panel
from hdicast.synthetic import generate_panel

DEFAULT_OUT = Path(__file__).resolve().parents[1] / "src" / "hdicast" / "data" / "gcc_panel.csv"

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=20240603)
    ap.add_argument("--out", type=Path, default=DEFAULT_OUT)
    args = ap.parse_args()
    panel = generate_panel(args.seed)
    write_panel(panel, args.out)
    print(f"wrote {len(panel.cells)} series for {len(panel.countries)} countries to {args.out}")
