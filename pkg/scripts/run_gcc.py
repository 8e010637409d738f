"""Run the full pipeline on the bundled GCC panel and print the MAPE table.

    python scripts/run_gcc.py [--output-dir runs/gcc] [--workers 1]
"""
import argparse
import json
import time
from pathlib import Path

from hdicast.cli import main as cli_main

ROOT = Path(__file__).resolve().parents[1]
CONFIG = ROOT / "src" / "hdicast" / "data" / "gcc_config.json"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--output-dir", default=str(ROOT / "runs" / "gcc"))
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    t0 = time.perf_counter()
    status = cli_main(["run-all", "--config", str(CONFIG), "--output-dir", args.output_dir,
                       "--workers", str(args.workers)])
    elapsed = time.perf_counter() - t0

    out = Path(args.output_dir)
    config = json.loads(CONFIG.read_text())
    print(f"{'country':<8}{'in-sample %':>14}{'out-of-sample %':>18}   forecast 2023-2027")
    for c in config["countries"]:
        model_file = out / f"model_{c}.json"
        if not model_file.exists():
            print(f"{c:<8}{'failed':>14}")
            continue
        doc = json.loads(model_file.read_text())
        fc = (out / f"forecast_{c}.csv").read_text().splitlines()[1:]
        path = " ".join(line.split(",")[1] for line in fc)
        print(f"{c:<8}{doc['in_sample_mape']:>14.4f}{doc['out_of_sample_mape']:>18.4f}   {path}")
    print(f"exit status {status}, {elapsed:.1f} s, outputs in {out}")
    return status


if __name__ == "__main__":
    raise SystemExit(main())
