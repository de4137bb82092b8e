"""Refit the calibration block and compare it with the shipped defaults.

The fit targets are reported outcomes (SAR and absorbed-PD reductions, the
EE gain, the temperature bands and the 60 m complexity anchors). Pass
--write to store the refitted block as YAML.
"""

import argparse
import math
from pathlib import Path

import yaml

from hybridsim import calibration, config


def _flat(d, prefix=""):
    for k, v in d.items():
        if isinstance(v, dict):
            yield from _flat(v, f"{prefix}{k}.")
        else:
            yield f"{prefix}{k}", v


def main():
    ap = argparse.ArgumentParser(description="refit the shipped calibration")
    ap.add_argument("--write", type=Path, help="YAML file for the refitted block")
    args = ap.parse_args()

    model = config.ModelConfig()
    fitted = config.to_dict(calibration.calibrate(model))
    shipped = dict(_flat(config.to_dict(model.calibration)))
    worst = 0.0
    for key, new in _flat(fitted):
        old = shipped[key]
        rel = abs(new - old) / abs(old) if isinstance(new, float) and old else 0.0
        worst = max(worst, rel)
        print(f"{key:38s} shipped {old!r:>22}  fitted {new!r:>22}  rel {rel:.2e}")
    print(f"largest relative change {worst:.2e}")
    if args.write:
        args.write.write_text(yaml.safe_dump({"calibration": fitted}, sort_keys=False))
    return 0 if math.isfinite(worst) else 1


if __name__ == "__main__":
    raise SystemExit(main())
