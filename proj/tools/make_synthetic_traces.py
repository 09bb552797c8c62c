#!/usr/bin/env python3
"""Writes the synthetic isolation traces in data/.

No measured tables ship with the project. These traces follow the
quadratic-near-center shape of an RF canceller matched at f_c:

    isolation = floor + 2|H|^2 (1 - cos(2 pi tau (f - f_c)))

with |H|^2 chosen so the -60 dB bandwidth is about 2.5 MHz (circulator) and
about 4 MHz (antenna pair).
"""
import argparse
import math
from pathlib import Path

import numpy as np

CENTER_HZ = 2.14e9
SPAN_HZ = 40e6
STEP_HZ = 200e3
TAU_S = 1e-9
FLOOR_DB = -75.0


def gain_for_width(width_hz):
    target = 1e-6 - 10 ** (FLOOR_DB / 10)
    return target / (2.0 * (1.0 - math.cos(2 * math.pi * TAU_S * width_hz / 2)))


def write(path, interface, width_hz):
    offsets = np.arange(-SPAN_HZ, SPAN_HZ + STEP_HZ / 2, STEP_HZ)
    h2 = gain_for_width(width_hz)
    iso = 10 ** (FLOOR_DB / 10) + 2 * h2 * (1 - np.cos(2 * math.pi * TAU_S * offsets))
    with open(path, "w") as f:
        f.write("# SYNTHETIC trace, not a measurement\n")
        f.write(f"# interface: {interface}\n")
        f.write(f"# -60 dB width {width_hz / 1e6:.1f} MHz, floor {FLOOR_DB:.0f} dB, center {CENTER_HZ:.0f} Hz\n")
        f.write("freq_hz,isolation_db\n")
        for off, lin in zip(offsets, iso):
            f.write(f"{CENTER_HZ + off:.0f},{10 * math.log10(lin):.6f}\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    write(args.out / "circulator_synthetic.csv", "circulator", 2.5e6)
    write(args.out / "antenna_pair_synthetic.csv", "pair", 4.0e6)


if __name__ == "__main__":
    main()
