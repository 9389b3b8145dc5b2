#!/usr/bin/env python3
"""Regenerate the shipped sample CSVs with the echoq command-line tool.

Run from this directory with the simulator installed:

    python regenerate.py

Everything is seeded, so reruns reproduce the shipped files byte for
byte (manifests differ only in their timestamps).
"""

import json
import subprocess
import sys
from pathlib import Path

HERE = Path(__file__).parent


def run(*args):
    print("+", " ".join(args))
    subprocess.run(args, check=True, cwd=HERE)


def main():
    # single-nucleus showcase: conditioned precession at 6x the bare rate
    base = ["echoq", "single", "--omega0-hz", "1e4", "--omega1-ratio", "6",
            "--cross2", "0.5", "--points-per-cycle", "48"]
    run(*base, "--p", "0", "--out", "single_ref.csv")
    run(*base, "--p", "1", "--out", "single_pol.csv")
    run("echoq", "fft", "--input", "single_ref.csv", "--channel", "Q",
        "--out", "spectrum_ref.csv")
    run("echoq", "fft", "--input", "single_pol.csv", "--channel", "Q",
        "--out", "spectrum_pol.csv")

    # bath showcase: 50 G, 10% abundance, fully polarized + reference twin
    run("echoq", "bath", "--abundance", "0.1", "--b-gauss", "50", "--p", "1",
        "--seed", "7", "--reference", "--out", "bath_pol.csv")
    Path(HERE / "bath_pol_ref.csv").rename(HERE / "bath_ref.csv")

    # polarization series at 10 G, natural abundance; shared lattice seed
    rows = []
    for p in ("0.2", "0.4", "0.6", "0.8", "1.0"):
        name = f"series_p{p.replace('.', '')}.csv"
        run("echoq", "bath", "--abundance", "0.01", "--b-gauss", "10",
            "--p", p, "--seed", "11", "--out", name)
        fit_name = f"series_p{p.replace('.', '')}.fit.json"
        run("echoq", "fit", "--input", name, "--out", fit_name)
        fit = json.loads((HERE / fit_name).read_text())
        rows.append((float(p), fit["varpi_fit_rads"], fit["c_fit"]))
        (HERE / fit_name).unlink()
    with open(HERE / "series_summary.csv", "w", encoding="utf-8") as fh:
        fh.write("# echoq polarization series summary v1\n")
        fh.write("P,varpi_fit_rads,c_fit\n")
        for p, varpi, c in rows:
            fh.write(f"{p:.17g},{varpi:.17g},{c:.17g}\n")

    # field/abundance sweep map
    run("echoq", "sweep", "--b-list", "5,10,20,50,100,200,500",
        "--n-list", "0.01,0.02,0.05,0.1", "--p-list", "1.0",
        "--realizations", "3", "--seed", "42", "--workers", "1",
        "--out", "sweep.csv")


if __name__ == "__main__":
    sys.exit(main())
