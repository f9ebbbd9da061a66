"""Smoke test for the nrsense_py extension.

Build and install first:
    pip install --no-build-isolation ./crates/py
then run:
    python python/smoke_test.py
"""

import math
import pathlib
import sys
import tempfile

import nrsense_py as nr

ROOT = pathlib.Path(__file__).resolve().parents[1]


def check(cond, msg):
    if not cond:
        print(f"FAIL {msg}")
        sys.exit(1)
    print(f"ok   {msg}")


def main():
    full = nr.Numerology()
    check(full.frame_samples() == 19_660_800, "full frame is 19,660,800 samples")
    check(sum(full.is_long_cp(l) for l in range(full.n_symb)) == 20, "20 long-CP symbols")
    check(abs(full.excess_phase(full.delta_f / 10, full.n_symb - 1) - math.pi / 4) < 1e-12, "phase bound")

    num = nr.Numerology(n_rb=20, n_symb=112)
    y = nr.synthesize(num, [(40e-9, 9_000.0), (90e-9, 14_000.0, complex(0.0, 1.0))])
    check(y.shape == (240, 112), "radar matrix shape")

    f = sorted(nr.estimate(y, "esprit", "doppler", 2, method="III"))
    check(abs(f[0] - 9_000.0) < 1e-3 and abs(f[1] - 14_000.0) < 1e-3, f"ESPRIT Doppler {f}")
    tau = sorted(nr.estimate(y, "esprit", "delay", 2))
    check(abs(tau[0] - 40e-9) < 1e-13 and abs(tau[1] - 90e-9) < 1e-13, f"ESPRIT delay {tau}")
    f = sorted(nr.estimate(y, "music", "doppler", 2))
    check(f == [9_000.0, 14_000.0], f"MUSIC Doppler {f}")

    axis, values = nr.doppler_periodogram(y, "II")
    check(len(axis) == len(values) == 512, "periodogram length")
    try:
        nr.estimate(y, "capon", "doppler", 2)
    except ValueError as e:
        check("capon" in str(e), "unknown algorithm raises ValueError")
    else:
        check(False, "unknown algorithm raises ValueError")

    with tempfile.TemporaryDirectory() as out:
        rows = nr.simulate(str(ROOT / "scenarios" / "desk.toml"), trials=2, out=out)
        check(len(rows) > 0 and all(r["n_trials"] == 2 for r in rows), "simulate returns metric rows")
        header = (pathlib.Path(out) / "metrics.csv").read_text().splitlines()[0]
        check(header.startswith("scenario,algorithm,method,snr_db"), "metrics.csv written")


if __name__ == "__main__":
    main()
