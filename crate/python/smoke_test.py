#!/usr/bin/env python3
"""Smoke test for the `dqpt` Python extension.

Builds the extension with cargo (unless a built library is already
present), loads it, and replays a few closed-form checks end to end.

Usage:
    python3 python/smoke_test.py [--release] [--skip-build]
"""

import argparse
import importlib
import json
import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def build_extension(profile: str, skip_build: bool) -> Path:
    lib = REPO / "target" / profile / "libdqpt.so"
    if not skip_build or not lib.is_file():
        cmd = ["cargo", "build", "-p", "dqpt-py"]
        if profile == "release":
            cmd.append("--release")
        subprocess.run(cmd, cwd=REPO, check=True)
    if not lib.is_file():
        sys.exit(f"extension library not found at {lib}")
    return lib


def load_module(lib: Path, scratch: Path):
    target = scratch / "dqpt.so"
    shutil.copy2(lib, target)
    sys.path.insert(0, str(scratch))
    return importlib.import_module("dqpt")


def approx(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--release", action="store_true", help="build/use the release profile")
    parser.add_argument("--skip-build", action="store_true", help="reuse an already built library")
    args = parser.parse_args()
    profile = "release" if args.release else "debug"

    lib = build_extension(profile, args.skip_build)
    checks = 0

    with tempfile.TemporaryDirectory(prefix="dqpt_smoke_") as scratch_str:
        scratch = Path(scratch_str)
        dqpt = load_module(lib, scratch)

        assert dqpt.version(), "version string must be nonempty"
        assert "field-quench" in dqpt.scenarios()
        checks += 2

        # rate function at the symmetric point: ln(2)/2 for two spins
        lam = dqpt.rate_function([0.5], [0.5], 2)[0]
        assert approx(lam, math.log(2.0) / 2.0, 1e-12), lam
        checks += 1

        # reference field quench: first critical time near 2.4 us and
        # coincident with the magnetization zero crossing
        series = dqpt.field_quench_series(
            coupling_khz=2.0, bx_g=100.0, bz_g=50.0, t_end_us=20.0, n_output=2001
        )
        tc = series["switch_times_us"][0]
        assert 2.2 < tc < 2.6, f"first switch at {tc} us"
        mz_zero = min(series["mz_zero_times_us"], key=lambda z: abs(z - tc))
        assert abs(mz_zero - tc) <= 0.01, (tc, mz_zero)
        assert approx(series["mz"][0], -0.5, 1e-12)
        checks += 3

        # undriven coupling estimation: Fisher information equals t^2
        fisher = dqpt.fisher_series(coupling_khz=2.0, bz_g=50.0, t_end_us=10.0, n_output=101)
        for t_us, fi in zip(fisher["t_us"], fisher["fi"]):
            if t_us < 0.1:
                continue
            t = t_us * 1e-6
            assert abs(fi - t * t) < 1e-5 * t * t, (t_us, fi)
        checks += 1

        # central-spin quench: anisotropy-dominated set switches, the
        # isotropy-dominated one keeps a negative magnetization
        dreau = dqpt.central_quench_series("dreau", t_end_us=60.0, n_output=3001)
        assert len(dreau["switch_times_us"]) >= 1
        niz = dqpt.central_quench_series("nizovtsev", t_end_us=60.0, n_output=3001)
        assert len(niz["switch_times_us"]) == 0
        assert max(niz["mz"]) < 0.0
        checks += 3

        # full scenario through the same entry point the CLI uses
        out_dir = scratch / "fig2_out"
        manifest = dqpt.run_scenario("fig2", str(out_dir))
        assert "series.csv" in manifest["outputs"]
        summary = json.loads((out_dir / "summary.json").read_text())
        tc = summary["runs"][0]["first_tc_us"]
        assert 2.2 < tc < 2.6, tc
        checks += 2

    print(f"smoke test passed: {checks} checks")


if __name__ == "__main__":
    main()
