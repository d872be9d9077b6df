"""Smoke test for the vbchain Python extension.

Builds the extension with cargo, loads it from a temporary directory and
exercises each exported entry point once.

    python3 python/smoke_test.py
"""

import importlib.util
import math
import pathlib
import shutil
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parents[1]


def build_and_load():
    subprocess.run(
        ["cargo", "build", "--release", "-p", "vbchain-python", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    lib = ROOT / "target" / "release" / "libvbchain_py.so"
    tmp = pathlib.Path(tempfile.mkdtemp())
    target = tmp / "vbchain_py.so"
    shutil.copy(lib, target)
    spec = importlib.util.spec_from_file_location("vbchain_py", target)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def main():
    vb = build_and_load()

    two = vb.Kernel([[0.7, 0.3], [0.6, 0.4]])
    assert abs(two.pi[0] - 2 / 3) < 1e-12, two.pi
    report = two.analyze()
    assert abs(report["Lambda"] - 0.1) < 1e-12, report
    assert report["variance_bounding"]

    var = two.variance([1.0, -2.0], horizons=[1, 1000])
    assert abs(var["ratio"] - 1.1 / 0.9) < 1e-12, var

    again = vb.Kernel.from_vbk(two.to_vbk())
    assert again.rows() == two.rows()

    ident = vb.Kernel([[1, 0], [0, 1]], pi=[0.5, 0.5])
    assert ident.analyze()["K_bound"] == math.inf

    p1, p2 = vb.example9(10)
    cmp = vb.compare(p1, p2, functionals=5)
    assert cmp["dominates"], cmp
    assert p1.analyze()["near_periodic"]

    m = vb.build_mh([1, 2, 3], [[0, 0.5, 0.5], [0.5, 0, 0.5], [0.5, 0.5, 0]])
    assert m.db_residual <= 1e-12

    path = two.simulate(200, seed=7)
    assert path == two.simulate(200, seed=7) and len(path) == 200

    est, se = vb.batch_means([float(x) for x in two.simulate(10_000, seed=3)])
    assert est > 0 and se > 0

    d = vb.transformed_increment_density(1e6, 0.0, 0.5)
    assert abs(d - 1 / math.sqrt(2 * math.pi * 0.25)) < 1e-3, d

    rej, _ = vb.rejection_probability(3.0, 1e6, samples=2000)
    assert rej > 0.9, rej

    try:
        vb.Kernel([[0.5, 0.5], [0.9, 0.1]], pi=[0.5, 0.5])
    except vb.VbchainError as e:
        assert "detailed balance" in str(e)
    else:
        raise AssertionError("non-reversible kernel accepted")

    print("python smoke test: ok")


if __name__ == "__main__":
    sys.exit(main())
