#!/usr/bin/env python3
"""Smoke test for the pyqhtt extension module.

Builds the cdylib with cargo if needed, loads it, and exercises check,
annotate, pretty, and simulate on the shipped corpus.

Run from the repository root:  python3 python/smoke_test.py
"""

import os
import shutil
import subprocess
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def build_and_import():
    subprocess.run(
        ["cargo", "build", "-p", "qhtt-py"], cwd=ROOT, check=True
    )
    libname = {
        "linux": "libpyqhtt.so",
        "darwin": "libpyqhtt.dylib",
    }.get(sys.platform[:6].rstrip("0123456789"), "libpyqhtt.so")
    built = os.path.join(ROOT, "target", "debug", libname)
    if not os.path.exists(built):
        raise SystemExit(f"built extension not found at {built}")
    tmp = tempfile.mkdtemp(prefix="pyqhtt-")
    ext = ".so" if not sys.platform.startswith("win") else ".pyd"
    shutil.copy2(built, os.path.join(tmp, "pyqhtt" + ext))
    sys.path.insert(0, tmp)
    import pyqhtt  # noqa: E402

    return pyqhtt


def read_corpus(name):
    with open(os.path.join(ROOT, "corpus", name), encoding="utf-8") as f:
        return f.read()


def main():
    pyqhtt = build_and_import()

    # 1. bell00 verifies.
    bell = read_corpus("bell00.qh")
    result = pyqhtt.check(bell)
    assert result.passed, result.failures()
    assert result.verdicts == [("bell00", "pass")], result.verdicts
    assert '"verdict": "pass"' in result.report_json()
    print("check(bell00): pass")

    # 2. The classical-bit rejection surfaces with its diagnostic.
    bad = read_corpus("cointoss_bad.qh")
    result = pyqhtt.check(bad)
    assert not result.passed
    assert any("only defined for quantum variables" in f for f in result.failures())
    print("check(cointoss_bad): rejected as expected")

    # 3. Modular teleportation verifies and annotates deterministically.
    tele = read_corpus("teleport2.qh")
    assert pyqhtt.check(tele).passed
    a1 = pyqhtt.annotate(tele)
    a2 = pyqhtt.annotate(tele)
    assert a1 == a2 and "=q" in a1
    print("annotate(teleport2): deterministic,", len(a1.splitlines()), "lines")

    # 4. Pretty-printing round-trips.
    printed = pyqhtt.pretty(bell)
    assert pyqhtt.pretty(printed) == printed
    print("pretty: round trip stable")

    # 5. Simulation: Bell outcomes are correlated and roughly fair.
    bell_meas = """
m : QST ((x, y): bit (*) bit) (requires {top}) (ensures {top})
m = do {
  a <- init 0;
  b <- init 0;
  apply H to (a);
  apply CX to (a, b);
  x <- meas a;
  y <- meas b;
  return (x, y)
}
"""
    hist = pyqhtt.simulate(bell_meas, "m", shots=4000, seed=7)
    assert set(hist) <= {"00", "11"}, hist
    assert 0.4 < hist.get("00", 0) / 4000 < 0.6, hist
    print("simulate(bell): histogram", dict(hist))

    # 6. Teleportation with a complex input state returns it on the wire.
    hist = pyqhtt.simulate(
        tele,
        "teleport",
        shots=64,
        seed=3,
        inputs={"q": (0.6 + 0j, 0.8j)},
    )
    assert sum(hist.values()) == 64
    print("simulate(teleport): ok over", len(hist), "outcome patterns")

    # 7. Deutsch with a balanced oracle always measures 1.
    deutsch = read_corpus("deutsch.qh")
    hist = pyqhtt.simulate(deutsch, "deutsch", shots=256, seed=1, oracle="id")
    assert hist == {"1": 256}, hist
    print("simulate(deutsch, id): measured 1 in all shots")

    print("\nall pyqhtt smoke tests passed")


if __name__ == "__main__":
    main()
