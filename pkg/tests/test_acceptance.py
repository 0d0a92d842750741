"""Acceptance gate: one test per primary criterion, each printing a pass/fail line."""
import subprocess
import sys
import time

import pytest

from qgaudin.acceptance import CRITERIA, run_criterion

LINES = []


@pytest.mark.parametrize("fn", CRITERIA, ids=[f"{i + 1:02d}-{fn.__name__}" for i, fn in enumerate(CRITERIA)])
def test_criterion(fn):
    res = run_criterion(fn)
    LINES.append(res.line())
    print(res.line())
    assert res.passed, res.line()


def test_criterion_11_verify_command():
    start = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "qgaudin", "verify"], capture_output=True, text=True, timeout=300)
    elapsed = time.perf_counter() - start
    ok = proc.returncode == 0 and elapsed < 60.0
    line = (f"[{'PASS' if ok else 'FAIL'}] 11 verify command: exit {proc.returncode}, "
            f"{elapsed:.2f} s wall-clock < 60 s")
    LINES.append(line)
    print(line)
    assert proc.returncode == 0, proc.stdout + proc.stderr
    assert elapsed < 60.0
    assert proc.stdout.strip().splitlines()[-1] == "overall: PASS"
    assert sum(ln.startswith("[PASS]") for ln in proc.stdout.splitlines()) == 11
