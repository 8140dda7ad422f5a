#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Each backend runs in a fresh interpreter (the choice is fixed at import
time via SICANCEL_BACKEND).  Two hot loops are timed: the per-sample
state-space response used by the simulator and the impulse/oracle tests,
and the Hessenberg resolvent sweep behind the frequency-grid stage of the
norm computation.  Results must agree between backends.
"""

import json
import os
import subprocess
import sys

CHILD = r"""
import json
import time

import numpy as np

from sicancel import _accel

rng = np.random.default_rng(0)
results = {"backend": _accel.BACKEND}

# state-space response at two scales: small systems dominate the oracle
# and property tests, controller-sized ones the closed-loop checks
for label, n, T, reps in (("sim_small", 12, 2000, 50), ("sim_large", 200, 4000, 5)):
    p = q = 4
    A = rng.standard_normal((n, n))
    A *= 0.8 / max(np.abs(np.linalg.eigvals(A)))
    B = rng.standard_normal((n, p))
    C = rng.standard_normal((q, n))
    D = rng.standard_normal((q, p))
    u = rng.standard_normal((T, p))
    _accel.dss_response(A, B, C, D, u)  # warm-up / JIT compile
    t0 = time.perf_counter()
    for _ in range(reps):
        y = _accel.dss_response(A, B, C, D, u)
    results[label + "_ms"] = (time.perf_counter() - t0) / reps * 1e3
    results[label + "_check"] = float(np.sum(y))

# resolvent sweep: closed-loop-sized system over a dense frequency grid
n = 392
A = rng.standard_normal((n, n))
A *= 0.7 / max(np.abs(np.linalg.eigvals(A)))
B = rng.standard_normal((n, 2))
C = rng.standard_normal((2, n))
D = np.zeros((2, 2))
zs = np.exp(1j * np.linspace(0.0, np.pi, 512))
_accel.resolvent_peak_gains(A, B, C, D, zs[:4])  # warm-up / JIT compile
t0 = time.perf_counter()
g = _accel.resolvent_peak_gains(A, B, C, D, zs)
results["sweep_ms"] = (time.perf_counter() - t0) * 1e3
results["sweep_check"] = float(np.sum(g))

print(json.dumps(results))
"""


def run(backend: str) -> dict:
    env = dict(os.environ, SICANCEL_BACKEND=backend)
    proc = subprocess.run(
        [sys.executable, "-c", CHILD], env=env, capture_output=True, text=True
    )
    if proc.returncode != 0:
        raise RuntimeError(f"{backend} run failed:\n{proc.stderr}")
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main() -> int:
    rows = [run("numba"), run("numpy")]
    cols = ("sim_small_ms", "sim_large_ms", "sweep_ms")
    header = ("sim n=12 [ms]", "sim n=200 [ms]", "sweep n=392 [ms]")
    print(f"{'backend':<8} " + " ".join(f"{h:>17}" for h in header))
    for r in rows:
        print(f"{r['backend']:<8} " + " ".join(f"{r[c]:>17.2f}" for c in cols))
    nb, np_ = rows
    print("speedup: " + ", ".join(
        f"{h.split(' [')[0]} x{np_[c] / nb[c]:.1f}" for c, h in zip(cols, header)
    ))
    ok = True
    for check in ("sim_small_check", "sim_large_check", "sweep_check"):
        same = abs(nb[check] - np_[check]) <= 1e-9 * max(1.0, abs(np_[check]))
        ok = ok and same
        print(f"agreement {check}: {'ok' if same else 'MISMATCH'}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
