"""Time the dense verifier with the numba kernels and with the numpy fallback.

Each backend runs in its own interpreter because the choice is made at import
time from PAULIFORGE_NO_NUMBA.  The first check in each process warms up
(and for numba, compiles or loads the cached kernels) and is not timed.

    python3 benchmarks/bench_dense.py [--repeat 3]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

CASES = [("ZZZ", "0.3"), ("XZYZ", "pi/8"), ("YXZIZ", "1.234"), ("XYZZY", "0.3")]

WORKER = r"""
import json, sys, time
from pauliforge.decompose import decompose
from pauliforge.pauli import Angle
from pauliforge.verify import backend_name, check_equivalence, target_exponential

cases, repeat = json.loads(sys.argv[1]), int(sys.argv[2])

def once(p, t):
    a = Angle.parse(t)
    c, u = decompose(p, a), target_exponential(p, a)
    start = time.perf_counter()
    v = check_equivalence(c, u)
    return time.perf_counter() - start, v

once("ZZ", "0.3")
rows = []
for p, t in cases:
    times = []
    for _ in range(repeat):
        dt, v = once(p, t)
        times.append(dt)
    rows.append({"pauli": p, "theta": t, "branches": v.branches, "equivalent": v.equivalent, "seconds": min(times)})
print(json.dumps({"backend": backend_name(), "rows": rows}))
"""


def run_backend(no_numba: bool, repeat: int) -> dict:
    env = dict(os.environ)
    env.pop("PAULIFORGE_NO_NUMBA", None)
    if no_numba:
        env["PAULIFORGE_NO_NUMBA"] = "1"
    out = subprocess.run(
        [sys.executable, "-c", WORKER, json.dumps(CASES), str(repeat)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(out.stdout)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    fast = run_backend(False, args.repeat)
    slow = run_backend(True, args.repeat)
    print(f"{'pauli':<8}{'theta':<8}{'branches':>10}{fast['backend']:>12}{slow['backend']:>12}{'speedup':>10}")
    for a, b in zip(fast["rows"], slow["rows"]):
        if a["equivalent"] != b["equivalent"] or a["branches"] != b["branches"]:
            print(f"backends disagree on {a['pauli']} {a['theta']}", file=sys.stderr)
            return 1
        print(f"{a['pauli']:<8}{a['theta']:<8}{a['branches']:>10}{a['seconds']:>11.3f}s{b['seconds']:>11.3f}s"
              f"{b['seconds'] / a['seconds']:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
