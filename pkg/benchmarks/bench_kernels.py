"""Compare the numba and pure-numpy batched kernels.

    python3 benchmarks/bench_kernels.py [--batch 4096] [--repeat 20] [--end-to-end]

Kernel timings are taken in one process (both implementations are always
importable).  ``--end-to-end`` also times a short classical search in fresh
subprocesses with ``CHSH_ATLAS_BACKEND`` set to each backend.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from chsh_atlas import kernels
from chsh_atlas._accel import HAVE_NUMBA
from chsh_atlas.quantum import haar_unitary


def _inputs(batch: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(16), size=batch)
    L = rng.normal(size=(batch, 4, 4)) + 1j * rng.normal(size=(batch, 4, 4))
    L /= np.sqrt(np.einsum("nij,nij->n", L, L.conj()).real)[:, None, None]
    u1 = np.stack([haar_unitary(rng) for _ in range(batch)])
    u2 = np.stack([haar_unitary(rng) for _ in range(batch)])
    return p, L, u1, u2


def _time(fn, repeat: int) -> float:
    fn()  # warm-up (and JIT compile)
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench(batch: int, repeat: int) -> list[tuple[str, float, float | None, float]]:
    p, L, u1, u2 = _inputs(batch)
    cases = [
        ("pair_corr", lambda: kernels.pair_corr_np(p, kernels.K_PAIRS),
         lambda: kernels.pair_corr_nb(p, kernels.K_PAIRS)),
        ("quantum_tables", lambda: kernels.quantum_tables_np(L, u1, u2),
         lambda: kernels.quantum_tables_nb(L, u1, u2)),
    ]
    rows = []
    for name, f_np, f_nb in cases:
        t_np = _time(f_np, repeat)
        if HAVE_NUMBA:
            t_nb = _time(f_nb, repeat)
            a, b = f_np(), f_nb()
            a = a if isinstance(a, tuple) else (a,)
            b = b if isinstance(b, tuple) else (b,)
            dev = max(float(np.max(np.abs(x - y))) for x, y in zip(a, b))
        else:
            t_nb, dev = None, float("nan")
        rows.append((name, t_np, t_nb, dev))
    return rows


_E2E = ("from chsh_atlas.extremal import maximize_classical_chsh;"
        "from chsh_atlas.search import SearchConfig;"
        "import time; maximize_classical_chsh(SearchConfig(restarts=2, iterations=10, polish_iterations=2));"
        "t=time.perf_counter(); maximize_classical_chsh(SearchConfig(restarts=32));"
        "print(time.perf_counter()-t)")


def end_to_end() -> dict[str, float]:
    out = {}
    for backend in ("numpy", "numba") if HAVE_NUMBA else ("numpy",):
        env = os.environ | {"CHSH_ATLAS_BACKEND": backend}
        res = subprocess.run([sys.executable, "-c", _E2E], env=env, capture_output=True, text=True, check=True)
        out[backend] = float(res.stdout.strip().splitlines()[-1])
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--batch", type=int, default=4096)
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--end-to-end", action="store_true")
    args = ap.parse_args(argv)

    print(f"batch {args.batch}, best of {args.repeat}, numba available: {HAVE_NUMBA}")
    print(f"{'kernel':<16}{'numpy ms':>10}{'numba ms':>10}{'speedup':>9}{'max |diff|':>12}")
    for name, t_np, t_nb, dev in bench(args.batch, args.repeat):
        nb = f"{1e3 * t_nb:10.3f}" if t_nb is not None else f"{'n/a':>10}"
        sp = f"{t_np / t_nb:8.1f}x" if t_nb else f"{'':>9}"
        print(f"{name:<16}{1e3 * t_np:10.3f}{nb}{sp}{dev:12.2e}")
    if args.end_to_end:
        for backend, t in end_to_end().items():
            print(f"classical search, 32 restarts, backend {backend}: {t:.2f} s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
