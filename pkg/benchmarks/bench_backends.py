"""Compare the compiled kernel lane against the pure-numpy fallback.

Micro-benchmarks hit the hot kernels directly (both lanes in-process);
the end-to-end row runs full indicator evaluation in a subprocess per
lane so backend selection happens at import like in real use.

Usage: python benchmarks/bench_backends.py [--repeat 5] [--skip-e2e]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from tegnas.numkit import _backend_py as py_lane

try:
    from tegnas.numkit import _kernels as cy_lane
except ImportError:
    cy_lane = None


def timeit(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def kernel_rows(repeat: int):
    rng = np.random.default_rng(0)
    x = rng.normal(size=(64, 8, 8, 8))
    w = rng.normal(size=(8, 8, 3, 3))
    g = rng.normal(size=(64, 8, 8, 8))
    sym = rng.normal(size=(96, 96))
    sym = sym + sym.T

    cases = [
        ("conv2d_forward 64x8x8x8 k3", lambda k: k.conv2d_forward(x, w)),
        ("conv2d_grad_input", lambda k: k.conv2d_grad_input(g, w)),
        (
            "conv2d_grad_weight_batched",
            lambda k: k.conv2d_grad_weight_batched(x, g, 3, 3),
        ),
        ("avgpool3x3_forward", lambda k: k.avgpool3x3_forward(x)),
        (
            "jacobi_eigh n=96",
            lambda k: k.jacobi_eigh(sym.copy(), 1e-12, 60),
        ),
    ]
    for name, call in cases:
        t_py = timeit(lambda: call(py_lane), repeat)
        if cy_lane is not None:
            t_cy = timeit(lambda: call(cy_lane), repeat)
            yield name, t_py, t_cy
        else:
            yield name, t_py, None


E2E_SNIPPET = """
import time
from tegnas import netgen as ng, indicators as ind
from tegnas.data import BlobDataset, DataConfig
from tegnas.numkit import backend_name

space = ng.cell201()
arch = ng.arch_from_string(
    "|nor_conv_3x3~0|+|skip_connect~0|nor_conv_1x1~1|"
    "+|avg_pool_3x3~0|none~1|nor_conv_3x3~2|", space)
data = BlobDataset(DataConfig())
cfg = ind.IndicatorConfig(base_seed=0)
ind.evaluate(arch, space, data, cfg)  # warm
t0 = time.perf_counter()
rep = ind.evaluate(arch, space, data, cfg)
print(f"{backend_name()} {time.perf_counter() - t0:.4f} {rep.kappa:.6g}")
"""


def e2e_row(lane: str) -> str:
    env = dict(os.environ, TEGNAS_BACKEND=lane)
    out = subprocess.run(
        [sys.executable, "-c", E2E_SNIPPET],
        capture_output=True,
        text=True,
        env=env,
    )
    if out.returncode != 0:
        return f"{lane}: failed ({out.stderr.strip().splitlines()[-1]})"
    return out.stdout.strip()


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-e2e", action="store_true")
    args = ap.parse_args()

    if cy_lane is None:
        print("compiled lane not built (TEGNAS_NO_EXT or no compiler);"
              " timing numpy lane only\n")

    print(f"{'kernel':<34} {'numpy':>10} {'compiled':>10} {'speedup':>8}")
    for name, t_py, t_cy in kernel_rows(args.repeat):
        if t_cy is None:
            print(f"{name:<34} {t_py * 1e3:>8.2f}ms {'-':>10} {'-':>8}")
        else:
            print(
                f"{name:<34} {t_py * 1e3:>8.2f}ms {t_cy * 1e3:>8.2f}ms"
                f" {t_py / t_cy:>7.1f}x"
            )

    if not args.skip_e2e:
        print("\nend-to-end evaluate (cell201 arch, 3 repeats):")
        print("  numpy    ", e2e_row("python"))
        if cy_lane is not None:
            print("  compiled ", e2e_row("compiled"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
