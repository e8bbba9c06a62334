"""Throughput comparison between the compiled kernels and the pure-Python
fallback.

Run as ``python benchmarks/compare_backends.py``.  Exercises the kernel
micro-operations plus one full strategy step loop per backend; the pure
rows still appear when the compiled module is unavailable.
"""

import os
import subprocess
import sys
import time

import numpy as np

from smoclust import _pure

try:
    from smoclust import _speed
except ImportError:
    _speed = None


def bench(label, fn, n):
    start = time.perf_counter()
    fn(n)
    elapsed = time.perf_counter() - start
    rate = n / elapsed
    print(f"  {label:28s} {elapsed * 1e9 / n:10.0f} ns/op   ({rate / 1e6:8.3f} M ops/s)")
    return elapsed


def kernel_suite(mod, n_scale=1):
    rng = mod.Rng(123)

    def uniforms(n):
        for _ in range(n):
            rng.uniform()

    def normals(n):
        for _ in range(n):
            rng.normal()

    def poissons(n):
        for _ in range(n):
            rng.poisson(9.0)

    kinds = np.array([0, 0, 0, 0, 0], dtype=np.int64)
    nb = mod.NBState(kinds, 1e-6, 1.0)
    values = np.array([0.1, -0.4, 0.9, 0.3, -0.2])

    def nb_train(n):
        for _ in range(n):
            nb.train(values, 1, 1.0)

    def nb_score(n):
        for _ in range(n):
            nb.log_scores(values)

    anchor = np.array([0.2, 0.1, -0.3])
    centre = np.zeros(3)

    def skewed(n):
        for _ in range(n):
            mod.skewed_sample(anchor, centre, 1.5, rng)

    base = 200_000 * n_scale
    bench("rng.uniform", uniforms, base * 5)
    bench("rng.normal", normals, base * 2)
    bench("rng.poisson(9)", poissons, base)
    bench("nb.train (5 numeric)", nb_train, base)
    bench("nb.log_scores", nb_score, base)
    bench("skewed_sample (3-d)", skewed, base // 4)


def strategy_suite(backend_env):
    env = dict(os.environ, SMOCLUST_PURE_PYTHON=backend_env)
    code = (
        "import time\n"
        "from smoclust.streams import ArtificialStream\n"
        "from smoclust.approaches import build_strategy\n"
        "from smoclust.core import make_rng\n"
        "import smoclust\n"
        "for kind in ('OOB', 'SMOClust'):\n"
        "    stream = ArtificialStream('StaticIm10_Move3', seed=0, length=5000, dim=2)\n"
        "    strategy = build_strategy(kind, stream.schema(), make_rng('bench', 0))\n"
        "    start = time.perf_counter()\n"
        "    for example in stream:\n"
        "        strategy.train(example)\n"
        "    elapsed = time.perf_counter() - start\n"
        "    label = f'{kind} train loop'\n"
        "    print(f'  {label:28s} {elapsed * 1e6 / 5000:10.1f} us/step')\n"
    )
    sys.stdout.flush()
    subprocess.run([sys.executable, "-c", code], env=env, check=True)


def main():
    print(f"pure backend ({_pure.BACKEND}):")
    kernel_suite(_pure, n_scale=1)
    strategy_suite("1")
    if _speed is None:
        print("\ncompiled backend: not built (pip install -e . rebuilds it)")
        return
    print(f"\ncompiled backend ({_speed.BACKEND}):")
    kernel_suite(_speed, n_scale=5)
    strategy_suite("0")


if __name__ == "__main__":
    main()
