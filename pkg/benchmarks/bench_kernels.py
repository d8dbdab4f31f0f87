"""Compare the GF(2) elimination backends.

    python benchmarks/bench_kernels.py [--repeat N] [--sizes 64 256 1024]

Times ``rref`` on random bit-packed matrices and the batch obstruction pass on
tower levels of the zoo models, once per available backend.
"""

import argparse
import random
import timeit
import warnings

from ctxkit import core
from ctxkit.cohomology import Obstructions
from ctxkit.joint import tower
from ctxkit.model import ModelTable
from ctxkit.zoo import zoo


def random_rows(n, density, seed):
    rng = random.Random(seed)
    rows = []
    for _ in range(n):
        r = 0
        for j in range(n):
            if rng.random() < density:
                r |= 1 << j
        rows.append(r)
    return rows


def bench_rref(sizes, repeat):
    print(f"{'rref':<34}" + "".join(f"{b:>12}" for b in core.available_backends()))
    for n in sizes:
        rows = random_rows(n, 0.1, n)
        times = []
        for b in core.available_backends():
            prev = core.use_backend(b)
            try:
                times.append(min(timeit.repeat(lambda: core.rref(rows, n), number=1, repeat=repeat)))
            finally:
                core.use_backend(prev)
        print(f"  {f'{n}x{n}':<32}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times))


def bench_levels(cases, repeat):
    print(f"{'obstructions':<34}" + "".join(f"{b:>12}" for b in core.available_backends()))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        models = {name: zoo(name).model for name, _ in cases}
    for name, k in cases:
        t = tower(models[name], k).table
        times = []
        for b in core.available_backends():
            prev = core.use_backend(b)
            try:
                # a fresh table per run so nothing is memoised
                run = lambda: Obstructions(ModelTable(t.sizes, t.edges, t.classes)).all_vanishing()  # noqa: E731
                times.append(min(timeit.repeat(run, number=1, repeat=repeat)))
            finally:
                core.use_backend(prev)
        label = f"{name} level {k} ({t.nsections} sections)"
        print(f"  {label:<32}" + "".join(f"{x * 1e3:>10.2f}ms" for x in times))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 256, 1024, 2048])
    args = ap.parse_args()
    if len(core.available_backends()) == 1:
        print("compiled kernel not built; timing the pure-Python backend only")
    bench_rref(args.sizes, args.repeat)
    bench_levels([("hardy", 3), ("table7", 3), ("ks5", 2), ("fig3", 2)], args.repeat)


if __name__ == "__main__":
    main()
