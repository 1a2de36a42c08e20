"""Time each hot kernel under every importable backend.

    python benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from mcsunflower import kernels
from mcsunflower.constructions import product_extremal, sum_extremal
from mcsunflower.partition import _membership_tables
from mcsunflower.search import _build_problem, _completion_inputs
from mcsunflower.setfam import all_subsets


def _packed(ft):
    arrays = sorted((f.array for f in ft), key=len)
    offsets = np.zeros(len(arrays) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([len(a) for a in arrays])
    return np.concatenate(arrays), offsets


def workloads():
    sum10 = _packed(sum_extremal(10, 3).tuple)
    sum8k4 = _packed(sum_extremal(8, 4).tuple)
    prod = product_extremal(8, 3).tuple
    full = np.arange(1 << 12, dtype=np.uint64)
    tables = _membership_tables(prod)

    p = _build_problem(4, 3, 3, list(all_subsets(4)), -1, [])
    col, base, avoid = _completion_inputs(p, 0b1000000000000001)
    col = np.array(col, dtype=np.uint64)
    return [
        ("find_sunflower sum(10,3)", lambda m: m.find_sunflower(*sum10, -1)),
        ("find_sunflower sum(8,4)", lambda m: m.find_sunflower(*sum8k4, -1)),
        ("best_completion n=4", lambda m: m.best_completion(col, base, avoid, p.size)),
        ("good_pair_count 2^[12]", lambda m: m.good_pair_count(full, full, (1 << 12) - 1)),
        ("pq_enumeration_total n=8", lambda m: m.pq_enumeration_total(tables, 8)),
        ("count_assignments n=11", lambda m: m.count_assignments(11)),
    ]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    backends = kernels.available_backends()
    names = sorted(backends)
    print(f"{'kernel':<28s}" + "".join(f"{n:>12s}" for n in names)
          + ("     speedup" if len(names) == 2 else ""))
    for label, fn in workloads():
        results = [fn(backends[n]) for n in names]
        if len(results) == 2:
            assert np.array_equal(np.asarray(results[0], dtype=object),
                                  np.asarray(results[1], dtype=object)), label
        times = [best_of(lambda: fn(backends[n]), args.repeat) for n in names]
        row = f"{label:<28s}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[1] / times[0]:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
