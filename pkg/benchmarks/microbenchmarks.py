import sys
import timeit

from doublet import Doublet
from doublet.core.dual import DualEngine
from doublet.core.model import (
    InteractionSchedule,
    MeasurementScenario,
    expand_pointer_dfs,
)

STANDARD = MeasurementScenario(
    [0.6, 0.8], ["O"], InteractionSchedule.sequential([("interact", "O")])
)
UNDOING = MeasurementScenario(
    [0.6, 0.8],
    ["O"],
    InteractionSchedule.sequential(
        [("interact", "O"), ("reverse", "O"), ("interact", "O")]
    ),
)
WIDE = expand_pointer_dfs(STANDARD, 4)

ENGINE = DualEngine(STANDARD)
UNDOING_ENGINE = DualEngine(UNDOING)
WIDE_ENGINE = DualEngine(WIDE)


def bench_build_engine():
    return DualEngine(STANDARD)


def bench_event():
    return ENGINE.event(17)


def bench_replay():
    return ENGINE.replay(17)


def bench_undoing_event():
    return UNDOING_ENGINE.event(17)


def bench_wide_event():
    return WIDE_ENGINE.event(17)


def bench_wide_replay():
    return WIDE_ENGINE.replay(17)


def bench_facade_distribution():
    return Doublet(STANDARD).distribution()


def run_benchmarks():
    print(f"Python {sys.version}")
    print("-" * 60)
    print(
        f"{'Benchmark':<30} | {'Iterations':<10} | {'Time (s)':<10} | {'Ops/sec':<10}"
    )
    print("-" * 60)

    benchmarks = [
        ("Engine build (2x3)", bench_build_engine, 2_000),
        ("Event (2x3)", bench_event, 50_000),
        ("Replay (2x3)", bench_replay, 5_000),
        ("Event (undoing)", bench_undoing_event, 50_000),
        ("Event (4 cells, 2x81)", bench_wide_event, 50_000),
        ("Replay (4 cells, 2x81)", bench_wide_replay, 2_000),
        ("Facade distribution", bench_facade_distribution, 2_000),
    ]

    for name, func, number in benchmarks:
        total_time = timeit.timeit(func, number=number)
        ops_sec = number / total_time
        print(f"{name:<30} | {number:<10} | {total_time:.4f}     | {ops_sec:,.0f}")


if __name__ == "__main__":
    run_benchmarks()
