import cProfile
import pstats

from doublet.core.dual import DualEngine
from doublet.core.model import InteractionSchedule, MeasurementScenario


def run_profile():
    scenario = MeasurementScenario(
        [0.6, 0.8],
        ["O", "P"],
        InteractionSchedule.sequential([("interact", "O"), ("interact", "P")]),
    )
    engine = DualEngine(scenario)
    # Warmup
    engine.run(100)

    profiler = cProfile.Profile()
    profiler.enable()
    engine.run(100_000)
    profiler.disable()

    with open("profiling.txt", "w") as f:
        stats = pstats.Stats(profiler, stream=f)
        stats.strip_dirs()
        stats.sort_stats(
            "tottime"
        )  # Sort by internal time to find the bottleneck function
        stats.print_stats(30)


if __name__ == "__main__":
    run_profile()
