import sys

from pympler import asizeof

from doublet import Doublet
from doublet.core.dual import DualEngine, DualState
from doublet.core.model import (
    InteractionSchedule,
    MeasurementScenario,
    expand_pointer_dfs,
)


def run_memory_bench():
    print(f"Python {sys.version}")
    print("-" * 60)
    print(f"{'Object Type':<24} | {'Size (bytes)':<12} | {'Notes':<20}")
    print("-" * 60)

    scenario = MeasurementScenario(
        [0.6, 0.8], ["O"], InteractionSchedule.sequential([("interact", "O")])
    )
    rows = [
        ("MeasurementScenario", scenario, "__slots__ optimized"),
        ("DualState (2x3)", DualState.initial(scenario), "vector + 1 record"),
        ("DualEngine (2x3)", DualEngine(scenario), "cached trajectory"),
        ("Doublet (Facade)", Doublet(scenario), "lazy engine"),
    ]
    wide = expand_pointer_dfs(scenario, 4)
    rows.append(("DualEngine (2x81)", DualEngine(wide), "4 pointer cells"))
    record = DualEngine(scenario).event(0)
    rows.append(("EventRecord", record, "per event"))

    for name, obj, note in rows:
        print(f"{name:<24} | {asizeof.asizeof(obj):<12} | {note}")


if __name__ == "__main__":
    run_memory_bench()
