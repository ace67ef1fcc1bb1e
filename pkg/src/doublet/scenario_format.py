"""src/doublet/scenario_format.py"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import yaml

from doublet.constants import (
    E_NORM,
    E_SCHED,
    E_SCHEMA,
    EPS_NORM,
    EPS_PARSE_NORM,
    SCHEMA_VERSION,
)
from doublet.core.model import (
    HamiltonianTerm,
    InteractionSchedule,
    MeasurementScenario,
    Observer,
    ScheduleStep,
    StepKind,
)
from doublet.errors import ScenarioError

_LINE = "__line__"

_TOP_KEYS = {
    "schema",
    "name",
    "system",
    "input",
    "pointer_cells",
    "observers",
    "schedule",
    "free_hamiltonian",
    "interaction",
}
_REQUIRED_TOP = ("schema", "system", "observers", "schedule")


class _LineLoader(yaml.SafeLoader):  # pylint: disable=too-many-ancestors
    """Safe loader that stamps every mapping with its 1-based source line."""

    def construct_mapping(self, node: Any, deep: bool = False) -> Dict[Any, Any]:
        mapping = super().construct_mapping(node, deep=deep)
        mapping[_LINE] = node.start_mark.line + 1
        return mapping


def _line(data: Any) -> Optional[int]:
    return data.get(_LINE) if isinstance(data, Mapping) else None


def _mapping(data: Any, what: str, line: Optional[int]) -> Mapping[str, Any]:
    if not isinstance(data, Mapping):
        raise ScenarioError(E_SCHEMA, f"{what} must be a mapping", line)
    return data


def _sequence(data: Any, what: str, line: Optional[int]) -> Sequence[Any]:
    if not isinstance(data, list):
        raise ScenarioError(E_SCHEMA, f"{what} must be a list", line)
    return data


def _check_keys(
    data: Mapping[str, Any], allowed: Sequence[str], required: Sequence[str], what: str
) -> None:
    line = _line(data)
    unknown = sorted(str(k) for k in data if k != _LINE and k not in allowed)
    if unknown:
        raise ScenarioError(E_SCHEMA, f"Unknown {what} keys {unknown}", line)
    for key in required:
        if key not in data:
            raise ScenarioError(E_SCHEMA, f"{what} needs {key!r}", line)


def _real(value: Any, what: str, line: Optional[int]) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(E_SCHEMA, f"{what} must be a number, got {value!r}", line)
    if not math.isfinite(value):
        raise ScenarioError(E_SCHEMA, f"{what} must be finite, got {value!r}", line)
    return float(value)


def _complex(value: Any, what: str, line: Optional[int]) -> complex:
    """Read a bare real or an ``[re, im]`` pair."""
    if isinstance(value, list):
        if len(value) != 2:
            raise ScenarioError(E_SCHEMA, f"{what} must be [re, im]", line)
        return complex(_real(value[0], what, line), _real(value[1], what, line))
    return complex(_real(value, what, line), 0.0)


def _matrix(value: Any, what: str, line: Optional[int]) -> np.ndarray:
    rows = _sequence(value, what, line)
    entries = [
        [_complex(item, what, line) for item in _sequence(row, what, line)]
        for row in rows
    ]
    if not entries or any(len(row) != len(entries) for row in entries):
        raise ScenarioError(E_SCHEMA, f"{what} must be a square matrix", line)
    return np.array(entries, dtype=np.complex128)


def _terms(value: Any, what: str, line: Optional[int]) -> List[HamiltonianTerm]:
    terms = []
    for item in _sequence(value, what, line):
        entry = _mapping(item, what, line)
        _check_keys(entry, ("factors", "matrix"), ("factors", "matrix"), what)
        factors = [str(f) for f in _sequence(entry["factors"], "factors", _line(entry))]
        try:
            matrix = _matrix(entry["matrix"], f"{what} matrix", _line(entry))
            terms.append(HamiltonianTerm(factors, matrix))
        except ScenarioError as exc:
            raise exc.at_line(_line(entry)) from exc
    return terms


def _amplitudes(system: Mapping[str, Any]) -> np.ndarray:
    line = _line(system)
    raw = _sequence(system["amplitudes"], "system.amplitudes", line)
    values = np.array(
        [_complex(v, "amplitude", line) for v in raw], dtype=np.complex128
    )
    weight = float(np.sum(np.abs(values) ** 2))
    if abs(weight - 1.0) > EPS_PARSE_NORM:
        raise ScenarioError(
            E_NORM, f"Amplitudes have Σ|a_i|² = {weight:.9g}, expected 1", line
        )
    if abs(weight - 1.0) > EPS_NORM:
        values = values / math.sqrt(weight)
    return values


def _observers(
    value: Any, line: Optional[int]
) -> Tuple[List[Observer], Dict[str, List[HamiltonianTerm]]]:
    observers: List[Observer] = []
    hamiltonians: Dict[str, List[HamiltonianTerm]] = {}
    for item in _sequence(value, "observers", line):
        entry = _mapping(item, "observer", line)
        _check_keys(
            entry,
            ("label", "eigenvalues", "dimension", "hamiltonian"),
            ("label",),
            "observer",
        )
        where = _line(entry)
        label = str(entry["label"])
        eigenvalues = tuple(
            _real(q, "eigenvalue", where)
            for q in _sequence(entry.get("eigenvalues", []), "eigenvalues", where)
        )
        dimension = entry.get("dimension", 0)
        if isinstance(dimension, bool) or not isinstance(dimension, int):
            raise ScenarioError(E_SCHEMA, "Observer dimension must be an int", where)
        observers.append(Observer(label, eigenvalues, dimension))
        if "hamiltonian" in entry:
            hamiltonians[label] = _terms(entry["hamiltonian"], "hamiltonian", where)
    return observers, hamiltonians


def _kind(value: Any, line: Optional[int]) -> StepKind:
    try:
        return StepKind(value)
    except ValueError as exc:
        raise ScenarioError(E_SCHEMA, f"Unknown step kind {value!r}", line) from exc


def _schedule(
    value: Any, labels: Sequence[str], line: Optional[int]
) -> InteractionSchedule:
    steps: List[ScheduleStep] = []
    for item in _sequence(value, "schedule", line):
        entry = _mapping(item, "schedule step", line)
        _check_keys(
            entry,
            ("kind", "observer", "start", "end"),
            ("kind", "start", "end"),
            "step",
        )
        where = _line(entry)
        observer = entry.get("observer")
        if observer is not None and str(observer) not in labels:
            raise ScenarioError(E_SCHED, f"Unknown observer {observer!r}", where)
        try:
            current = ScheduleStep(
                _kind(entry["kind"], where),
                _real(entry["start"], "start", where),
                _real(entry["end"], "end", where),
                None if observer is None else str(observer),
            )
            if steps:
                InteractionSchedule((steps[-1], current))
        except ScenarioError as exc:
            raise exc.at_line(where) from exc
        steps.append(current)
    return InteractionSchedule(steps)


def scenario_from_dict(data: Mapping[str, Any]) -> MeasurementScenario:
    """
    Build a scenario from a parsed document.

    Args:
        data (Mapping[str, Any]): Document as produced by :func:`scenario_to_dict`
            or loaded from YAML.

    Returns:
        MeasurementScenario: The validated scenario.

    Raises:
        ScenarioError: On schema, normalization or schedule violations,
            anchored at the offending line when it is known.
        CapacityError: If the layout exceeds the dimension cap.
    """
    root = _mapping(data, "A scenario document", None)
    top = _line(root)
    _check_keys(root, tuple(_TOP_KEYS), _REQUIRED_TOP, "scenario")
    if root["schema"] != SCHEMA_VERSION:
        raise ScenarioError(
            E_SCHEMA,
            f"Unsupported schema {root['schema']!r}, expected {SCHEMA_VERSION}",
            top,
        )

    system = _mapping(root["system"], "system", top)
    _check_keys(system, ("label", "amplitudes", "final_map"), ("amplitudes",), "system")
    amplitudes = _amplitudes(system)
    final_map = None
    if system.get("final_map") is not None:
        final_map = _matrix(system["final_map"], "system.final_map", _line(system))

    observers, hamiltonians = _observers(root["observers"], top)
    labels = [o.label for o in observers]
    schedule = _schedule(root["schedule"], labels, top)

    interaction = _mapping(root.get("interaction", {}), "interaction", top)
    _check_keys(interaction, ("mode", "time_step"), (), "interaction")
    time_step = interaction.get("time_step")
    if time_step is not None:
        time_step = _real(time_step, "time_step", _line(interaction))

    free = _terms(root.get("free_hamiltonian", []), "free_hamiltonian", top)

    try:
        return MeasurementScenario(
            amplitudes,
            observers,
            schedule,
            name=str(root.get("name", "scenario")),
            system_label=str(system.get("label", "S")),
            s_final_map=final_map,
            pointer_df_count=root.get("pointer_cells", 1),
            input_kind=str(root.get("input", "pure")),
            interaction_mode=str(interaction.get("mode", "unitary")),
            time_step=time_step,
            free_hamiltonian=free,
            interaction_hamiltonians=hamiltonians,
        )
    except ScenarioError as exc:
        section = system if exc.code == E_NORM else root
        raise exc.at_line(_line(section)) from exc


def parse_scenario(text: str) -> MeasurementScenario:
    """
    Parse scenario YAML text.

    Raises:
        ScenarioError: ``E_SCHEMA`` on malformed YAML or schema violations,
            ``E_NORM`` on non-normalized amplitudes, ``E_SCHED`` on bad
            schedules; all carry the source line when known.
    """
    try:
        data = yaml.load(text, Loader=_LineLoader)  # nosec B506
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = None if mark is None else mark.line + 1
        raise ScenarioError(E_SCHEMA, f"Malformed YAML: {exc}", line) from exc
    return scenario_from_dict(data)


def load_scenario(path: Union[str, Path]) -> MeasurementScenario:
    """Read and parse a scenario file."""
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


def _pair(value: complex) -> List[float]:
    return [float(value.real), float(value.imag)]


def _matrix_rows(matrix: np.ndarray) -> List[List[List[float]]]:
    return [[_pair(v) for v in row] for row in matrix]


def _term_dicts(terms: Sequence[HamiltonianTerm]) -> List[Dict[str, Any]]:
    return [
        {"factors": list(t.factors), "matrix": _matrix_rows(t.matrix)} for t in terms
    ]


def scenario_to_dict(scenario: MeasurementScenario) -> Dict[str, Any]:
    """Return the canonical document of a scenario (schema version included)."""
    system: Dict[str, Any] = {
        "label": scenario.system_label,
        "amplitudes": [_pair(a) for a in scenario.amplitudes],
    }
    if scenario.s_final_map is not None:
        system["final_map"] = _matrix_rows(scenario.s_final_map)

    hamiltonians = scenario.interaction_terms
    observers = []
    for observer in scenario.observers:
        entry: Dict[str, Any] = {
            "label": observer.label,
            "eigenvalues": list(observer.eigenvalues),
        }
        if hamiltonians.get(observer.label):
            entry["hamiltonian"] = _term_dicts(hamiltonians[observer.label])
        observers.append(entry)

    schedule = []
    for step in scenario.schedule:
        item: Dict[str, Any] = {"kind": step.kind.value}
        if step.observer is not None:
            item["observer"] = step.observer
        item["start"] = float(step.t_start)
        item["end"] = float(step.t_end)
        schedule.append(item)

    interaction: Dict[str, Any] = {"mode": scenario.interaction_mode.value}
    if scenario.time_step is not None:
        interaction["time_step"] = float(scenario.time_step)

    document: Dict[str, Any] = {
        "schema": SCHEMA_VERSION,
        "name": scenario.name,
        "system": system,
        "input": scenario.input_kind.value,
        "pointer_cells": scenario.pointer_df_count,
        "observers": observers,
        "schedule": schedule,
        "interaction": interaction,
    }
    if scenario.free_terms:
        document["free_hamiltonian"] = _term_dicts(scenario.free_terms)
    return document


def dump_scenario(scenario: MeasurementScenario) -> str:
    """Serialize a scenario to YAML text that :func:`parse_scenario` reads back."""
    return yaml.safe_dump(scenario_to_dict(scenario), sort_keys=False)


def save_scenario(scenario: MeasurementScenario, path: Union[str, Path]) -> None:
    """Write a scenario file."""
    Path(path).write_text(dump_scenario(scenario), encoding="utf-8")


def scenario_digest(scenario: MeasurementScenario) -> str:
    """SHA-256 of the canonical JSON form of a scenario."""
    canonical = json.dumps(
        scenario_to_dict(scenario), sort_keys=True, separators=(",", ":")
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
