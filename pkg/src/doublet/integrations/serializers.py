"""src/doublet/integrations/serializers.py"""

from __future__ import annotations

from typing import Any

import numpy as np

from doublet.core.dual import EventRecord, OutcomeDistribution
from doublet.core.model import MeasurementScenario
from doublet.experiments.report import ExperimentReport, Summary, Verdict
from doublet.interface import Doublet
from doublet.scenario_format import scenario_to_dict


def doublet_encoder(obj: Any) -> Any:
    """JSON encoder for Doublet objects and the numpy values they carry.

    Intended for use as the ``default`` argument of ``json.dumps``::

        json.dumps(report, default=doublet_encoder)

    Complex numbers become ``[re, im]`` pairs.

    Args:
        obj: The object to serialize.

    Returns:
        A JSON-ready value.

    Raises:
        TypeError: If the object is not a supported type.
    """

    if isinstance(obj, Doublet):
        return obj.for_json()
    if isinstance(obj, MeasurementScenario):
        return scenario_to_dict(obj)
    if isinstance(obj, (ExperimentReport, EventRecord, Verdict, Summary)):
        return obj.to_dict()
    if isinstance(obj, OutcomeDistribution):
        return obj.weights.tolist()
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return np.stack([obj.real, obj.imag], axis=-1).tolist()
        return obj.tolist()
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")
