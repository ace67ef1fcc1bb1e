"""tests/integration/test_serializers.py"""

import json

import numpy as np
import pytest

from doublet import Doublet
from doublet.core.dual import DualEngine, OutcomeDistribution
from doublet.experiments.report import Summary, Verdict
from doublet.integrations.serializers import doublet_encoder
from doublet.scenario_format import scenario_from_dict


class TestDoubletEncoderDomain:
    """Tests for doublet_encoder with Doublet objects."""

    def test_encodes_doublet(self, binary_scenario):
        doublet = Doublet(binary_scenario, 5)
        parsed = json.loads(json.dumps({"run": doublet}, default=doublet_encoder))
        assert parsed["run"]["seed"] == 5
        assert parsed["run"]["digest"] == doublet.digest

    def test_scenario_survives_json(self, binary_scenario):
        text = json.dumps(binary_scenario, default=doublet_encoder)
        assert scenario_from_dict(json.loads(text)) == binary_scenario

    def test_event_record(self, binary_scenario):
        record = DualEngine(binary_scenario).event(0)
        parsed = json.loads(json.dumps(record, default=doublet_encoder))
        assert parsed == record.to_dict()

    def test_report(self, binary_scenario):
        report = Doublet(binary_scenario).run("interference")
        parsed = json.loads(json.dumps(report, default=doublet_encoder))
        assert parsed["experiment"] == "interference"
        assert parsed["passed"] is True
        assert len(parsed["verdicts"]) == 3

    def test_verdict_and_summary(self):
        verdict = Verdict("collapse.no_ready", "O", 0.0, 0.0, 0.0)
        summary = Summary("q.O", 1.64, 0.01, 100)
        assert doublet_encoder(verdict)["passed"] is True
        assert doublet_encoder(summary)["count"] == 100

    def test_distribution(self):
        assert doublet_encoder(OutcomeDistribution([0.0, 0.36, 0.64])) == [
            0.0,
            0.36,
            0.64,
        ]


class TestDoubletEncoderNumbers:
    """Tests for doublet_encoder with numpy and complex values."""

    @pytest.mark.parametrize(
        "value, expected",
        [
            (1 + 2j, [1.0, 2.0]),
            (np.complex128(0.6j), [0.0, 0.6]),
            (np.bool_(True), True),
            (np.int64(3), 3),
            (np.float32(0.5), 0.5),
            (np.array([1, 2]), [1, 2]),
            (np.array([1j, 2.0]), [[0.0, 1.0], [2.0, 0.0]]),
        ],
    )
    def test_values(self, value, expected):
        assert doublet_encoder(value) == expected

    def test_nested_numpy_in_json_dumps(self):
        payload = {"weights": np.array([0.36, 0.64]), "count": np.int64(2)}
        parsed = json.loads(json.dumps(payload, default=doublet_encoder))
        assert parsed == {"weights": [0.36, 0.64], "count": 2}


class TestDoubletEncoderUnsupported:
    """Tests for doublet_encoder with unsupported types."""

    @pytest.mark.parametrize("value", [object(), {1, 2}, b"bytes"])
    def test_raises_type_error(self, value):
        with pytest.raises(TypeError, match="not JSON serializable"):
            doublet_encoder(value)

    def test_json_dumps_propagates(self):
        with pytest.raises(TypeError):
            json.dumps({"x": object()}, default=doublet_encoder)
