"""src/doublet/core/streams.py"""

from __future__ import annotations

from typing import Any, Dict

import numpy as np

from doublet.constants import validate_seed

# Each event owns the counter range starting at ``event_index << 128``.
_EVENT_SHIFT = 128
_WORD = (1 << 64) - 1


def _check_index(event_index: int) -> None:
    if isinstance(event_index, bool) or not isinstance(event_index, int):
        raise ValueError(f"Event index must be int, got {type(event_index).__name__}")
    if not 0 <= event_index < 1 << (256 - _EVENT_SHIFT):
        raise ValueError(f"Event index must be in [0, 2**128), got {event_index}")


def event_generator(master_seed: int, event_index: int) -> np.random.Generator:
    """
    Return the random stream of one event.

    The stream is a Philox counter-based generator keyed by the master seed,
    with the event index placed in the upper half of the 256-bit counter, so
    any event can be regenerated on its own and on any worker.

    Args:
        master_seed (int): 64-bit master seed of the run.
        event_index (int): Zero-based event index.

    Returns:
        np.random.Generator: Generator positioned at the start of the event.

    Raises:
        ValueError: If the seed is not a 64-bit unsigned integer or the index
            is negative.
    """
    validate_seed(master_seed)
    _check_index(event_index)
    bit_generator = np.random.Philox(
        key=master_seed, counter=event_index << _EVENT_SHIFT
    )
    return np.random.Generator(bit_generator)


class EventStreams:
    """
    The event streams of one master seed, served from a single generator.

    :meth:`at` moves the shared Philox counter to the start of an event, so
    it yields the same numbers as :func:`event_generator` without building a
    new generator per event. The returned generator is only valid until the
    next call.
    """

    __slots__ = ("_bit_generator", "_generator", "_state", "_counter")

    def __init__(self, master_seed: int) -> None:
        """
        Initialize the streams.

        Raises:
            ValueError: If the seed is not a 64-bit unsigned integer.
        """
        validate_seed(master_seed)
        self._bit_generator = np.random.Philox(key=master_seed)
        self._generator = np.random.Generator(self._bit_generator)
        # A fresh state: empty buffer, counter at zero.
        self._state: Dict[str, Any] = self._bit_generator.state
        self._counter = self._state["state"]["counter"]

    def at(self, event_index: int) -> np.random.Generator:
        """Return the shared generator positioned at the start of ``event_index``.

        Raises:
            ValueError: If the index is negative or not below ``2**128``.
        """
        _check_index(event_index)
        self._counter[2] = event_index & _WORD
        self._counter[3] = event_index >> 64
        self._bit_generator.state = self._state
        return self._generator
