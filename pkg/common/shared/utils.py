"""
Utility functions for unit-tagged configuration values and seeded randomness.
"""

from __future__ import annotations

from typing import Mapping, Tuple

import numpy as np

from .errors import UnitError

FREQUENCY_UNITS: Mapping[str, float] = {
    "Hz": 1.0,
    "kHz": 1e3,
    "MHz": 1e6,
    "GHz": 1e9,
}
VOLTAGE_UNITS: Mapping[str, float] = {
    "V": 1.0,
    "mV": 1e-3,
    "uV": 1e-6,
    "nV": 1e-9,
}
_FAMILIES: Mapping[str, Mapping[str, float]] = {
    "frequency": FREQUENCY_UNITS,
    "voltage": VOLTAGE_UNITS,
}


def split_unit_key(key: str) -> Tuple[str, str]:
    """Split ``"u1_MHz"`` into ``("u1", "MHz")``; untagged keys return an empty tag."""
    name, sep, tag = key.rpartition("_")
    if not sep or not name:
        return key, ""
    return name, tag


def to_base_unit(key: str, value: float, family: str) -> float:
    """Convert a tagged value to Hz or V, raising ``UnitError`` on a bad tag."""
    _, tag = split_unit_key(key)
    factors = _FAMILIES[family]
    if tag not in factors:
        raise UnitError(key, tag, family)
    return float(value) * factors[tag]


def lookup_tagged(
    section: Mapping[str, object], name: str, family: str
) -> float | None:
    """
    Find ``name_<tag>`` in a config section and return the value in base units.

    Returns ``None`` when no key with that stem exists. A key whose stem matches
    but whose tag is not a ``family`` unit raises ``UnitError``.
    """
    for key, value in section.items():
        stem, tag = split_unit_key(str(key))
        if stem == name and tag:
            return to_base_unit(str(key), float(value), family)  # type: ignore[arg-type]
    return None


def make_rng(seed: int | None) -> np.random.Generator:
    """Deterministic generator for every seeded code path."""
    return np.random.default_rng(seed)


__all__ = [
    "FREQUENCY_UNITS",
    "VOLTAGE_UNITS",
    "split_unit_key",
    "to_base_unit",
    "lookup_tagged",
    "make_rng",
]
