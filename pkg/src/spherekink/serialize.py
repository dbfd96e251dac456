"""Deterministic JSON for profiles.

The writer is hand-rolled so that output bytes depend only on the values:
floats are always rendered with %.17g (enough digits for exact round-trip),
keys keep insertion order, and there is no whitespace variation.  Reading
goes through the standard json module.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .core import NuPerturbation, ProblemParams, Profile


def format_float(x: float) -> str:
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        raise ValueError("non-finite values are not serialisable")
    return "%.17g" % x


def dumps(obj) -> str:
    """Serialise dicts/lists/scalars to JSON with %.17g floats."""
    parts: list[str] = []
    _write(obj, parts)
    return "".join(parts)


def _write(obj, parts):
    if obj is None:
        parts.append("null")
    elif obj is True:
        parts.append("true")
    elif obj is False:
        parts.append("false")
    elif isinstance(obj, str):
        parts.append(json.dumps(obj, ensure_ascii=True))
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        parts.append(format_float(obj))
    elif isinstance(obj, dict):
        parts.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if not isinstance(k, str):
                raise TypeError("JSON object keys must be strings")
            if i:
                parts.append(",")
            parts.append(json.dumps(k, ensure_ascii=True))
            parts.append(":")
            _write(v, parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        parts.append("[")
        for i, v in enumerate(obj):
            if i:
                parts.append(",")
            _write(v, parts)
        parts.append("]")
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


def profile_to_doc(prof: Profile) -> dict:
    """Plain-dict form of a profile.

    nu is stored as its values sampled on the profile grid (null when the
    problem has none); the perturbation is piecewise linear, so reading the
    document back reproduces it exactly at the stored nodes.
    """
    nu = None if prof.params.nu is None else prof.params.nu(prof.grid)
    return {
        "m": prof.params.m,
        "omega": prof.params.omega,
        "nu": nu,
        "grid": prof.grid,
        "h": prof.h,
        "dh": prof.dh,
        "symmetry_class": prof.symmetry_class,
        "residual_norm": prof.residual_norm,
        "zero_count": prof.zero_count,
        "provenance": prof.provenance,
    }


def profile_from_doc(doc: dict) -> Profile:
    grid = np.asarray(doc["grid"], dtype=float)
    nu_values = doc.get("nu")
    nu = None
    if nu_values is not None:
        nu = NuPerturbation(grid, np.asarray(nu_values, dtype=float))
    params = ProblemParams(int(doc["m"]), float(doc["omega"]), nu)
    return Profile(grid,
                   np.asarray(doc["h"], dtype=float),
                   np.asarray(doc["dh"], dtype=float),
                   params,
                   symmetry_class=str(doc["symmetry_class"]),
                   residual_norm=float(doc["residual_norm"]),
                   zero_count=int(doc["zero_count"]),
                   provenance=str(doc.get("provenance", "")))


def save_profile(prof: Profile, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write(dumps(profile_to_doc(prof)))
        f.write("\n")


def load_profile(path) -> Profile:
    with open(path, "r", encoding="ascii") as f:
        return profile_from_doc(json.load(f))
