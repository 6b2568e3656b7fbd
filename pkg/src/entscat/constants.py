"""Unit constants and default molecular data.

Energies are in cm^-1, lengths in angstrom, masses in amu and times in fs.
The values live in a small JSON file so that a run can pin them; the path can
be overridden with the ``ENTSCAT_CONSTANTS`` environment variable.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ConfigError

SCHEMA = "entscat-constants/1"
ENV_VAR = "ENTSCAT_CONSTANTS"
REQUIRED_KEYS = ("hbar2_over_2amuA2_cm1", "mass_H2_amu", "B_cm1", "vib_spacing_cm1")


@dataclass(frozen=True)
class Constants:
    hbar2_over_2amuA2_cm1: float
    mass_H2_amu: float
    B_cm1: float
    vib_spacing_cm1: float
    hbar_cm1_fs: float = 5308.837458876145
    mass_H_amu: float = 1.00794

    @property
    def mu_H2_H2(self) -> float:
        """Reduced mass of two H2 molecules (amu)."""
        return self.mass_H2_amu / 2


def load_constants(path: str | os.PathLike | None = None) -> Constants:
    """Read a constants file; default is ``$ENTSCAT_CONSTANTS`` or the packaged one."""
    if path is None:
        path = os.environ.get(ENV_VAR)
    if path is None:
        text = resources.files("entscat").joinpath("data/constants.json").read_text()
    else:
        text = Path(path).read_text()
    raw = json.loads(text)
    if raw.get("schema") != SCHEMA:
        raise ConfigError(f"constants file schema {raw.get('schema')!r} != {SCHEMA!r}")
    missing = [k for k in REQUIRED_KEYS if k not in raw]
    if missing:
        raise ConfigError(f"constants file lacks keys {missing}")
    known = set(Constants.__dataclass_fields__)
    return Constants(**{k: float(v) for k, v in raw.items() if k in known})


DEFAULT = load_constants()
