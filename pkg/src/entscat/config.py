"""Run configuration for the command-line front end.

A run configuration is a JSON object with the sections ``collision``,
``potential``, ``propagation``, ``vib`` and ``output``.  Every section and key
is optional; missing keys take the defaults in :data:`SCHEMA`, unknown ones
are rejected.  Values are layered as file < environment < command line:

* environment variables ``ENTSCAT_<SECTION>__<KEY>`` (value parsed as JSON,
  falling back to the raw string), e.g. ``ENTSCAT_COLLISION__ENERGY=0.4``;
* ``--set section.key=value`` flags, parsed the same way.

Each override is logged at INFO level.
"""
from __future__ import annotations

import copy
import json
import logging
import math
import os
from dataclasses import dataclass
from pathlib import Path

from .basis import CollisionSpec, parse_pair
from .ccsolve import PropagationConfig
from .errors import ConfigError, InputDomainError
from .pes import PotentialModel, default_model, isotropic_model, load_potential
from .vibwave import VibGridSpec, VibInitialState

log = logging.getLogger(__name__)

CONFIG_SCHEMA = "entscat-run/1"
ENV_PREFIX = "ENTSCAT_"

_NUM = (int, float)
_OPT_NUM = (int, float, type(None))
_OPT_STR = (str, type(None))

# section -> key -> (accepted types, default)
SCHEMA: dict[str, dict[str, tuple]] = {
    "collision": {
        "energy": (_NUM, 4.0),
        "initial": ((str,), "2,0,0/0,0,0"),
        "j_max": ((int,), 2),
        "v_max": ((int,), 0),
        "J_max": ((int,), 10),
        "pair_energy_max": (_OPT_NUM, None),
    },
    "potential": {
        "source": ((str,), "default"),  # default | isotropic | zero | file
        "path": (_OPT_STR, None),
        "epsilon": (_NUM, 25.5),
        "sigma": (_NUM, 2.95),
    },
    "propagation": {
        "R_start": (_NUM, 1.5),
        "R_match": (_OPT_NUM, None),  # None: energy-dependent default
        "step": (_NUM, 0.01),
        "kh_max": (_NUM, 0.02),
        "converge_tol": (_OPT_NUM, None),
    },
    "vib": {
        "R_min": (_NUM, 1.8),
        "R_max": (_NUM, 26.0),
        "n_R": ((int,), 384),
        "r_min": (_NUM, 0.3),
        "r_max": (_NUM, 1.6),
        "n_r": ((int,), 64),
        "v_basis": ((int,), 3),
        "R_analysis": (_NUM, 17.0),
        "absorber_start": (_NUM, 19.0),
        "absorber_strength": (_NUM, 2000.0),
        "dt": (_NUM, 0.1),
        "t_final": (_NUM, 1500.0),
        "R0": (_NUM, 11.0),
        "width": (_NUM, 1.0),
        "alpha": (_NUM, math.pi / 4),
        "energies": ((list,), [350.0, 500.0, 700.0]),
        "betas": ((list,), [0.0, math.pi / 2, math.pi]),
        "channel": ((list,), [1, 1]),
    },
    "output": {
        "path": (_OPT_STR, None),
        "timestamp": ((bool,), True),
    },
}


def defaults() -> dict:
    return {s: {k: copy.deepcopy(v[1]) for k, v in keys.items()} for s, keys in SCHEMA.items()}


def _check_value(section: str, key: str, value):
    types = SCHEMA[section][key][0]
    # bool is an int subclass; only accept it where bool is declared
    if isinstance(value, bool) and bool not in types:
        raise ConfigError(f"{section}.{key}: expected {_tname(types)}, got bool")
    if not isinstance(value, types):
        raise ConfigError(f"{section}.{key}: expected {_tname(types)}, got {type(value).__name__}")
    if isinstance(value, float) and not math.isfinite(value):
        raise ConfigError(f"{section}.{key}: non-finite value")


def _tname(types) -> str:
    return " or ".join("null" if t is type(None) else t.__name__ for t in types)


def _merge(cfg: dict, doc: dict, origin: str) -> None:
    if not isinstance(doc, dict):
        raise ConfigError(f"{origin}: top level must be an object")
    for section, body in doc.items():
        if section == "schema":
            if body != CONFIG_SCHEMA:
                raise ConfigError(f"{origin}: schema {body!r} != {CONFIG_SCHEMA!r}")
            continue
        if section not in SCHEMA:
            raise ConfigError(f"{origin}: unknown section {section!r}")
        if not isinstance(body, dict):
            raise ConfigError(f"{origin}: section {section!r} must be an object")
        for key, value in body.items():
            if key not in SCHEMA[section]:
                raise ConfigError(f"{origin}: unknown key {section}.{key}")
            _check_value(section, key, value)
            cfg[section][key] = value


def _parse_scalar(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _override(cfg: dict, dotted: str, value, origin: str) -> None:
    section, _, key = dotted.partition(".")
    if section not in SCHEMA or key not in SCHEMA.get(section, {}):
        raise ConfigError(f"{origin}: unknown key {dotted!r}")
    _check_value(section, key, value)
    log.info("override %s.%s = %r (from %s)", section, key, value, origin)
    cfg[section][key] = value


def load_config(path: str | os.PathLike | None = None, env: dict | None = None,
                sets: list[str] | None = None) -> dict:
    """Layered configuration dict (file < environment < ``sets``)."""
    cfg = defaults()
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        _merge(cfg, doc, str(path))
    env = os.environ if env is None else env
    for name in sorted(env):
        if not name.startswith(ENV_PREFIX) or "__" not in name:
            continue
        section, _, key = name[len(ENV_PREFIX):].partition("__")
        section = section.lower()
        keys = SCHEMA.get(section, {})
        # exact spelling wins; J_max and j_max differ only by case
        match = [key] if key in keys else [k for k in keys if k.lower() == key.lower()]
        if not match:
            raise ConfigError(f"environment: unknown key {name}")
        if len(match) > 1:
            raise ConfigError(f"environment: {name} is ambiguous ({', '.join(match)}); "
                              f"spell the key exactly, e.g. {ENV_PREFIX}{section.upper()}__{match[0]}")
        _override(cfg, f"{section}.{match[0]}", _parse_scalar(env[name]), f"env {name}")
    for item in sets or []:
        dotted, eq, text = item.partition("=")
        if not eq:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        _override(cfg, dotted.strip(), _parse_scalar(text), "--set")
    return cfg


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration turned into solver and propagator inputs."""

    raw: dict

    @classmethod
    def load(cls, path=None, env=None, sets=None) -> "RunConfig":
        rc = cls(load_config(path, env, sets))
        rc.collision_spec()
        rc.propagation_config()
        return rc

    def collision_spec(self) -> CollisionSpec:
        c = self.raw["collision"]
        try:
            return CollisionSpec(float(c["energy"]), parse_pair(c["initial"]), c["j_max"], c["v_max"],
                                 c["J_max"], pair_energy_max=c["pair_energy_max"])
        except InputDomainError as exc:
            raise ConfigError(f"collision: {exc}") from None

    def propagation_config(self) -> PropagationConfig:
        p = dict(self.raw["propagation"])
        kw = {k: p[k] for k in ("R_start", "step", "kh_max", "converge_tol")}
        if p["R_match"] is not None:
            kw["R_match"] = p["R_match"]
        try:
            return PropagationConfig.default_for(float(self.raw["collision"]["energy"]), **kw)
        except InputDomainError as exc:
            raise ConfigError(f"propagation: {exc}") from None

    def potential(self) -> PotentialModel:
        p = self.raw["potential"]
        src = p["source"]
        if src == "default":
            return default_model()
        if src == "isotropic":
            return isotropic_model(p["epsilon"], p["sigma"])
        if src == "zero":
            return PotentialModel((), name="zero")
        if src == "file":
            if not p["path"]:
                raise ConfigError("potential.path required for source 'file'")
            return load_potential(p["path"])
        raise ConfigError(f"potential.source must be default|isotropic|zero|file, got {src!r}")

    def vib_grid(self) -> VibGridSpec:
        v = self.raw["vib"]
        keys = ("R_min", "R_max", "n_R", "r_min", "r_max", "n_r", "v_basis", "R_analysis",
                "absorber_start", "absorber_strength", "dt", "t_final")
        return VibGridSpec(**{k: v[k] for k in keys})

    def vib_initial(self) -> VibInitialState:
        v = self.raw["vib"]
        try:
            return VibInitialState(alpha=float(v["alpha"]), R0=float(v["R0"]), width=float(v["width"]))
        except InputDomainError as exc:
            raise ConfigError(f"vib: {exc}") from None
