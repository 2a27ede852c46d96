"""Run configuration files, manifests, and atomic CSV output.

Configs are TOML with [prior], [target], [sampler] and [run] sections (a
manifest JSON produced by an earlier run is also accepted; its echoed
config is used verbatim, which makes reruns reproducible byte for byte).
Every output CSV gets a sibling ``<name>.manifest.json`` echoing the fully
resolved configuration, the seed, the generator family and the wall clock.
"""

from __future__ import annotations

import json
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .spectral import ValidationError
from .sampler import OBSERVABLES, IntegratorParams, SamplerConfig

RNG_FAMILY = "numpy PCG64 via SeedSequence spawning"
SOFTWARE_VERSION = "0.1.0"


class ConfigError(ValueError):
    """Bad or missing configuration; the message names the offending key."""


def _get(section: dict, key: str, kind, default=None, required=False, where=""):
    if key not in section:
        if required:
            raise ConfigError(f"missing required key {where}{key}")
        return default
    val = section[key]
    try:
        if kind is int and isinstance(val, bool):
            raise TypeError
        return kind(val)
    except (TypeError, ValueError):
        raise ConfigError(f"key {where}{key} must be {kind.__name__}, got {val!r}") from None


def load_config(path: str) -> dict:
    """Read a TOML config (or the ``config`` block of a manifest JSON)."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    if path.endswith(".json"):
        with open(path, "rb") as fh:
            doc = json.load(fh)
        return doc.get("config", doc)
    with open(path, "rb") as fh:
        try:
            return tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid TOML: {exc}") from None


def sampler_config_from_dict(doc: dict) -> SamplerConfig:
    """Build a SamplerConfig from the nested config mapping."""
    prior = doc.get("prior", {})
    target = doc.get("target", {})
    sampler = doc.get("sampler", {})
    run = doc.get("run", {})
    interval = _get(prior, "interval_length", float, 100.0, where="prior.")
    n_modes = _get(prior, "n_modes", int, 128, where="prior.")
    sobolev = _get(prior, "sobolev_index", float, 0.0, where="prior.")
    label = _get(target, "label", str, "double-well", where="target.")
    grid = _get(target, "grid_size", int, 4 * n_modes, where="target.")
    h = _get(sampler, "step_size", float, required=True, where="sampler.")
    n_steps = _get(sampler, "n_steps", int, 1, where="sampler.")
    iota = _get(sampler, "iota", float, where="sampler.")
    delta = _get(sampler, "delta", float, where="sampler.")
    if iota is not None and delta is not None:
        raise ConfigError("keys sampler.iota and sampler.delta are mutually exclusive")
    if iota is None and delta is None:
        raise ConfigError("missing required key sampler.iota (or sampler.delta)")
    gamma2 = sampler.get("gamma2")
    if gamma2 is not None:
        gamma2 = np.asarray(gamma2, dtype=float)
    nd_range = sampler.get("n_steps_range")
    if nd_range is not None:
        nd_range = (int(nd_range[0]), int(nd_range[1]))
    observables = tuple(run.get("observables", ("psi", "norm_q_sq")))
    for name in observables:
        if name not in OBSERVABLES:
            raise ConfigError(f"run.observables contains unknown name {name!r}")
    try:
        integ = IntegratorParams(step_size=h, n_steps=n_steps, iota=iota,
                                 delta=delta, gamma2=gamma2)
        return SamplerConfig(
            target_label=label, n_modes=n_modes, grid_size=grid,
            interval_length=interval, integrator=integ,
            iterations=_get(run, "iterations", int, 1000, where="run."),
            seed=_get(run, "seed", int, 0, where="run."),
            observables=observables,
            thinning=_get(run, "thinning", int, 1, where="run."),
            n_steps_range=nd_range,
            sobolev_index=sobolev,
        )
    except ValidationError as exc:
        raise ConfigError(str(exc)) from None


def sampler_config_to_dict(cfg: SamplerConfig) -> dict:
    integ = cfg.integrator
    sampler = {
        "step_size": integ.step_size,
        "n_steps": integ.n_steps,
        "delta": (integ.delta if integ.delta is None or math.isfinite(integ.delta)
                  else "inf"),
    }
    if integ.iota is not None:
        sampler["iota"] = integ.iota
        del sampler["delta"]
    if integ.gamma2 is not None:
        sampler["gamma2"] = list(map(float, integ.gamma2))
    if cfg.n_steps_range is not None:
        sampler["n_steps_range"] = list(cfg.n_steps_range)
    return {
        "prior": {"interval_length": cfg.interval_length, "n_modes": cfg.n_modes,
                  "sobolev_index": cfg.sobolev_index},
        "target": {"label": cfg.target_label, "grid_size": cfg.grid_size},
        "sampler": sampler,
        "run": {"iterations": cfg.iterations, "seed": cfg.seed,
                "observables": list(cfg.observables), "thinning": cfg.thinning},
    }


@dataclass
class RunManifest:
    """Provenance sidecar written next to every output file."""

    command: str
    seed: int
    config: dict
    outputs: list = field(default_factory=list)
    wall_clock_s: float = 0.0
    rng: str = RNG_FAMILY
    version: str = SOFTWARE_VERSION

    def resolved_mixing(self) -> dict:
        """Echo of the iota/delta resolution so e^{-2 delta} = 1 - iota^2 is auditable."""
        sampler = self.config.get("sampler", {})
        out = {}
        if "iota" in sampler:
            iota = float(sampler["iota"])
            out["iota"] = iota
            out["delta"] = "inf" if iota == 1.0 else -0.5 * math.log1p(-iota * iota)
        elif "delta" in sampler and sampler["delta"] not in (None, "inf"):
            delta = float(sampler["delta"])
            out["delta"] = delta
        return out

    def write(self, path: str):
        doc = {
            "command": self.command,
            "version": self.version,
            "rng": self.rng,
            "seed": self.seed,
            "config": self.config,
            "resolved": self.resolved_mixing(),
            "outputs": self.outputs,
            "wall_clock_s": round(self.wall_clock_s, 3),
        }
        atomic_write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def fmt(x) -> str:
    """Decimal text with enough digits to round-trip a float64."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def atomic_write_text(path: str, text: str):
    """Write via a temp file and rename so readers never see partial output."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str, header: list, rows: list):
    """RFC-4180-style CSV: comma separated, header row, LF endings."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(cell if isinstance(cell, str) else fmt(cell)
                              for cell in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def manifest_path(out_path: str) -> str:
    base, _ = os.path.splitext(out_path)
    return base + ".manifest.json"


def timed_manifest(command: str, seed: int, config: dict, outputs: list,
                   t_start: float) -> RunManifest:
    return RunManifest(command=command, seed=seed, config=config,
                       outputs=outputs, wall_clock_s=time.monotonic() - t_start)
