"""Scenario configuration: JSON schema, dotted overrides and validation."""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .consensus import ConsensusConfig, min_gap_steps
from .errors import ConfigError
from .graph import Graph, algebraic_connectivity, is_connected
from .plant import PlantModel
from .sensing import SensorModel, is_jointly_observable

MODES = ("event-triggered", "every-step", "centralized-oracle")
TRUTH_MODES = ("deterministic-trajectory", "sde-sample")
BUNDLED = {"tracking_n5": "tracking_n5.json"}


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None


def bundled_config(name="tracking_n5"):
    """Raw dict of a config shipped in ``etconsensus/data``."""
    fname = BUNDLED.get(name, name)
    text = resources.files("etconsensus").joinpath("data", fname).read_text()
    return json.loads(text)


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(raw, overrides):
    """Return a copy of ``raw`` with ``key.path=value`` overrides applied.

    Values are parsed as JSON when possible (``25``, ``[1,2]``, ``true``),
    otherwise kept as strings. Integer path parts index into lists.
    """
    out = copy.deepcopy(raw)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, value = item.split("=", 1)
        parts = key.strip().split(".")
        if not all(parts):
            raise ConfigError(f"malformed override key {key!r}")
        node = out
        for part in parts[:-1]:
            node = _descend(node, part, key, create=True)
        last = parts[-1]
        if isinstance(node, list):
            idx = _index(last, key, len(node))
            node[idx] = _parse_value(value)
        elif isinstance(node, dict):
            node[last] = _parse_value(value)
        else:
            raise ConfigError(f"override {key!r} descends into a scalar")
    return out


def _index(part, key, size):
    try:
        idx = int(part)
    except ValueError:
        raise ConfigError(f"override {key!r}: {part!r} is not a list index") from None
    if not 0 <= idx < size:
        raise ConfigError(f"override {key!r}: index {idx} out of range")
    return idx


def _descend(node, part, key, create):
    if isinstance(node, list):
        return node[_index(part, key, len(node))]
    if not isinstance(node, dict):
        raise ConfigError(f"override {key!r} descends into a scalar")
    if part not in node:
        if not create:
            raise ConfigError(f"override {key!r}: unknown key {part!r}")
        node[part] = {}
    return node[part]


def _matrix(value, name):
    try:
        M = np.atleast_2d(np.asarray(value, dtype=float))
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a numeric matrix") from None
    if M.ndim != 2:
        raise ConfigError(f"{name} must be 2-D")
    return M


@dataclass(frozen=True)
class ScenarioConfig:
    graph: Graph
    plant: PlantModel
    sensors: tuple
    consensus: ConsensusConfig
    N: int
    h: float
    T_f: float
    seed: int
    output_stride: int = 1
    truth_mode: str = "deterministic-trajectory"
    comm_mode: str = "event-triggered"
    measurement_noise: bool = True
    raw: dict = None

    @property
    def steps(self):
        return int(round(self.T_f / self.h))

    @property
    def n(self):
        return self.plant.n

    @property
    def gap_steps(self):
        return min_gap_steps(self.consensus.tau_min, self.h)

    def delta_vector(self):
        return np.array([self.consensus.threshold(i) for i in range(1, self.graph.node_count + 1)])

    # --- construction ----------------------------------------------------

    @classmethod
    def from_dict(cls, raw, validate=True):
        try:
            cfg = cls._build(raw)
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed scenario config: {exc!r}") from None
        if validate:
            cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path, overrides=(), validate=True):
        return cls.from_dict(apply_overrides(load_json(path), overrides), validate=validate)

    @classmethod
    def _build(cls, raw):
        g = raw["graph"]
        edges = g.get("edges", [])
        node_count = int(g.get("nodes", len(raw["sensors"])))
        graph = Graph.from_edge_list(node_count, edges)
        pl = raw["plant"]
        plant = PlantModel(
            A=_matrix(pl["A"], "plant.A"),
            B=_matrix(pl["B"], "plant.B"),
            W=_matrix(pl["W"], "plant.W"),
            x0_mean=np.asarray(pl["x0"], dtype=float),
            P0=_matrix(pl["P0"], "plant.P0"),
        )
        sensors = tuple(
            SensorModel(_matrix(s["C"], f"sensors[{i}].C"), _matrix(s["R"], f"sensors[{i}].R"))
            for i, s in enumerate(raw["sensors"])
        )
        sim = raw["sim"]
        h = float(sim["h"])
        cons = raw["consensus"]
        tau = cons.get("tau_min")
        consensus = ConsensusConfig(
            kappa1=float(cons["kappa1"]),
            kappa2=float(cons["kappa2"]),
            delta=cons["delta"],
            tau_min=h if tau is None else float(tau),
        )
        return cls(
            graph=graph,
            plant=plant,
            sensors=sensors,
            consensus=consensus,
            N=int(raw.get("N", node_count)),
            h=h,
            T_f=float(sim["T_f"]),
            seed=int(sim.get("seed", 0)),
            output_stride=int(sim.get("stride", 1)),
            truth_mode=raw.get("truth", "deterministic-trajectory"),
            comm_mode=raw.get("mode", "event-triggered"),
            measurement_noise=bool(sim.get("measurement_noise", True)),
            raw=copy.deepcopy(raw),
        )

    def with_overrides(self, overrides, validate=True):
        return ScenarioConfig.from_dict(apply_overrides(self.raw, overrides), validate=validate)

    # --- validation ------------------------------------------------------

    def validate(self):
        """Raise :class:`ConfigError` on the first violated precondition."""
        Nn = self.graph.node_count
        if self.comm_mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.comm_mode!r}")
        if self.truth_mode not in TRUTH_MODES:
            raise ConfigError(f"truth must be one of {TRUTH_MODES}, got {self.truth_mode!r}")
        if len(self.sensors) != Nn:
            raise ConfigError(f"{len(self.sensors)} sensors declared for {Nn} graph nodes")
        if self.N < 1:
            raise ConfigError("network size N must be positive")
        if len(self.consensus.delta) not in (1, Nn):
            raise ConfigError(f"consensus.delta must be a scalar or have {Nn} entries")
        for i, s in enumerate(self.sensors, start=1):
            if s.n != self.n:
                raise ConfigError(f"sensor {i}: C has {s.n} columns, plant has n={self.n}")
        if not is_connected(self.graph):
            raise ConfigError("communication graph is not connected")
        if not is_jointly_observable(self.plant.A, self.sensors):
            raise ConfigError("plant is not observable from the stacked sensors")
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ConfigError("sim.h must be positive")
        if not self.T_f > 0:
            raise ConfigError("sim.T_f must be positive")
        if abs(self.steps * self.h - self.T_f) > 1e-9 * max(1.0, self.T_f):
            raise ConfigError("sim.T_f must be an integer multiple of sim.h")
        if self.consensus.tau_min < self.h * (1 - 1e-9):
            raise ConfigError("consensus.tau_min must be at least one step h")
        if self.output_stride < 1:
            raise ConfigError("sim.stride must be a positive integer")
        if self.steps % self.output_stride:
            # the recorded grid must end at T_f for the error integral
            raise ConfigError(f"sim.stride must divide the step count {self.steps}")
        return True

    def lambda2(self):
        return algebraic_connectivity(self.graph)
