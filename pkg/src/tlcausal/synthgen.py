"""Synthetic spike-train generator with an embedded causal structure.

Simulation rule, per tick: every eligible neuron fires spontaneously with its
noise rate; when a neuron fires at tick ``t``, each of its out-edges schedules
a trigger at ``t + d`` with ``d`` drawn uniformly from
``{delay_min, ..., delay_max}``, and at that tick the child fires with the
edge's trigger probability if eligible.  A neuron that fired at ``t`` is
ineligible for ticks ``t+1 .. t+refractory-1`` and eligible again exactly at
``t + refractory``.  Generation stops at the first tick where cumulative
firings reach the target.

Randomness comes from one numpy PCG64 stream consumed in a fixed order per
tick: spontaneous draws for eligible neurons in ascending neuron index, then
trigger draws in trigger creation order, then delay draws for the tick's
firings in (neuron index, edge declaration) order.  The same seed and config
therefore reproduce the event list bit for bit.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from .errors import DataError, UsageError
from .traces import EventList

__all__ = ["StructureSpec", "GenConfig", "GroundTruth", "preset", "generate"]


@dataclass(frozen=True)
class StructureSpec:
    """Neurons and directed trigger edges (parent, child, trigger_prob)."""

    neurons: tuple
    edges: tuple

    def __post_init__(self):
        neurons = tuple(self.neurons)
        edges = tuple((str(p), str(c), float(q)) for p, c, q in self.edges)
        declared = set(neurons)
        if len(declared) != len(neurons):
            raise DataError("duplicate neuron names")
        for p, c, q in edges:
            if p not in declared or c not in declared:
                raise DataError(f"edge endpoint not declared: {p}->{c}")
            if p == c:
                raise DataError(f"self-edge not allowed: {p}")
            if not 0.0 <= q <= 1.0:
                raise DataError(f"trigger probability out of range: {q}")
        object.__setattr__(self, "neurons", neurons)
        object.__setattr__(self, "edges", edges)


@dataclass(frozen=True)
class GroundTruth:
    """The embedded edge set as ordered (cause, effect) pairs."""

    edges: tuple

    @staticmethod
    def of(structure: StructureSpec) -> "GroundTruth":
        return GroundTruth(tuple((p, c) for p, c, _ in structure.edges))


@dataclass(frozen=True)
class GenConfig:
    """Generator parameters.

    ``spontaneous_rate`` is a probability per neuron per tick; pass a mapping
    to give neurons individual rates (unlisted neurons get 0).
    """

    structure: StructureSpec
    spontaneous_rate: Union[float, Mapping[str, float]]
    refractory: int = 20
    delay_min: int = 20
    delay_max: int = 40
    target_firings: int = 100_000
    seed: int = 0

    def rate_vector(self) -> np.ndarray:
        names = self.structure.neurons
        if isinstance(self.spontaneous_rate, Mapping):
            rates = np.array([float(self.spontaneous_rate.get(n, 0.0))
                              for n in names])
        else:
            rates = np.full(len(names), float(self.spontaneous_rate))
        if ((rates < 0) | (rates > 1)).any():
            raise DataError("spontaneous rate must lie in [0, 1]")
        return rates

    def check(self) -> None:
        if self.delay_min > self.delay_max:
            raise DataError("delay_min must not exceed delay_max")
        if self.delay_min < 1:
            raise DataError("delay_min must be >= 1 (a trigger takes at "
                            "least one tick)")
        if self.refractory < 0:
            raise DataError("refractory period must be >= 0")
        if self.target_firings < 1:
            raise DataError("target_firings must be >= 1")
        if not (self.rate_vector() > 0).any():
            raise DataError("no spontaneous source: nothing would ever fire")


_PRESET_NAMES = ("chain", "fork", "collider", "tree")


def _names(count: int) -> tuple:
    letters = string.ascii_uppercase
    if count <= len(letters):
        return tuple(letters[:count])
    width = len(str(count - 1))
    return tuple(f"n{i:0{width}d}" for i in range(count))


def preset(name: str, size: int = None, trigger_prob: float = 1.0) -> StructureSpec:
    """A deterministic benchmark structure.

    ``chain`` links ``size`` neurons in a line (default 4); ``fork`` is one
    parent with two children; ``collider`` is two parents sharing one child;
    ``tree`` is a complete rooted binary tree of ``size`` levels (default 4:
    15 neurons, 14 edges).  All edges carry ``trigger_prob``.
    """
    if name == "chain":
        n = 4 if size is None else int(size)
        if n < 2:
            raise UsageError("chain preset needs size >= 2")
        names = _names(n)
        edges = [(names[i], names[i + 1], trigger_prob) for i in range(n - 1)]
        return StructureSpec(names, tuple(edges))
    if name == "fork":
        return StructureSpec(("A", "B", "C"),
                             (("A", "B", trigger_prob), ("A", "C", trigger_prob)))
    if name == "collider":
        return StructureSpec(("A", "B", "C"),
                             (("A", "C", trigger_prob), ("B", "C", trigger_prob)))
    if name == "tree":
        depth = 4 if size is None else int(size)
        if depth < 1:
            raise UsageError("tree preset needs size >= 1")
        count = 2 ** depth - 1
        names = _names(count)
        edges = []
        for i in range(count):
            for child in (2 * i + 1, 2 * i + 2):
                if child < count:
                    edges.append((names[i], names[child], trigger_prob))
        return StructureSpec(names, tuple(edges))
    raise UsageError(f"unknown preset {name!r}; expected one of {_PRESET_NAMES}")


def generate(config: GenConfig) -> tuple:
    """Run the simulation; returns ``(EventList, GroundTruth)``.

    Deterministic given the seed.  Raises if nothing could ever fire.
    """
    config.check()
    structure = config.structure
    names = structure.neurons
    n = len(names)
    rates = config.rate_vector()
    out_edges = [[] for _ in range(n)]  # per parent: (child index, prob)
    index = {v: i for i, v in enumerate(names)}
    for p, c, q in structure.edges:
        out_edges[index[p]].append((index[c], q))

    rng = np.random.default_rng(config.seed)
    eligible_at = np.zeros(n, dtype=np.int64)
    pending: dict = {}  # tick -> [(child index, trigger prob)] in creation order
    times: list = []
    fired_idx: list = []
    total = 0
    t = 0
    fired = np.zeros(n, dtype=bool)

    while total < config.target_firings:
        fired[:] = False
        eligible = np.flatnonzero(eligible_at <= t)
        if eligible.size:
            draws = rng.random(eligible.size)
            fired[eligible] = draws < rates[eligible]
        for child, prob in pending.pop(t, ()):
            if eligible_at[child] <= t and rng.random() < prob:
                fired[child] = True
        for i in np.flatnonzero(fired):
            times.append(t)
            fired_idx.append(i)
            total += 1
            eligible_at[i] = t + config.refractory
            for child, prob in out_edges[i]:
                d = int(rng.integers(config.delay_min, config.delay_max + 1))
                pending.setdefault(t + d, []).append((child, prob))
        t += 1

    horizon = t
    records = [(tick, names[i]) for tick, i in zip(times, fired_idx)]
    return EventList.from_records(records, horizon), GroundTruth.of(structure)
