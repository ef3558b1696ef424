"""Discrete structural causal models: interventions, exact inference, sampling.

A network is a DAG over finite-domain variables with one conditional
probability table (CPT) per variable.  Variable values are the 1-based
integer labels ``{1, ..., k}``; all internal indexing is 0-based.  A
designated ordered subset of variables (the reward parents) defines the
joint "parent assignment" whose distribution under an intervention is the
quantity causal bandit agents consume.
"""

from __future__ import annotations

import itertools
import json
from bisect import bisect_right
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

ROW_SUM_TOL = 1e-9


@dataclass(frozen=True)
class Variable:
    name: str
    domain_size: int


@dataclass(frozen=True)
class Intervention:
    """Partial assignment forced onto intervenable variables (may be empty).

    ``assignments`` maps variable index to the forced value label (1-based).
    """

    assignments: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "assignments", dict(self.assignments))

    def __len__(self) -> int:
        return len(self.assignments)


@dataclass(frozen=True)
class ParentAssignment:
    """One joint value configuration of the reward parents.

    ``index`` is the dense mixed-radix code of ``values`` (first parent most
    significant); ``values`` are 1-based labels in reward-parent order.
    """

    index: int
    values: tuple[int, ...]


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    problems: tuple[str, ...]


class DiscreteNetwork:
    """Immutable discrete causal model.

    Parameters
    ----------
    variables:
        Ordered variable descriptors (``Variable`` or ``(name, domain_size)``).
    parents:
        Per-variable tuple of parent indices.  The order fixes CPT row
        indexing: rows are mixed-radix over parent values with the first
        listed parent most significant.
    cpts:
        Per-variable array of shape ``(prod(parent domains), domain_size)``;
        each row is the conditional distribution of the variable.
    reward_parents:
        Ordered variable indices whose joint value is observed each round.
    intervenable:
        Variable indices that may appear in interventions.
    """

    def __init__(
        self,
        variables: Sequence[Variable | tuple[str, int]],
        parents: Sequence[Sequence[int]],
        cpts: Sequence[np.ndarray | Sequence[Sequence[float]]],
        reward_parents: Sequence[int],
        intervenable: Sequence[int],
        name: str = "network",
    ):
        self.name = name
        self.variables = tuple(
            v if isinstance(v, Variable) else Variable(*v) for v in variables
        )
        if len(parents) != len(self.variables) or len(cpts) != len(self.variables):
            raise ValueError("parents and cpts must list one entry per variable")
        self.parents = tuple(tuple(int(p) for p in ps) for ps in parents)
        self.cpts = tuple(np.asarray(c, dtype=float) for c in cpts)
        for c in self.cpts:
            c.flags.writeable = False
        self.reward_parents = tuple(int(i) for i in reward_parents)
        self.intervenable = tuple(sorted(int(i) for i in set(intervenable)))
        self._index_by_name = {v.name: i for i, v in enumerate(self.variables)}

        self._topo_order = _topological_order(self.parents, len(self.variables))
        # Mixed-radix strides for CPT row lookup, first parent most significant.
        self._parent_strides: list[tuple[int, ...]] = []
        for ps in self.parents:
            strides = []
            acc = 1
            for p in reversed(ps):
                strides.append(acc)
                if 0 <= p < len(self.variables):
                    acc *= self.variables[p].domain_size
            self._parent_strides.append(tuple(reversed(strides)))
        # Strides for the reward-parent assignment index.
        strides = []
        acc = 1
        for p in reversed(self.reward_parents):
            strides.append(acc)
            acc *= self.variables[p].domain_size
        self._z_strides = tuple(reversed(strides))
        self.k_z = acc if self.reward_parents else 1
        # Cumulative CPT rows as plain lists: fast scalar inverse-CDF sampling.
        self._cum_rows = [
            [list(np.cumsum(row)) for row in cpt] if cpt.ndim == 2 else []
            for cpt in self.cpts
        ]

    # -- small helpers -----------------------------------------------------

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    def index_of(self, variable_name: str) -> int:
        return self._index_by_name[variable_name]

    def intervention(self, by_name: Mapping[str, int]) -> Intervention:
        """Build an intervention from a name → value-label mapping."""
        return Intervention({self.index_of(k): v for k, v in by_name.items()})

    def topological_order(self) -> tuple[int, ...]:
        if self._topo_order is None:
            raise ValueError(f"network '{self.name}' contains a cycle")
        return self._topo_order

    def parent_row_index(self, var: int, codes: Sequence[int]) -> int:
        """CPT row for ``var`` given 0-based codes of all variables."""
        row = 0
        for p, s in zip(self.parents[var], self._parent_strides[var]):
            row += codes[p] * s
        return row

    def encode_parent_values(self, values: Sequence[int]) -> int:
        """Mixed-radix index of 1-based reward-parent value labels."""
        idx = 0
        for v, s in zip(values, self._z_strides):
            idx += (v - 1) * s
        return idx

    def decode_parent_index(self, index: int) -> tuple[int, ...]:
        values = []
        for p, s in zip(self.reward_parents, self._z_strides):
            code = (index // s) % self.variables[p].domain_size
            values.append(code + 1)
        return tuple(values)


def _topological_order(parents, n) -> tuple[int, ...] | None:
    """Kahn's algorithm; None when the edge relation has a cycle."""
    for ps in parents:
        for p in ps:
            if not (0 <= p < n):
                return None
    remaining_deps = [len(set(ps)) for ps in parents]
    children: list[list[int]] = [[] for _ in range(n)]
    for v, ps in enumerate(parents):
        for p in set(ps):
            children[p].append(v)
    ready = [v for v in range(n) if remaining_deps[v] == 0]
    order: list[int] = []
    while ready:
        v = ready.pop()
        order.append(v)
        for c in children[v]:
            remaining_deps[c] -= 1
            if remaining_deps[c] == 0:
                ready.append(c)
    if len(order) != n:
        return None
    return tuple(sorted(order, key=lambda v: (_depth(v, parents, {}), v)))


def _depth(v, parents, memo) -> int:
    if v in memo:
        return memo[v]
    memo[v] = 0
    d = 1 + max((_depth(p, parents, memo) for p in parents[v]), default=-1)
    memo[v] = d
    return d


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def validate(network: DiscreteNetwork) -> ValidationReport:
    """Check structural invariants; diagnostics are the return value."""
    problems: list[str] = []
    n = network.n_variables
    for v, var in enumerate(network.variables):
        if var.domain_size < 1:
            problems.append(f"variable '{var.name}' has domain size {var.domain_size}")
    bad_refs = False
    for v, ps in enumerate(network.parents):
        for p in ps:
            if not (0 <= p < n):
                problems.append(
                    f"variable '{network.variables[v].name}' references unknown parent index {p}"
                )
                bad_refs = True
    if not bad_refs and network._topo_order is None:
        problems.append("cycle detected in edge relation")
    for v, cpt in enumerate(network.cpts):
        name = network.variables[v].name
        if bad_refs and any(not (0 <= p < n) for p in network.parents[v]):
            continue
        rows = int(np.prod([network.variables[p].domain_size for p in network.parents[v]])) if network.parents[v] else 1
        if cpt.ndim != 2 or cpt.shape != (rows, network.variables[v].domain_size):
            problems.append(
                f"cpt for '{name}' has shape {cpt.shape}, expected ({rows}, {network.variables[v].domain_size})"
            )
            continue
        if np.any(cpt < 0):
            problems.append(f"cpt for '{name}' has negative entries")
        for r, s in enumerate(cpt.sum(axis=1)):
            if abs(s - 1.0) > ROW_SUM_TOL:
                problems.append(f"cpt for '{name}', row {r}: row sums to {s:.6g}")
    if not network.reward_parents:
        problems.append("reward_parents is empty")
    for p in network.reward_parents:
        if not (0 <= p < n):
            problems.append(f"reward parent index {p} is not a declared variable")
    if len(set(network.reward_parents)) != len(network.reward_parents):
        problems.append("reward_parents contains duplicates")
    for p in network.intervenable:
        if not (0 <= p < n):
            problems.append(f"intervenable index {p} is not a declared variable")
    return ValidationReport(ok=not problems, problems=tuple(problems))


def check_intervention(network: DiscreteNetwork, a: Intervention) -> None:
    """Raise ValueError unless ``a`` is legal for ``network``."""
    for var, value in a.assignments.items():
        if not (0 <= var < network.n_variables):
            raise ValueError(f"intervention references unknown variable index {var}")
        if var not in network.intervenable:
            raise ValueError(
                f"variable '{network.variables[var].name}' is not intervenable"
            )
        if not (1 <= value <= network.variables[var].domain_size):
            raise ValueError(
                f"value {value} outside domain of '{network.variables[var].name}' "
                f"(1..{network.variables[var].domain_size})"
            )


# ---------------------------------------------------------------------------
# Parent assignments
# ---------------------------------------------------------------------------


def enumerate_parent_assignments(network: DiscreteNetwork) -> list[ParentAssignment]:
    """All joint reward-parent configurations in mixed-radix order."""
    domains = [
        range(1, network.variables[p].domain_size + 1) for p in network.reward_parents
    ]
    out = []
    for i, values in enumerate(itertools.product(*domains)):
        out.append(ParentAssignment(index=i, values=values))
    return out


def _mutilated_closure(network: DiscreteNetwork, fixed: Mapping[int, int]) -> list[int]:
    """Ancestors of the reward parents (inclusive) after edge removal at
    intervened variables, in topological order."""
    seen: set[int] = set()
    stack = list(network.reward_parents)
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        if v not in fixed:
            stack.extend(network.parents[v])
    return [v for v in network.topological_order() if v in seen]


def parent_distribution(network: DiscreteNetwork, a: Intervention) -> np.ndarray:
    """Exact distribution of the reward-parent assignment under ``do(a)``.

    Enumerates joint values of the non-intervened ancestors of the reward
    parents on the mutilated graph and accumulates CPT products into a
    length-``k_z`` probability vector.
    """
    check_intervention(network, a)
    fixed = {v: val - 1 for v, val in a.assignments.items()}
    closure = _mutilated_closure(network, fixed)
    free = [v for v in closure if v not in fixed]
    codes = [0] * network.n_variables
    for v, c in fixed.items():
        codes[v] = c
    out = np.zeros(network.k_z)
    z_vars = network.reward_parents
    z_strides = network._z_strides
    free_domains = [range(network.variables[v].domain_size) for v in free]
    for combo in itertools.product(*free_domains):
        for v, c in zip(free, combo):
            codes[v] = c
        p = 1.0
        for v in free:
            p *= network.cpts[v][network.parent_row_index(v, codes), codes[v]]
        z = 0
        for v, s in zip(z_vars, z_strides):
            z += codes[v] * s
        out[z] += p
    return out


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def sample(
    network: DiscreteNetwork, a: Intervention, rng: np.random.Generator
) -> np.ndarray:
    """Ancestral sample of the full joint assignment (1-based labels) on the
    mutilated graph; intervened variables take their forced values."""
    check_intervention(network, a)
    codes = [0] * network.n_variables
    fixed = {v: val - 1 for v, val in a.assignments.items()}
    order = network.topological_order()
    draws = rng.random(len(order))
    for v, u in zip(order, draws):
        if v in fixed:
            codes[v] = fixed[v]
            continue
        row = network._cum_rows[v][network.parent_row_index(v, codes)]
        codes[v] = min(bisect_right(row, u), len(row) - 1)
    return np.asarray(codes) + 1


def sample_many(
    network: DiscreteNetwork,
    a: Intervention,
    size: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Vectorized ancestral sampling: ``(size, n_variables)`` value labels."""
    check_intervention(network, a)
    fixed = {v: val - 1 for v, val in a.assignments.items()}
    codes = np.zeros((size, network.n_variables), dtype=np.int64)
    for v in network.topological_order():
        if v in fixed:
            codes[:, v] = fixed[v]
            continue
        cpt = network.cpts[v]
        cum = np.cumsum(cpt, axis=1)
        rows = np.zeros(size, dtype=np.int64)
        for p, s in zip(network.parents[v], network._parent_strides[v]):
            rows += codes[:, p] * s
        u = rng.random(size)
        codes[:, v] = np.minimum(
            (u[:, None] >= cum[rows]).sum(axis=1), cpt.shape[1] - 1
        )
    return codes + 1


def z_index_of(network: DiscreteNetwork, assignment: Sequence[int]) -> int:
    """Reward-parent assignment index of a full joint assignment."""
    return network.encode_parent_values(
        [assignment[p] for p in network.reward_parents]
    )


# ---------------------------------------------------------------------------
# File format
# ---------------------------------------------------------------------------


def network_to_dict(network: DiscreteNetwork) -> dict:
    names = [v.name for v in network.variables]
    return {
        "name": network.name,
        "variables": [
            {"name": v.name, "domain_size": v.domain_size} for v in network.variables
        ],
        "edges": {
            names[v]: [names[p] for p in ps]
            for v, ps in enumerate(network.parents)
            if ps
        },
        "cpts": {names[v]: network.cpts[v].tolist() for v in range(len(names))},
        "reward_parents": [names[p] for p in network.reward_parents],
        "intervenable": [names[p] for p in network.intervenable],
    }


def network_from_dict(data: Mapping) -> DiscreteNetwork:
    names = [v["name"] for v in data["variables"]]
    index = {n: i for i, n in enumerate(names)}
    variables = [(v["name"], int(v["domain_size"])) for v in data["variables"]]
    edges = data.get("edges", {})
    parents = [tuple(index[p] for p in edges.get(n, [])) for n in names]
    cpts = [np.asarray(data["cpts"][n], dtype=float) for n in names]
    return DiscreteNetwork(
        variables=variables,
        parents=parents,
        cpts=cpts,
        reward_parents=[index[n] for n in data["reward_parents"]],
        intervenable=[index[n] for n in data["intervenable"]],
        name=data.get("name", "network"),
    )


def load_network(path: str | Path) -> DiscreteNetwork:
    with open(path) as f:
        return network_from_dict(json.load(f))


def save_network(network: DiscreteNetwork, path: str | Path, extra: Mapping | None = None) -> None:
    data = network_to_dict(network)
    if extra:
        data.update(extra)
    with open(path, "w") as f:
        json.dump(data, f, indent=2)
        f.write("\n")
