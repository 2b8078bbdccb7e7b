"""Finite POMDP/MDP models with exact rational transition kernels.

The model file format is a single JSON document:

    {
      "states":       ["home", "ride", "work"],
      "actions":      ["bike", "train", "meeting"],
      "observations": ["home", "ride", "work"],        # optional, default = states
      "obs":          {"home": "home", ...},           # optional, default identity
      "transitions":  {state: {action: {state: "p/q"}}},
      "weights":      {name: {"state,action": ["p/q", ...]}},   # optional
      "payoffs":      [ ... ]                          # optional, see momix.payoffs
    }

All probabilities and weights are rationals written as strings ("p/q" or
"p"); they are parsed exactly, never through floats.  An action is disabled
in a state by simply not listing it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Mapping, Optional, Tuple

from .errors import ParseError, SchemaError, UnknownState
from .rationals import format_rational, parse_rational

DistMap = Mapping[str, Fraction]


@dataclass(frozen=True)
class WeightFunction:
    """A rational weight per enabled (state, action) pair."""

    table: Mapping[Tuple[str, str], Fraction]
    name: str = "w"

    def __call__(self, state: str, action: str) -> Fraction:
        return self.table[(state, action)]

    def covers(self, pairs) -> bool:
        return all(p in self.table for p in pairs)

    @property
    def min_value(self) -> Fraction:
        return min(self.table.values())

    @property
    def max_abs(self) -> Fraction:
        return max((abs(v) for v in self.table.values()), default=Fraction(0))


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: Tuple[Tuple[str, str, str], ...]  # (rule-id, location, message)

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class Pomdp:
    """Immutable finite POMDP.  An MDP is the special case obs = identity."""

    states: Tuple[str, ...]
    actions: Tuple[str, ...]
    transitions: Mapping[Tuple[str, str], DistMap]
    observations: Tuple[str, ...]
    obs: Mapping[str, str]
    weights: Mapping[str, Mapping[Tuple[str, str], Tuple[Fraction, ...]]] = field(default_factory=dict)

    # -- basic accessors -------------------------------------------------------

    def enabled(self, state: str) -> Tuple[str, ...]:
        return tuple(a for a in self.actions if (state, a) in self.transitions)

    def enabled_for_observation(self, observation: str) -> Tuple[str, ...]:
        """Enabled actions of any state carrying this observation (well
        defined for valid models by obs-action consistency)."""
        for s in self.states:
            if self.obs[s] == observation:
                return self.enabled(s)
        return ()

    def dist(self, state: str, action: str) -> DistMap:
        return self.transitions[(state, action)]

    def enabled_pairs(self):
        return self.transitions.keys()

    @property
    def is_mdp(self) -> bool:
        return all(self.obs[s] == s for s in self.states)

    def state_index(self, state: str) -> int:
        try:
            return self.states.index(state)
        except ValueError:
            raise UnknownState(state) from None

    def weight_function(self, name: str, index: int = 0) -> WeightFunction:
        """Select one column of a named weight bundle as a WeightFunction."""
        if name not in self.weights:
            raise SchemaError(f"unknown weight function {name!r}")
        bundle = self.weights[name]
        table = {}
        for pair, row in bundle.items():
            if index >= len(row):
                raise SchemaError(f"weight {name!r} has no column {index}")
            table[pair] = row[index]
        return WeightFunction(table, name=f"{name}[{index}]" if index else name)

    def successor_graph(self) -> Dict[str, Tuple[str, ...]]:
        """Directed graph edges s -> s' over all enabled actions."""
        out: Dict[str, set] = {s: set() for s in self.states}
        for (s, _a), dist in self.transitions.items():
            for t, p in dist.items():
                if p > 0:
                    out[s].add(t)
        return {s: tuple(sorted(ts, key=self.states.index)) for s, ts in out.items()}


# -- loading ------------------------------------------------------------------


def _require(doc, key, kind, where="document"):
    if key not in doc:
        raise SchemaError(f"{where} is missing field {key!r}")
    value = doc[key]
    if not isinstance(value, kind):
        raise SchemaError(f"field {key!r} must be {kind.__name__}")
    return value


def load_model(text: str) -> Pomdp:
    """Parse the JSON model format into a Pomdp with exact rationals."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("model document must be a JSON object")
    return model_from_dict(doc)


def model_from_dict(doc: Mapping) -> Pomdp:
    states = tuple(_require(doc, "states", list))
    actions = tuple(_require(doc, "actions", list))
    if not states:
        raise SchemaError("states list is empty")
    if not actions:
        raise SchemaError("actions list is empty")
    if len(set(states)) != len(states):
        raise SchemaError("duplicate state identifiers")
    if len(set(actions)) != len(actions):
        raise SchemaError("duplicate action identifiers")
    for s in states:
        if not isinstance(s, str):
            raise SchemaError(f"state identifiers must be strings, got {s!r}")

    observations = tuple(doc.get("observations", states))
    obs_map = doc.get("obs", {s: s for s in states})
    if set(obs_map) != set(states):
        raise SchemaError("obs must map every state (and nothing else)")
    for s, z in obs_map.items():
        if z not in observations:
            raise SchemaError(f"obs({s}) = {z!r} is not a declared observation")

    raw_transitions = _require(doc, "transitions", dict)
    transitions: Dict[Tuple[str, str], DistMap] = {}
    for s, per_action in raw_transitions.items():
        if s not in states:
            raise SchemaError(f"transitions reference unknown state {s!r}")
        if not isinstance(per_action, dict):
            raise SchemaError(f"transitions[{s!r}] must be an object")
        for a, dist in per_action.items():
            if a not in actions:
                raise SchemaError(f"transitions[{s!r}] references unknown action {a!r}")
            if not isinstance(dist, dict) or not dist:
                raise SchemaError(f"transitions[{s!r}][{a!r}] must be a non-empty object")
            parsed = {}
            for t, p in dist.items():
                if t not in states:
                    raise SchemaError(f"distribution of ({s},{a}) references unknown state {t!r}")
                parsed[t] = parse_rational(p)
            transitions[(s, a)] = parsed

    weights: Dict[str, Dict[Tuple[str, str], Tuple[Fraction, ...]]] = {}
    for name, table in doc.get("weights", {}).items():
        parsed_table = {}
        for key, row in table.items():
            try:
                s, a = key.split(",")
            except ValueError:
                raise SchemaError(f"weight key {key!r} is not 'state,action'") from None
            if (s, a) not in transitions:
                raise SchemaError(f"weight {name!r} keys disabled pair ({s},{a})")
            if not isinstance(row, list):
                row = [row]
            parsed_table[(s, a)] = tuple(parse_rational(x) for x in row)
        weights[name] = parsed_table

    return Pomdp(
        states=states,
        actions=actions,
        transitions=transitions,
        observations=observations,
        obs=dict(obs_map),
        weights=weights,
    )


def load_model_file(path) -> Pomdp:
    with open(path, "r", encoding="utf-8") as handle:
        return load_model(handle.read())


def serialize(model: Pomdp) -> str:
    """Canonical JSON for a Pomdp; load_model(serialize(m)) == m."""
    doc = {
        "states": list(model.states),
        "actions": list(model.actions),
        "observations": list(model.observations),
        "obs": {s: model.obs[s] for s in model.states},
        "transitions": {},
        "weights": {},
    }
    for s in model.states:
        per_action = {}
        for a in model.actions:
            if (s, a) in model.transitions:
                dist = model.transitions[(s, a)]
                per_action[a] = {t: format_rational(p) for t, p in sorted(dist.items())}
        if per_action:
            doc["transitions"][s] = per_action
    for name, table in model.weights.items():
        doc["weights"][name] = {
            f"{s},{a}": [format_rational(x) for x in row]
            for (s, a), row in sorted(table.items())
        }
    return json.dumps(doc, indent=2)


# -- validation -----------------------------------------------------------------


def validate(model: Pomdp) -> ValidationReport:
    """Check every model invariant; violations are data, not exceptions."""
    violations = []

    for (s, a), dist in model.transitions.items():
        total = sum(dist.values(), Fraction(0))
        if total != 1:
            violations.append(
                ("distribution-sum", f"({s},{a})", f"probabilities sum to {format_rational(total)}")
            )
        for t, p in dist.items():
            if p < 0 or p > 1:
                violations.append(
                    ("probability-range", f"({s},{a})->{t}", f"{format_rational(p)} outside [0,1]")
                )

    for s in model.states:
        if not model.enabled(s):
            violations.append(("deadlock", s, "state has no enabled action"))

    by_obs: Dict[str, list] = {}
    for s in model.states:
        by_obs.setdefault(model.obs[s], []).append(s)
    for z, group in by_obs.items():
        reference = set(model.enabled(group[0]))
        for s in group[1:]:
            if set(model.enabled(s)) != reference:
                violations.append(
                    ("obs-action-consistency", z,
                     f"states {group[0]} and {s} share observation {z} but differ in enabled actions")
                )

    for name, table in model.weights.items():
        for (s, a) in table:
            if (s, a) not in model.transitions:
                violations.append(("weight-domain", f"{name}({s},{a})", "weight on disabled pair"))

    return ValidationReport(ok=not violations, violations=tuple(violations))


def reachable_states(model: Pomdp, start: str) -> frozenset:
    """States reachable from `start` via positive-probability histories."""
    if start not in model.states:
        raise UnknownState(start)
    graph = model.successor_graph()
    seen = {start}
    frontier = [start]
    while frontier:
        s = frontier.pop()
        for t in graph[s]:
            if t not in seen:
                seen.add(t)
                frontier.append(t)
    return frozenset(seen)


# -- bounded-cost unrolling -------------------------------------------------------


def unroll_cost_counter(model: Pomdp, weight: WeightFunction, budget: Fraction,
                        target: frozenset, max_states: int = 100_000):
    """Track accumulated cost up to `budget` inside the state space.

    Returns (unrolled model, unrolled target states).  The new states are
    (s, cost-so-far) pairs named "s@c", plus saturation states "s@over" once
    the budget is exceeded.  Observations are inherited from the base state,
    so any strategy for the base model runs unchanged on the unrolled model.
    Target states are absorbing (cost accumulation stops at the first visit,
    matching the shortest-path payoff).  The unrolled target is
    {(t, c) : t in target, c <= budget}, so the probability of the
    reachability indicator on it equals P(spath <= budget).
    """
    budget = Fraction(budget)
    if any(v < 0 for v in weight.table.values()):
        raise ValueError("unroll_cost_counter requires non-negative weights")

    def name(state, cost):
        return f"{state}@{'over' if cost is None else format_rational(cost)}"

    start_nodes = [(s, Fraction(0)) for s in model.states]
    transitions: Dict[Tuple[str, str], DistMap] = {}
    obs_map = {}
    nodes = set()
    frontier = list(start_nodes)
    target_nodes = []
    while frontier:
        node = frontier.pop()
        if node in nodes:
            continue
        nodes.add(node)
        if len(nodes) > max_states:
            raise ValueError(f"unrolled model exceeds {max_states} states")
        s, cost = node
        obs_map[name(s, cost)] = model.obs[s]
        is_target = s in target and cost is not None
        if is_target:
            target_nodes.append(name(s, cost))
        for a in model.enabled(s):
            if is_target:
                transitions[(name(s, cost), a)] = {name(s, cost): Fraction(1)}
                continue
            if cost is None:
                new_cost = None
            else:
                acc = cost + weight(s, a)
                new_cost = acc if acc <= budget else None
            dist = {}
            for t, p in model.dist(s, a).items():
                succ = (t, new_cost)
                dist[name(t, new_cost)] = dist.get(name(t, new_cost), Fraction(0)) + p
                if succ not in nodes:
                    frontier.append(succ)
            transitions[(name(s, cost), a)] = dist

    ordered = sorted(nodes, key=lambda n: (model.states.index(n[0]), n[1] is None,
                                           n[1] if n[1] is not None else Fraction(0)))
    state_names = tuple(name(s, c) for s, c in ordered)
    unrolled = Pomdp(
        states=state_names,
        actions=model.actions,
        transitions=transitions,
        observations=model.observations,
        obs=obs_map,
        weights={},
    )
    entry = {s: name(s, Fraction(0)) for s in model.states}
    return unrolled, frozenset(target_nodes), entry
