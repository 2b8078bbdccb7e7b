"""Finite-memory strategies over observations, and what one can do with them.

A strategy is a Mealy machine: a finite memory skeleton (memory states plus
an update function reading observation and action) together with an action
rule `act(memory, observation) -> distribution over enabled actions`.  Pure
strategies are the deterministic special case.  Finite mixtures draw one
pure strategy at the start of a play and commit to it.

The module also provides:

* the exact product Markov chain of a model and a strategy,
* exact cylinder probabilities,
* enumeration of all pure strategies over a skeleton,
* the conversion of a finite mixture into an outcome-equivalent behavioural
  strategy (posterior-weighted choices over the still-consistent support),
* the bounded-horizon premetric underlying strategy convergence arguments.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from .errors import (DisabledAction, EmptySupport, MalformedHistory, ParseError,
                     PoolTooLarge, SchemaError, UnknownState)
from .model import Pomdp
from .payoffs import LassoPlay, check_history
from .rationals import format_rational, parse_rational

Mem = object  # memory states are any hashable identifiers (ints, strings)


@dataclass(frozen=True)
class MemorySkeleton:
    """Memory states with a total update function on (memory, obs, action)."""

    memory: Tuple[Mem, ...]
    init: Mem
    update: Mapping[Tuple[Mem, str, str], Mem]

    def step(self, mem: Mem, observation: str, action: str) -> Mem:
        return self.update[(mem, observation, action)]

    def check_total(self, model: Pomdp):
        for mem in self.memory:
            for z in model.observations:
                for a in model.enabled_for_observation(z):
                    if (mem, z, a) not in self.update:
                        raise SchemaError(f"skeleton update missing ({mem},{z},{a})")


def memoryless(model: Pomdp) -> MemorySkeleton:
    update = {}
    for z in model.observations:
        for a in model.enabled_for_observation(z):
            update[(0, z, a)] = 0
    return MemorySkeleton(memory=(0,), init=0, update=update)


def counter(model: Pomdp, horizon: int) -> MemorySkeleton:
    """Count steps, saturating at `horizon`; memory states 0..horizon."""
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    update = {}
    for mem in range(horizon + 1):
        nxt = min(mem + 1, horizon)
        for z in model.observations:
            for a in model.enabled_for_observation(z):
                update[(mem, z, a)] = nxt
    return MemorySkeleton(memory=tuple(range(horizon + 1)), init=0, update=update)


class FiniteMemoryStrategy:
    """Behavioural finite-memory strategy: act maps (memory, observation) to a
    rational distribution over the enabled actions of that observation.

    The act table needs to cover only (memory, observation) pairs reachable
    in the product of the model with the skeleton; lookups elsewhere fail
    loudly.
    """

    def __init__(self, skeleton: MemorySkeleton, act: Mapping[Tuple[Mem, str], Mapping[str, Fraction]]):
        self.skeleton = skeleton
        self.act = {k: dict(v) for k, v in act.items()}

    def action_distribution(self, mem: Mem, observation: str) -> Mapping[str, Fraction]:
        return self.act[(mem, observation)]

    @property
    def is_pure(self) -> bool:
        return all(len(dist) == 1 and next(iter(dist.values())) == 1 for dist in self.act.values())

    def __repr__(self):
        return f"<FiniteMemoryStrategy |M|={len(self.skeleton.memory)} entries={len(self.act)}>"


class PureStrategy(FiniteMemoryStrategy):
    """Deterministic strategy stored as a plain (memory, observation) -> action table."""

    def __init__(self, skeleton: MemorySkeleton, table: Mapping[Tuple[Mem, str], str]):
        self.skeleton = skeleton
        self.table = dict(table)
        self.act = {k: {a: Fraction(1)} for k, a in self.table.items()}

    def action_at(self, mem: Mem, observation: str) -> str:
        return self.table[(mem, observation)]

    @property
    def is_pure(self) -> bool:
        return True

    def __repr__(self):
        choices = ",".join(f"{k}->{a}" for k, a in sorted(self.table.items(), key=str))
        return f"<PureStrategy {choices}>"


@dataclass(frozen=True)
class FiniteMixture:
    """A finite-support distribution over pure strategies, drawn once."""

    support: Tuple[PureStrategy, ...]
    weights: Tuple[Fraction, ...]

    @staticmethod
    def of(pairs: Iterable[Tuple[PureStrategy, Fraction]]) -> "FiniteMixture":
        kept = [(s, Fraction(w)) for s, w in pairs if Fraction(w) != 0]
        if not kept:
            raise EmptySupport("mixture support is empty")
        weights = [w for _, w in kept]
        if any(w < 0 for w in weights):
            raise SchemaError("mixture weights must be non-negative")
        if sum(weights, Fraction(0)) != 1:
            raise SchemaError("mixture weights must sum to exactly 1")
        return FiniteMixture(tuple(s for s, _ in kept), tuple(weights))

    @staticmethod
    def dirac(strategy: PureStrategy) -> "FiniteMixture":
        return FiniteMixture.of([(strategy, Fraction(1))])

    def __len__(self):
        return len(self.support)


def validate_strategy(model: Pomdp, strategy: FiniteMemoryStrategy):
    """Check distribution supports, sums and act coverage of reachable pairs."""
    strategy.skeleton.check_total(model)
    for (mem, z), dist in strategy.act.items():
        enabled = set(model.enabled_for_observation(z))
        if sum(dist.values(), Fraction(0)) != 1:
            raise SchemaError(f"act({mem},{z}) does not sum to 1")
        for a, p in dist.items():
            if p < 0:
                raise SchemaError(f"act({mem},{z})({a}) is negative")
            if p > 0 and a not in enabled:
                raise DisabledAction(f"act({mem},{z}) puts weight on disabled action {a}")
    for (mem, z), _actions in reachable_choice_points(model, strategy.skeleton):
        if (mem, z) not in strategy.act:
            raise SchemaError(f"act is missing reachable pair ({mem},{z})")


# -- reachable choice points and enumeration -------------------------------------


def reachable_choice_points(model: Pomdp, skeleton: MemorySkeleton):
    """(memory, observation) pairs reachable in the model/skeleton product
    when the action is unrestricted, each with its enabled action tuple.
    Order is deterministic (BFS layer, then state/memory order)."""
    seen = set()
    points: List[Tuple[Tuple[Mem, str], Tuple[str, ...]]] = []
    point_keys = set()
    frontier = [(s, skeleton.init) for s in model.states]
    # Restrict to product states reachable from *some* initial state; every
    # evaluation starts at (s0, init) so this covers all uses.
    order_key = {s: i for i, s in enumerate(model.states)}
    mem_key = {m: i for i, m in enumerate(skeleton.memory)}
    frontier.sort(key=lambda sq: (order_key[sq[0]], mem_key[sq[1]]))
    queue = list(frontier)
    seen.update(queue)
    while queue:
        s, mem = queue.pop(0)
        z = model.obs[s]
        enabled = model.enabled(s)
        if (mem, z) not in point_keys:
            point_keys.add((mem, z))
            points.append(((mem, z), enabled))
        for a in enabled:
            nxt_mem = skeleton.step(mem, z, a)
            for t, p in model.dist(s, a).items():
                if p > 0 and (t, nxt_mem) not in seen:
                    seen.add((t, nxt_mem))
                    queue.append((t, nxt_mem))
    points.sort(key=lambda pz: (mem_key[pz[0][0]], model.observations.index(pz[0][1])))
    return points


def pure_pool_size(model: Pomdp, skeleton: MemorySkeleton) -> int:
    size = 1
    for _, enabled in reachable_choice_points(model, skeleton):
        size *= len(enabled)
    return size


def enumerate_pure(model: Pomdp, skeleton: MemorySkeleton, cap: int = 1_000_000) -> Iterator[PureStrategy]:
    """All deterministic act tables over the reachable choice points, in
    lexicographic table order.  Deterministic across runs."""
    points = reachable_choice_points(model, skeleton)
    size = 1
    for _, enabled in points:
        size *= len(enabled)
    if size > cap:
        raise PoolTooLarge(size, cap)
    keys = [key for key, _ in points]
    for combo in itertools.product(*(enabled for _, enabled in points)):
        yield PureStrategy(skeleton, dict(zip(keys, combo)))


# -- product chain ------------------------------------------------------------------


@dataclass(frozen=True)
class MarkovChain:
    """Exact product of a model with a finite-memory strategy.

    nodes are (state, memory) pairs reachable from the initial pair; rows of
    `matrix` are sparse dicts over node indices and sum to exactly 1.
    `action_dists[i]` is the strategy's action distribution at node i, kept
    for lifting weights and targets.
    """

    nodes: Tuple[Tuple[str, Mem], ...]
    index: Mapping[Tuple[str, Mem], int]
    matrix: Tuple[Mapping[int, Fraction], ...]
    action_dists: Tuple[Mapping[str, Fraction], ...]
    init: int
    model: Pomdp

    def state_of(self, i: int) -> str:
        return self.nodes[i][0]

    def __len__(self):
        return len(self.nodes)


def product_chain(model: Pomdp, strategy: FiniteMemoryStrategy, start: str) -> MarkovChain:
    if start not in model.states:
        raise UnknownState(start)
    init = (start, strategy.skeleton.init)
    nodes = [init]
    index = {init: 0}
    rows: List[Dict[int, Fraction]] = []
    dists: List[Mapping[str, Fraction]] = []
    queue = [init]
    while queue:
        s, mem = queue.pop(0)
        z = model.obs[s]
        dist = strategy.action_distribution(mem, z)
        row: Dict[int, Fraction] = {}
        for a, alpha in dist.items():
            if alpha == 0:
                continue
            nxt_mem = strategy.skeleton.step(mem, z, a)
            for t, p in model.dist(s, a).items():
                if p == 0:
                    continue
                node = (t, nxt_mem)
                if node not in index:
                    index[node] = len(nodes)
                    nodes.append(node)
                    queue.append(node)
                row[index[node]] = row.get(index[node], Fraction(0)) + alpha * p
        rows.append(row)
        dists.append(dict(dist))
    return MarkovChain(tuple(nodes), index, tuple(rows), tuple(dists), 0, model)


# -- cylinder probabilities ------------------------------------------------------------


def cylinder_prob(model: Pomdp, strategy: FiniteMemoryStrategy, start: str,
                  history: Sequence[str]) -> Fraction:
    """Exact probability of the cylinder of `history` from `start`."""
    history = check_history(model, history)
    if history[0] != start:
        return Fraction(0)
    prob = Fraction(1)
    mem = strategy.skeleton.init
    for i in range(0, len(history) - 2, 2):
        s, a, t = history[i], history[i + 1], history[i + 2]
        z = model.obs[s]
        dist = strategy.action_distribution(mem, z)
        prob *= dist.get(a, Fraction(0)) * model.dist(s, a)[t]
        if prob == 0:
            return prob
        mem = strategy.skeleton.step(mem, z, a)
    return prob


# -- Kuhn conversion ---------------------------------------------------------------------


def mixed_to_behavioural(mixture: FiniteMixture, model: Pomdp) -> FiniteMemoryStrategy:
    """Outcome-equivalent behavioural strategy of a finite mixture.

    Memory states are pairs (per-member memories, still-consistent member
    indices); the action rule is the posterior mixture of the members'
    choices.  At histories no member is consistent with, the strategy plays
    uniformly over enabled actions (outcome-equivalence does not constrain
    them).
    """
    if not mixture.support:
        raise EmptySupport("mixture support is empty")
    members = mixture.support
    k = len(members)
    init = (tuple(m.skeleton.init for m in members), frozenset(range(k)))

    def choice(i, mem_i, z):
        return members[i].table.get((mem_i, z))

    def act_for(mems, consistent, z):
        weighted: Dict[str, Fraction] = {}
        total = Fraction(0)
        for i in consistent:
            a = choice(i, mems[i], z)
            if a is None:
                continue  # pair unreachable for member i: impossible branch
            weighted[a] = weighted.get(a, Fraction(0)) + mixture.weights[i]
            total += mixture.weights[i]
        if total == 0:
            enabled = model.enabled_for_observation(z)
            if not enabled:
                return {}
            share = Fraction(1, len(enabled))
            return {a: share for a in enabled}
        return {a: w / total for a, w in weighted.items()}

    memory_states = [init]
    seen = {init}
    update: Dict[Tuple[object, str, str], object] = {}
    act: Dict[Tuple[object, str], Mapping[str, Fraction]] = {}
    queue = [init]
    while queue:
        node = queue.pop(0)
        mems, consistent = node
        for z in model.observations:
            enabled = model.enabled_for_observation(z)
            if not enabled:
                continue
            act[(node, z)] = act_for(mems, consistent, z)
            for a in enabled:
                new_mems = tuple(
                    m.skeleton.update.get((mems[i], z, a), mems[i])
                    for i, m in enumerate(members)
                )
                new_consistent = frozenset(
                    i for i in consistent if choice(i, mems[i], z) == a
                )
                nxt = (new_mems, new_consistent)
                update[(node, z, a)] = nxt
                if nxt not in seen:
                    seen.add(nxt)
                    memory_states.append(nxt)
                    queue.append(nxt)
    skeleton = MemorySkeleton(tuple(memory_states), init, update)
    return FiniteMemoryStrategy(skeleton, act)


# -- premetric ---------------------------------------------------------------------------


def strategy_premetric(model: Pomdp, sigma: FiniteMemoryStrategy, tau: FiniteMemoryStrategy,
                       horizon: int) -> Fraction:
    """Max over histories with at most `horizon` states of the *squared*
    Euclidean distance between the two action distributions.

    Returning the squared distance keeps the result rational; compare it
    against squared thresholds.
    """
    if horizon < 1:
        return Fraction(0)
    best = Fraction(0)
    for start in model.states:
        stack = [(start, sigma.skeleton.init, tau.skeleton.init, 1)]
        while stack:
            s, ms, mt, states_so_far = stack.pop()
            z = model.obs[s]
            ds = sigma.action_distribution(ms, z)
            dt = tau.action_distribution(mt, z)
            actions = set(ds) | set(dt)
            d2 = sum(((ds.get(a, Fraction(0)) - dt.get(a, Fraction(0))) ** 2 for a in actions),
                     Fraction(0))
            if d2 > best:
                best = d2
            if states_so_far >= horizon:
                continue
            for a in model.enabled(s):
                nms = sigma.skeleton.step(ms, z, a)
                nmt = tau.skeleton.step(mt, z, a)
                for t, p in model.dist(s, a).items():
                    if p > 0:
                        stack.append((t, nms, nmt, states_so_far + 1))
    return best


# -- pure strategies on deterministic models -----------------------------------------------


def lasso_outcome(model: Pomdp, strategy: PureStrategy, start: str) -> LassoPlay:
    """The unique play of a pure strategy when every transition it takes is
    deterministic; raises ValueError on a randomised transition."""
    if start not in model.states:
        raise UnknownState(start)
    seq: List[str] = []
    seen: Dict[Tuple[str, Mem], int] = {}
    s, mem = start, strategy.skeleton.init
    while (s, mem) not in seen:
        seen[(s, mem)] = len(seq)
        z = model.obs[s]
        a = strategy.action_at(mem, z)
        dist = model.dist(s, a)
        if len(dist) != 1:
            raise ValueError(f"randomised transition at ({s},{a})")
        seq += [s, a]
        mem = strategy.skeleton.step(mem, z, a)
        s = next(iter(dist))
    split = seen[(s, mem)]
    prefix = tuple(seq[:split]) + (seq[split],)
    cycle = tuple(seq[split:])
    return LassoPlay.check(model, prefix, cycle)


# -- file formats ------------------------------------------------------------------------


def strategy_to_dict(strategy: FiniteMemoryStrategy) -> dict:
    sk = strategy.skeleton
    doc = {
        "memory": [str(m) for m in sk.memory],
        "init": str(sk.init),
        "update": {f"{m},{z},{a}": str(n) for (m, z, a), n in sorted(sk.update.items(), key=str)},
        "act": {},
    }
    for (m, z), dist in sorted(strategy.act.items(), key=str):
        if len(dist) == 1 and next(iter(dist.values())) == 1:
            doc["act"][f"{m},{z}"] = next(iter(dist))
        else:
            doc["act"][f"{m},{z}"] = {a: format_rational(p) for a, p in sorted(dist.items())}
    return doc


def strategy_from_dict(doc: Mapping, model: Pomdp) -> FiniteMemoryStrategy:
    memory = tuple(doc["memory"])
    init = doc["init"]
    if init not in memory:
        raise SchemaError("init memory not among memory states")
    update = {}
    for key, nxt in doc["update"].items():
        try:
            m, z, a = key.split(",")
        except ValueError:
            raise SchemaError(f"update key {key!r} is not 'm,z,a'") from None
        update[(m, z, a)] = nxt
    act = {}
    pure = True
    for key, entry in doc["act"].items():
        try:
            m, z = key.split(",")
        except ValueError:
            raise SchemaError(f"act key {key!r} is not 'm,z'") from None
        if isinstance(entry, str):
            act[(m, z)] = {entry: Fraction(1)}
        else:
            act[(m, z)] = {a: parse_rational(p) for a, p in entry.items()}
            if len(act[(m, z)]) > 1:
                pure = False
    skeleton = MemorySkeleton(memory, init, update)
    if pure:
        table = {k: next(iter(d)) for k, d in act.items()}
        strategy = PureStrategy(skeleton, table)
    else:
        strategy = FiniteMemoryStrategy(skeleton, act)
    validate_strategy(model, strategy)
    return strategy


def mixture_to_dict(mixture: FiniteMixture) -> dict:
    return {
        "support": [strategy_to_dict(s) for s in mixture.support],
        "weights": [format_rational(w) for w in mixture.weights],
    }


def mixture_from_dict(doc: Mapping, model: Pomdp) -> FiniteMixture:
    support = []
    for entry in doc["support"]:
        s = strategy_from_dict(entry, model)
        if not isinstance(s, PureStrategy):
            raise SchemaError("mixture support members must be pure strategies")
        support.append(s)
    weights = [parse_rational(w) for w in doc["weights"]]
    if len(weights) != len(support):
        raise SchemaError("support and weights lengths differ")
    return FiniteMixture.of(zip(support, weights))


def load_strategy_file(path, model: Pomdp):
    """Load a strategy or mixture JSON file."""
    with open(path, "r", encoding="utf-8") as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
    if "support" in doc:
        return mixture_from_dict(doc, model)
    return strategy_from_dict(doc, model)
