"""Payoff catalog, play-level evaluation and continuity checks.

Supported payoff kinds (one per dimension of a multi-payoff):

* ``ReachIndicator(target)``           -- 1 if the target set is visited
* ``BuchiIndicator(target)``           -- 1 if the target is visited infinitely often
* ``DiscountedSum(discount, weights)`` -- sum of lambda^l * w(s_l, a_l)
* ``ReachGatedDiscountedSum``          -- indicator(reach) * discounted sum
* ``TotalRewardNonNeg(weights)``       -- liminf of partial sums, weights >= 0
* ``ShortestPath(target, weights)``    -- accumulated weight up to the first
  visit of the target, +inf if the target is never visited (weights >= 0)

Concrete plays are ultimately periodic ("lasso") plays: a finite prefix
followed by a repeated cycle.  Every play of a finite model induced by a
pure finite-memory strategy with deterministic transitions has this shape.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import (MalformedHistory, MalformedLasso, ParseError, SchemaError,
                     UnknownScc, UnsupportedKind)
from .model import Pomdp, WeightFunction, model_from_dict
from .rationals import ExtReal, NEG_INF, POS_INF, ZERO, parse_rational


# -- payoff kinds ---------------------------------------------------------------


@dataclass(frozen=True)
class ReachIndicator:
    target: frozenset

    def validate(self, model: Pomdp):
        _check_target(model, self.target)


@dataclass(frozen=True)
class BuchiIndicator:
    target: frozenset

    def validate(self, model: Pomdp):
        _check_target(model, self.target)


@dataclass(frozen=True)
class DiscountedSum:
    discount: Fraction
    weights: WeightFunction

    def validate(self, model: Pomdp):
        _check_discount(self.discount)
        _check_weights(model, self.weights)


@dataclass(frozen=True)
class ReachGatedDiscountedSum:
    target: frozenset
    discount: Fraction
    weights: WeightFunction

    def validate(self, model: Pomdp):
        _check_target(model, self.target)
        _check_discount(self.discount)
        _check_weights(model, self.weights)


@dataclass(frozen=True)
class TotalRewardNonNeg:
    weights: WeightFunction

    def validate(self, model: Pomdp):
        _check_weights(model, self.weights, nonneg=True)


@dataclass(frozen=True)
class ShortestPath:
    target: frozenset
    weights: WeightFunction

    def validate(self, model: Pomdp):
        _check_target(model, self.target)
        _check_weights(model, self.weights, nonneg=True)


PayoffSpec = Union[ReachIndicator, BuchiIndicator, DiscountedSum,
                   ReachGatedDiscountedSum, TotalRewardNonNeg, ShortestPath]

#: A multi-payoff is an ordered tuple of payoff dimensions.
MultiPayoff = Tuple[PayoffSpec, ...]


def _check_target(model, target):
    unknown = set(target) - set(model.states)
    if unknown:
        raise SchemaError(f"target references unknown states {sorted(unknown)}")


def _check_discount(discount):
    if not (0 <= discount < 1):
        raise SchemaError(f"discount factor {discount} outside [0, 1)")


def _check_weights(model, weights: WeightFunction, nonneg=False):
    for pair in model.enabled_pairs():
        if pair not in weights.table:
            raise SchemaError(f"weight {weights.name!r} missing enabled pair {pair}")
    if nonneg and any(v < 0 for v in weights.table.values()):
        raise SchemaError(f"weight {weights.name!r} must be non-negative for this payoff")


def validate_multi_payoff(model: Pomdp, dims: MultiPayoff):
    if not dims:
        raise SchemaError("a multi-payoff needs at least one dimension")
    for spec in dims:
        spec.validate(model)


# -- payoff (de)serialization ------------------------------------------------------

_KIND_NAMES = {
    "reach": ReachIndicator,
    "buchi": BuchiIndicator,
    "discounted_sum": DiscountedSum,
    "reach_gated_discounted_sum": ReachGatedDiscountedSum,
    "total_reward": TotalRewardNonNeg,
    "shortest_path": ShortestPath,
}


def payoff_from_dict(model: Pomdp, entry: Mapping) -> PayoffSpec:
    kind = entry.get("kind")
    if kind not in _KIND_NAMES:
        raise SchemaError(f"unknown payoff kind {kind!r}")

    def target():
        return frozenset(entry.get("target", ()))

    def weights():
        name = entry.get("weights")
        if name is None:
            raise SchemaError(f"payoff kind {kind!r} needs a 'weights' name")
        return model.weight_function(name, int(entry.get("windex", 0)))

    if kind == "reach":
        spec = ReachIndicator(target())
    elif kind == "buchi":
        spec = BuchiIndicator(target())
    elif kind == "discounted_sum":
        spec = DiscountedSum(parse_rational(entry["lambda"]), weights())
    elif kind == "reach_gated_discounted_sum":
        spec = ReachGatedDiscountedSum(target(), parse_rational(entry["lambda"]), weights())
    elif kind == "total_reward":
        spec = TotalRewardNonNeg(weights())
    else:
        spec = ShortestPath(target(), weights())
    spec.validate(model)
    return spec


def load_payoffs(text_or_doc, model: Pomdp) -> MultiPayoff:
    """Read the `payoffs` array of a model document."""
    if isinstance(text_or_doc, str):
        try:
            doc = json.loads(text_or_doc)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
    else:
        doc = text_or_doc
    entries = doc.get("payoffs")
    if not entries:
        raise SchemaError("document has no payoffs")
    return tuple(payoff_from_dict(model, e) for e in entries)


def load_problem(text: str):
    """Convenience: parse a document into (model, multi-payoff or None)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    model = model_from_dict(doc)
    dims = tuple(payoff_from_dict(model, e) for e in doc.get("payoffs", []))
    return model, (dims if dims else None)


# -- lasso plays ------------------------------------------------------------------


@dataclass(frozen=True)
class LassoPlay:
    """An ultimately periodic play: prefix (s0 a0 ... s_m) followed by the
    cycle (s_m b0 t1 b1 ... b_{r-1}) repeated forever.  The prefix ends at
    the state the cycle starts in; the last cycle action returns to it.
    """

    prefix: Tuple[str, ...]  # odd length: s a s ... s
    cycle: Tuple[str, ...]   # even length: s b t b ... b

    @staticmethod
    def check(model: Pomdp, prefix: Sequence[str], cycle: Sequence[str]) -> "LassoPlay":
        prefix = tuple(prefix)
        cycle = tuple(cycle)
        if len(prefix) % 2 == 0 or not prefix:
            raise MalformedLasso("prefix must alternate s a s ... s")
        if len(cycle) % 2 != 0 or not cycle:
            raise MalformedLasso("cycle must be non-empty and alternate s b ... b")
        if cycle[0] != prefix[-1]:
            raise MalformedLasso("cycle must start at the last prefix state")
        play = LassoPlay(prefix, cycle)
        for s, a, t in play.transition_triples():
            if (s, a) not in model.transitions:
                raise MalformedLasso(f"action {a} disabled in {s}")
            if model.dist(s, a).get(t, Fraction(0)) <= 0:
                raise MalformedLasso(f"transition {s} -{a}-> {t} has probability 0")
        return play

    # prefix steps are the (state, action) pairs strictly before the cycle
    def prefix_steps(self) -> List[Tuple[str, str]]:
        return [(self.prefix[i], self.prefix[i + 1]) for i in range(0, len(self.prefix) - 1, 2)]

    def cycle_steps(self) -> List[Tuple[str, str]]:
        return [(self.cycle[i], self.cycle[i + 1]) for i in range(0, len(self.cycle), 2)]

    def cycle_states(self) -> Tuple[str, ...]:
        return self.cycle[0::2]

    def prefix_states(self) -> Tuple[str, ...]:
        return self.prefix[0::2]

    def transition_triples(self):
        """All (s, a, s') transitions of one unrolling (prefix + one cycle pass)."""
        seq = list(self.prefix) + list(self.cycle[1:]) + [self.cycle[0]]
        for i in range(0, len(seq) - 2, 2):
            yield seq[i], seq[i + 1], seq[i + 2]

    def rotate_cycle(self, k: int) -> "LassoPlay":
        """Same play, with the lasso split point moved k cycle steps later."""
        steps = self.cycle_steps()
        k %= len(steps)
        if k == 0:
            return self
        new_prefix = list(self.prefix)
        for i in range(k):
            _, a = steps[i]
            new_prefix += [a, steps[(i + 1) % len(steps)][0]]
        new_cycle: List[str] = []
        for s, a in steps[k:] + steps[:k]:
            new_cycle += [s, a]
        return LassoPlay(tuple(new_prefix), tuple(new_cycle))


def eval_play(spec: PayoffSpec, play: LassoPlay) -> ExtReal:
    """Closed-form payoff of an ultimately periodic play."""
    if isinstance(spec, ReachIndicator):
        hit = any(s in spec.target for s in play.prefix_states() + play.cycle_states())
        return ExtReal(1 if hit else 0)

    if isinstance(spec, BuchiIndicator):
        # the states visited infinitely often are exactly the cycle states
        return ExtReal(1 if any(s in spec.target for s in play.cycle_states()) else 0)

    if isinstance(spec, DiscountedSum):
        return ExtReal(_discounted_value(spec.discount, spec.weights, play))

    if isinstance(spec, ReachGatedDiscountedSum):
        gate = eval_play(ReachIndicator(spec.target), play)
        if gate == ZERO:
            return ZERO
        return ExtReal(_discounted_value(spec.discount, spec.weights, play))

    if isinstance(spec, TotalRewardNonNeg):
        if any(spec.weights(s, a) > 0 for s, a in play.cycle_steps()):
            return POS_INF
        total = sum((spec.weights(s, a) for s, a in play.prefix_steps()), Fraction(0))
        return ExtReal(total)

    if isinstance(spec, ShortestPath):
        acc = Fraction(0)
        for s, a in play.prefix_steps() + play.cycle_steps():
            if s in spec.target:
                return ExtReal(acc)
            acc += spec.weights(s, a)
        # one more chance: the cycle closes on its first state
        if play.cycle_states()[0] in spec.target:
            return ExtReal(acc)
        return POS_INF

    raise UnsupportedKind(type(spec).__name__)


def _discounted_value(discount: Fraction, weights: WeightFunction, play: LassoPlay) -> Fraction:
    lam = Fraction(discount)
    value = Fraction(0)
    power = Fraction(1)
    for s, a in play.prefix_steps():
        value += power * weights(s, a)
        power *= lam
    cycle_sum = Fraction(0)
    cpow = Fraction(1)
    for s, a in play.cycle_steps():
        cycle_sum += cpow * weights(s, a)
        cpow *= lam
    r = len(play.cycle_steps())
    value += power * cycle_sum / (1 - lam ** r)
    return value


# -- generalized discounted sums ----------------------------------------------------


@dataclass(frozen=True)
class GeneralizedDiscounted:
    """History-dependent discount/weight with finite memory depth.

    `discount(window, action)` and `weight(window, action)` read the last
    `depth` (state, action) pairs of the history (`window` is that truncated
    tuple, ending with the current state) and must satisfy
    0 <= discount <= discount_cap < 1 and |weight| <= weight_bound.
    """

    discount: Callable[[Tuple[str, ...], str], Fraction]
    weight: Callable[[Tuple[str, ...], str], Fraction]
    discount_cap: Fraction
    weight_bound: Fraction
    depth: int = 1

    def __post_init__(self):
        if not (0 <= self.discount_cap < 1):
            raise SchemaError("discount cap must lie in [0, 1)")
        if self.weight_bound < 0:
            raise SchemaError("weight bound must be non-negative")


def eval_play_truncated(g: GeneralizedDiscounted, prefix: Sequence[str]) -> Tuple[Fraction, Fraction]:
    """Partial generalized-discounted sum of a play prefix, with a two-sided
    tail bound: any infinite continuation has payoff inside [lo, hi].

    `prefix` alternates states and actions and must contain at least one full
    step.  The returned interval is the partial sum over the given steps plus
    or minus 2 * W * cap^N / (1 - cap).
    """
    steps = [(prefix[i], prefix[i + 1]) for i in range(0, len(prefix) - len(prefix) % 2, 2)]
    if not steps:
        raise ValueError("prefix must contain at least one (state, action) step")
    partial = Fraction(0)
    factor = Fraction(1)
    history: List[str] = []
    for s, a in steps:
        history += [s, a]
        window = tuple(history[-(2 * g.depth):])
        w = Fraction(g.weight(window, a))
        lam = Fraction(g.discount(window, a))
        if abs(w) > g.weight_bound:
            raise SchemaError("weight exceeds declared bound")
        if not (0 <= lam <= g.discount_cap):
            raise SchemaError("discount exceeds declared cap")
        partial += factor * w
        factor *= lam
    n = len(steps)
    radius = 2 * g.weight_bound * g.discount_cap ** n / (1 - g.discount_cap) \
        if g.discount_cap > 0 else Fraction(0)
    if g.discount_cap == 0 and n >= 1:
        radius = Fraction(0)
    return partial - radius, partial + radius


# -- clopen objectives ---------------------------------------------------------------

History = Tuple[str, ...]


@dataclass(frozen=True)
class CylinderUnion:
    """An objective given as a finite union of history cylinders."""

    histories: Tuple[History, ...]


def check_history(model: Pomdp, history: Sequence[str]) -> History:
    history = tuple(history)
    if len(history) % 2 == 0 or not history:
        raise MalformedHistory("a history alternates s a s ... s")
    for i in range(0, len(history) - 2, 2):
        s, a, t = history[i], history[i + 1], history[i + 2]
        if (s, a) not in model.transitions:
            raise MalformedHistory(f"action {a} disabled in {s}")
        if model.dist(s, a).get(t, Fraction(0)) <= 0:
            raise MalformedHistory(f"transition {s} -{a}-> {t} has probability 0")
    if history[0] not in model.states:
        raise MalformedHistory(f"unknown state {history[0]}")
    return history


def normalize_cylinders(model: Pomdp, obj: CylinderUnion) -> CylinderUnion:
    """Drop histories whose cylinder is contained in another member's."""
    histories = [check_history(model, h) for h in obj.histories]
    kept = []
    for h in histories:
        if any(len(other) < len(h) and h[: len(other)] == other for other in histories):
            continue  # a strict prefix is present: Cyl(h) is inside Cyl(other)
        if h in kept:
            continue
        kept.append(h)
    return CylinderUnion(tuple(kept))


def is_clopen_objective(model: Pomdp, obj: CylinderUnion) -> Tuple[bool, int]:
    """A finite union of cylinders is always clopen; returns the horizon l
    (number of transitions) after which membership is determined."""
    normalized = normalize_cylinders(model, obj)
    horizon = max((len(h) // 2 for h in normalized.histories), default=0)
    return True, horizon


def cylinder_member(obj: CylinderUnion, play_prefix: Sequence[str]) -> bool:
    """Whether a play starting with `play_prefix` belongs to the union (the
    prefix must be at least as long as the longest member history)."""
    prefix = tuple(play_prefix)
    return any(prefix[: len(h)] == h for h in obj.histories)


# -- strongly connected components ------------------------------------------------------


@dataclass(frozen=True)
class SccDecomposition:
    components: Tuple[frozenset, ...]   # topological order: edges go forward
    component_of: Mapping[str, int]
    reach_pairs: frozenset               # (i, j) with j reachable from i, i != j

    def reaches(self, i: int, j: int) -> bool:
        return i == j or (i, j) in self.reach_pairs


def scc_decompose(model: Pomdp) -> SccDecomposition:
    """Tarjan SCCs of the underlying directed graph plus their reachability DAG."""
    graph = model.successor_graph()
    order = {s: i for i, s in enumerate(model.states)}
    index: Dict[str, int] = {}
    low: Dict[str, int] = {}
    on_stack: Dict[str, bool] = {}
    stack: List[str] = []
    counter = [0]
    components: List[frozenset] = []

    def strongconnect(root):
        work = [(root, iter(graph[root]))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            node, it = work[-1]
            advanced = False
            for succ in it:
                if succ not in index:
                    index[succ] = low[succ] = counter[0]
                    counter[0] += 1
                    stack.append(succ)
                    on_stack[succ] = True
                    work.append((succ, iter(graph[succ])))
                    advanced = True
                    break
                if on_stack.get(succ):
                    low[node] = min(low[node], index[succ])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == node:
                        break
                components.append(frozenset(comp))

    for s in model.states:
        if s not in index:
            strongconnect(s)

    # Tarjan emits components in reverse topological order.
    components.reverse()
    component_of = {}
    for i, comp in enumerate(components):
        for s in comp:
            component_of[s] = i

    n = len(components)
    direct = [set() for _ in range(n)]
    for s in model.states:
        for t in graph[s]:
            i, j = component_of[s], component_of[t]
            if i != j:
                direct[i].add(j)
    reach = [set(d) for d in direct]
    for i in range(n - 1, -1, -1):
        for j in list(reach[i]):
            reach[i] |= reach[j]
    pairs = frozenset((i, j) for i in range(n) for j in reach[i])
    return SccDecomposition(tuple(components), component_of, pairs)


def check_prefix_independent_continuity(model: Pomdp, coeffs: Mapping[int, ExtReal]) -> bool:
    """Whether sum_i coeffs[i] * 1[Buchi(C_i)] is a continuous payoff.

    `coeffs` maps SCC indices (as produced by scc_decompose) to extended
    reals.  The payoff is continuous exactly when any two SCCs related by
    reachability carry the same coefficient.
    """
    decomposition = scc_decompose(model)
    expected = set(range(len(decomposition.components)))
    if set(coeffs) != expected:
        raise UnknownScc(f"coefficients must be keyed by SCC indices {sorted(expected)}")
    for (i, j) in decomposition.reach_pairs:
        if ExtReal(coeffs[i]) != ExtReal(coeffs[j]):
            return False
    return True
