"""Exact expected multi-payoff vectors for finite-memory and mixed strategies.

Everything reduces to exact rational linear systems on the product chain of
the model with the strategy:

* reachability        -- hitting probabilities of the lifted target,
* Buchi               -- absorption into bottom SCCs meeting the target,
* discounted sum      -- x = r + lambda P x,
* shortest path       -- +inf unless the target is hit almost surely, else
                         the expected accumulated weight before the first hit,
* total reward (>=0)  -- +inf iff a reachable bottom SCC earns positive
                         weight, else the transient accumulated weight,
* gated discounted    -- E[DS * 1Reach] = E[DS] - y(init) where y solves the
                         avoid-restricted discounted system driven by the
                         never-reach probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Set, Tuple

from .errors import UndefinedExpectation, UnsupportedKind
from .linalg import solve_linear
from .model import Pomdp, WeightFunction
from .payoffs import (BuchiIndicator, DiscountedSum, MultiPayoff, PayoffSpec,
                      ReachGatedDiscountedSum, ReachIndicator, ShortestPath,
                      TotalRewardNonNeg)
from .rationals import ExtReal, ExtRealVector, NEG_INF, POS_INF
from .strategies import (FiniteMemoryStrategy, FiniteMixture, MarkovChain, MemorySkeleton,
                         PureStrategy, enumerate_pure, product_chain)

__all__ = [
    "expected_payoff", "pure_payoff_set", "mixed_expected_payoff",
    "classify_integrability", "IntegrabilityVerdict", "maximal_end_components",
]


# -- chain utilities ----------------------------------------------------------------


def _edges(chain: MarkovChain) -> List[Tuple[int, ...]]:
    return [tuple(sorted(row.keys())) for row in chain.matrix]


def _backward_closure(chain: MarkovChain, targets: Set[int]) -> Set[int]:
    """Nodes from which some target node is reachable."""
    incoming: List[List[int]] = [[] for _ in chain.nodes]
    for i, row in enumerate(chain.matrix):
        for j in row:
            incoming[j].append(i)
    seen = set(targets)
    stack = list(targets)
    while stack:
        node = stack.pop()
        for pred in incoming[node]:
            if pred not in seen:
                seen.add(pred)
                stack.append(pred)
    return seen


def _chain_sccs(chain: MarkovChain):
    """SCCs of the chain graph (iterative Tarjan), plus a bottom flag each."""
    n = len(chain.nodes)
    succ = _edges(chain)
    index = [None] * n
    low = [0] * n
    on_stack = [False] * n
    stack: List[int] = []
    counter = [0]
    comps: List[List[int]] = []
    for root in range(n):
        if index[root] is not None:
            continue
        work = [(root, iter(succ[root]))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if index[nxt] is None:
                    index[nxt] = low[nxt] = counter[0]
                    counter[0] += 1
                    stack.append(nxt)
                    on_stack[nxt] = True
                    work.append((nxt, iter(succ[nxt])))
                    advanced = True
                    break
                if on_stack[nxt]:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == node:
                        break
                comps.append(comp)
    bottom = []
    for comp in comps:
        members = set(comp)
        is_bottom = all(j in members for i in comp for j in succ[i])
        bottom.append(is_bottom)
    return comps, bottom


def _reach_probabilities(chain: MarkovChain, targets: Set[int]) -> List[Fraction]:
    """Exact P(eventually hit `targets`) per node."""
    n = len(chain.nodes)
    probs = [Fraction(0)] * n
    for t in targets:
        probs[t] = Fraction(1)
    can = _backward_closure(chain, targets)
    interior = sorted(can - targets)
    if not interior:
        return probs
    pos = {node: k for k, node in enumerate(interior)}
    size = len(interior)
    matrix = [[Fraction(0)] * size for _ in range(size)]
    rhs = [Fraction(0)] * size
    for node in interior:
        k = pos[node]
        matrix[k][k] += 1
        for j, p in chain.matrix[node].items():
            if j in targets:
                rhs[k] += p
            elif j in pos:
                matrix[k][pos[j]] -= p
    solution = solve_linear(matrix, rhs)
    for node, k in pos.items():
        probs[node] = solution[k]
    return probs


def _expected_step_weights(chain: MarkovChain, weights: WeightFunction) -> List[Fraction]:
    out = []
    for i, (s, _mem) in enumerate(chain.nodes):
        out.append(sum((alpha * weights(s, a) for a, alpha in chain.action_dists[i].items()),
                       Fraction(0)))
    return out


def _solve_discounted(chain: MarkovChain, discount: Fraction, rewards: Sequence[Fraction]) -> List[Fraction]:
    """Unique solution of x = r + lambda P x over all chain nodes."""
    n = len(chain.nodes)
    matrix = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        matrix[i][i] += 1
        for j, p in chain.matrix[i].items():
            matrix[i][j] -= discount * p
    return solve_linear(matrix, list(rewards))


# -- per-kind evaluation -------------------------------------------------------------


def _eval_reach(chain: MarkovChain, target: frozenset) -> ExtReal:
    targets = {i for i, (s, _m) in enumerate(chain.nodes) if s in target}
    if chain.init in targets:
        return ExtReal(1)
    return ExtReal(_reach_probabilities(chain, targets)[chain.init])


def _eval_buchi(chain: MarkovChain, target: frozenset) -> ExtReal:
    comps, bottom = _chain_sccs(chain)
    good: Set[int] = set()
    for comp, is_bottom in zip(comps, bottom):
        if is_bottom and any(chain.state_of(i) in target for i in comp):
            good.update(comp)
    if not good:
        return ExtReal(0)
    if chain.init in good:
        return ExtReal(1)
    return ExtReal(_reach_probabilities(chain, good)[chain.init])


def _eval_discounted(chain: MarkovChain, spec: DiscountedSum) -> ExtReal:
    rewards = _expected_step_weights(chain, spec.weights)
    return ExtReal(_solve_discounted(chain, spec.discount, rewards)[chain.init])


def _stopped_chain(chain: MarkovChain, target: frozenset) -> Tuple[MarkovChain, Set[int]]:
    """Make lifted target nodes absorbing and restrict to the part reachable
    from the initial node of the stopped dynamics."""
    targets = {i for i, (s, _m) in enumerate(chain.nodes) if s in target}
    keep = []
    seen = {chain.init}
    queue = [chain.init]
    while queue:
        i = queue.pop(0)
        keep.append(i)
        if i in targets:
            continue
        for j in chain.matrix[i]:
            if j not in seen:
                seen.add(j)
                queue.append(j)
    remap = {old: new for new, old in enumerate(keep)}
    nodes = tuple(chain.nodes[i] for i in keep)
    rows = []
    dists = []
    for old in keep:
        if old in targets:
            rows.append({remap[old]: Fraction(1)})
        else:
            rows.append({remap[j]: p for j, p in chain.matrix[old].items()})
        dists.append(chain.action_dists[old])
    stopped = MarkovChain(nodes, {n: i for i, n in enumerate(nodes)}, tuple(rows),
                          tuple(dists), remap[chain.init], chain.model)
    return stopped, {remap[i] for i in targets if i in remap}


def _eval_shortest_path(chain: MarkovChain, spec: ShortestPath) -> ExtReal:
    stopped, targets = _stopped_chain(chain, spec.target)
    if stopped.init in targets:
        return ExtReal(0)
    reach = _reach_probabilities(stopped, targets)
    if reach[stopped.init] != 1:
        return POS_INF
    interior = [i for i in range(len(stopped.nodes)) if i not in targets]
    pos = {node: k for k, node in enumerate(interior)}
    rewards = _expected_step_weights(stopped, spec.weights)
    matrix = [[Fraction(0)] * len(interior) for _ in interior]
    rhs = [Fraction(0)] * len(interior)
    for node in interior:
        k = pos[node]
        matrix[k][k] += 1
        rhs[k] += rewards[node]
        for j, p in stopped.matrix[node].items():
            if j in pos:
                matrix[k][pos[j]] -= p
    solution = solve_linear(matrix, rhs)
    return ExtReal(solution[pos[stopped.init]])


def _eval_total_reward(chain: MarkovChain, spec: TotalRewardNonNeg) -> ExtReal:
    rewards = _expected_step_weights(chain, spec.weights)
    comps, bottom = _chain_sccs(chain)
    recurrent: Set[int] = set()
    for comp, is_bottom in zip(comps, bottom):
        if is_bottom:
            if any(rewards[i] > 0 for i in comp):
                return POS_INF  # every chain node is reachable from init
            recurrent.update(comp)
    transient = [i for i in range(len(chain.nodes)) if i not in recurrent]
    if chain.init in recurrent:
        return ExtReal(0)
    pos = {node: k for k, node in enumerate(transient)}
    matrix = [[Fraction(0)] * len(transient) for _ in transient]
    rhs = [Fraction(0)] * len(transient)
    for node in transient:
        k = pos[node]
        matrix[k][k] += 1
        rhs[k] += rewards[node]
        for j, p in chain.matrix[node].items():
            if j in pos:
                matrix[k][pos[j]] -= p
    solution = solve_linear(matrix, rhs)
    return ExtReal(solution[pos[chain.init]])


def _eval_gated_discounted(chain: MarkovChain, spec: ReachGatedDiscountedSum,
                           strategy: FiniteMemoryStrategy) -> ExtReal:
    plain = _eval_discounted(chain, DiscountedSum(spec.discount, spec.weights))
    targets = {i for i, (s, _m) in enumerate(chain.nodes) if s in spec.target}
    if chain.init in targets:
        return plain
    reach = _reach_probabilities(chain, targets)
    never = [1 - p for p in reach]  # h(c) = P(avoid target forever from c)
    model = chain.model
    interior = [i for i in range(len(chain.nodes)) if i not in targets]
    pos = {node: k for k, node in enumerate(interior)}
    matrix = [[Fraction(0)] * len(interior) for _ in interior]
    rhs = [Fraction(0)] * len(interior)
    for node in interior:
        k = pos[node]
        matrix[k][k] += 1
        s, mem = chain.nodes[node]
        z = model.obs[s]
        for a, alpha in chain.action_dists[node].items():
            if alpha == 0:
                continue
            nxt_mem = strategy.skeleton.step(mem, z, a)
            for t, p in model.dist(s, a).items():
                if p == 0 or t in spec.target:
                    continue
                succ = chain.index[(t, nxt_mem)]
                rhs[k] += alpha * spec.weights(s, a) * p * never[succ]
                matrix[k][pos[succ]] -= spec.discount * alpha * p
    solution = solve_linear(matrix, rhs)
    avoided = solution[pos[chain.init]]  # E[DS * 1{never reach}]
    return ExtReal(plain.finite - avoided)


def expected_payoff(model: Pomdp, strategy: FiniteMemoryStrategy, start: str,
                    dims: MultiPayoff) -> ExtRealVector:
    """Exact expected payoff vector of a finite-memory strategy."""
    chain = product_chain(model, strategy, start)
    values = []
    for spec in dims:
        if isinstance(spec, ReachIndicator):
            values.append(_eval_reach(chain, spec.target))
        elif isinstance(spec, BuchiIndicator):
            values.append(_eval_buchi(chain, spec.target))
        elif isinstance(spec, DiscountedSum):
            values.append(_eval_discounted(chain, spec))
        elif isinstance(spec, ShortestPath):
            values.append(_eval_shortest_path(chain, spec))
        elif isinstance(spec, TotalRewardNonNeg):
            values.append(_eval_total_reward(chain, spec))
        elif isinstance(spec, ReachGatedDiscountedSum):
            values.append(_eval_gated_discounted(chain, spec, strategy))
        else:
            raise UnsupportedKind(type(spec).__name__)
    return ExtRealVector(values)


# -- pools ----------------------------------------------------------------------------


def pure_payoff_set(model: Pomdp, start: str, dims: MultiPayoff, skeleton: MemorySkeleton,
                    cap: int = 1_000_000) -> List[Tuple[PureStrategy, ExtRealVector]]:
    """Expected payoff of every pure strategy over the skeleton, in
    enumeration order.  Duplicate vectors are retained with their strategies.

    Strategies whose reachable behaviour from `start` coincides share one
    evaluation (the product chain is identical), which keeps large pools
    cheap without changing any result.
    """
    memo: Dict[object, ExtRealVector] = {}
    results = []
    for strategy in enumerate_pure(model, skeleton, cap=cap):
        key = _behaviour_signature(model, strategy, start)
        vec = memo.get(key)
        if vec is None:
            vec = expected_payoff(model, strategy, start, dims)
            memo[key] = vec
        results.append((strategy, vec))
    return results


def _behaviour_signature(model: Pomdp, strategy: PureStrategy, start: str):
    """The strategy's choices restricted to (state, memory) pairs reachable
    from `start`; two strategies with equal signatures induce the same chain."""
    seen = {(start, strategy.skeleton.init)}
    queue = [(start, strategy.skeleton.init)]
    sig = []
    while queue:
        s, mem = queue.pop()
        z = model.obs[s]
        a = strategy.action_at(mem, z)
        sig.append((s, mem, a))
        nxt_mem = strategy.skeleton.step(mem, z, a)
        for t, p in model.dist(s, a).items():
            if p > 0 and (t, nxt_mem) not in seen:
                seen.add((t, nxt_mem))
                queue.append((t, nxt_mem))
    sig.sort(key=str)
    return tuple(sig)


def mixed_expected_payoff(model: Pomdp, mixture: FiniteMixture, start: str,
                          dims: MultiPayoff) -> ExtRealVector:
    """Weighted sum of the pure expected payoffs, under 0 * inf = 0.

    Raises UndefinedExpectation if a dimension mixes +inf and -inf with
    positive weights.
    """
    vectors = [expected_payoff(model, member, start, dims) for member in mixture.support]
    return ExtRealVector.combine(mixture.weights, vectors)


# -- integrability classification --------------------------------------------------------


@dataclass(frozen=True)
class IntegrabilityVerdict:
    """One of "universally_integrable", "universally_unambiguously_integrable_only",
    "not_unambiguous", "unknown"; `witness` carries supporting data when the
    verdict is not plain integrability (an avoiding strategy, an end
    component, or a reason string)."""

    verdict: str
    witness: object = None

    UI = "universally_integrable"
    UUI_ONLY = "universally_unambiguously_integrable_only"
    NOT_UNAMBIGUOUS = "not_unambiguous"
    UNKNOWN = "unknown"


def maximal_end_components(model: Pomdp):
    """Maximal end components of the model viewed as an MDP: maximal state
    sets closed under some non-empty action selection.  Returns a list of
    (states frozenset, kept (state, action) pairs)."""
    allowed: Dict[str, Set[str]] = {s: set(model.enabled(s)) for s in model.states}
    alive = set(model.states)
    while True:
        graph = {s: set() for s in alive}
        for s in alive:
            for a in allowed[s]:
                for t, p in model.dist(s, a).items():
                    if p > 0:
                        graph[s].add(t)
        comps = _graph_sccs(graph, sorted(alive, key=model.states.index))
        comp_of = {}
        for i, comp in enumerate(comps):
            for s in comp:
                comp_of[s] = i
        changed = False
        for s in sorted(alive, key=model.states.index):
            keep = set()
            for a in allowed[s]:
                supp = {t for t, p in model.dist(s, a).items() if p > 0}
                if all(comp_of.get(t) == comp_of[s] for t in supp):
                    keep.add(a)
            if keep != allowed[s]:
                allowed[s] = keep
                changed = True
            if not keep and s in alive:
                alive.discard(s)
                changed = True
        if not changed:
            break
    mecs = []
    graph = {s: set() for s in alive}
    for s in alive:
        for a in allowed[s]:
            for t, p in model.dist(s, a).items():
                if p > 0:
                    graph[s].add(t)
    for comp in _graph_sccs(graph, sorted(alive, key=model.states.index)):
        pairs = frozenset((s, a) for s in comp for a in allowed[s])
        has_cycle = len(comp) > 1 or any(
            s in {t for t, p in model.dist(s, a).items() if p > 0}
            for s in comp for a in allowed[s])
        if pairs and has_cycle:
            mecs.append((frozenset(comp), pairs))
    return mecs


def _graph_sccs(graph: Mapping[str, Set[str]], order: Sequence[str]):
    index: Dict[str, int] = {}
    low: Dict[str, int] = {}
    on_stack: Dict[str, bool] = {}
    stack: List[str] = []
    counter = [0]
    comps: List[List[str]] = []
    for root in order:
        if root in index:
            continue
        work = [(root, iter(sorted(graph[root])))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in graph:
                    continue
                if nxt not in index:
                    index[nxt] = low[nxt] = counter[0]
                    counter[0] += 1
                    stack.append(nxt)
                    on_stack[nxt] = True
                    work.append((nxt, iter(sorted(graph[nxt]))))
                    advanced = True
                    break
                if on_stack.get(nxt):
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == node:
                        break
                comps.append(comp)
    return comps


def classify_integrability(model: Pomdp, dims: MultiPayoff, start: str) -> List[IntegrabilityVerdict]:
    """Per-dimension integrability classification.

    Bounded kinds are universally integrable outright.  Shortest-path
    payoffs are universally (square) integrable exactly when every strategy
    reaches the target almost surely, decided on belief supports.  For
    non-negative total reward the test is the existence of a reachable end
    component earning positive weight; for genuinely partially observable
    models the positive-cycle direction is not decided by this library and
    the verdict is "unknown".
    """
    from .beliefs import universal_as_reach  # local import avoids a cycle

    verdicts = []
    for spec in dims:
        if isinstance(spec, (ReachIndicator, BuchiIndicator, DiscountedSum,
                             ReachGatedDiscountedSum)):
            verdicts.append(IntegrabilityVerdict(IntegrabilityVerdict.UI))
        elif isinstance(spec, ShortestPath):
            result = universal_as_reach(model, start, spec.target)
            if result.holds:
                verdicts.append(IntegrabilityVerdict(IntegrabilityVerdict.UI))
            else:
                verdicts.append(IntegrabilityVerdict(IntegrabilityVerdict.UUI_ONLY,
                                                     witness=result.witness))
        elif isinstance(spec, TotalRewardNonNeg):
            verdicts.append(_classify_total_reward(model, spec, start))
        else:
            verdicts.append(IntegrabilityVerdict(IntegrabilityVerdict.UNKNOWN,
                                                 witness=f"unsupported kind {type(spec).__name__}"))
    return verdicts


def _classify_total_reward(model: Pomdp, spec: TotalRewardNonNeg, start: str) -> IntegrabilityVerdict:
    from .model import reachable_states

    reachable = reachable_states(model, start)
    positive_mec = None
    for states, pairs in maximal_end_components(model):
        if not (states & reachable):
            continue
        earning = [(s, a) for (s, a) in sorted(pairs) if spec.weights(s, a) > 0]
        if earning:
            positive_mec = (states, earning[0])
            break
    if positive_mec is None:
        # No strategy, observation-based or not, can earn unbounded weight.
        return IntegrabilityVerdict(IntegrabilityVerdict.UI)
    if model.is_mdp:
        return IntegrabilityVerdict(IntegrabilityVerdict.UUI_ONLY, witness=positive_mec)
    # A fully-observing controller could earn +inf, but whether an
    # observation-based one can is not decided here.
    return IntegrabilityVerdict(IntegrabilityVerdict.UNKNOWN, witness=positive_mec)
