"""Seeded Monte-Carlo estimation cross-checking the exact evaluator.

This is the only module that touches floating point.  Randomness comes from
the counter-based Philox generator with an explicit 64-bit seed; sample i
consumes exactly the i-th row of the (n, horizon+1) uniform matrix, so
estimates are bit-identical across runs and individual plays can be replayed
from their sample index alone.

Shortest-path samples that do not reach the target within the horizon are
*censored*: they are excluded from the mean and reported through a count,
because the payoff is +inf on non-reaching plays and no unbiased finite
estimator exists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import UnsupportedKind
from .model import Pomdp
from .payoffs import (BuchiIndicator, DiscountedSum, MultiPayoff, ReachGatedDiscountedSum,
                      ReachIndicator, ShortestPath, TotalRewardNonNeg)
from .rationals import ExtRealVector
from .strategies import (FiniteMemoryStrategy, FiniteMixture, MarkovChain,
                         product_chain, strategy_premetric)


@dataclass(frozen=True)
class SampleConfig:
    samples: int
    horizon: int
    seed: int

    def __post_init__(self):
        if self.samples < 1 or self.horizon < 1:
            raise ValueError("samples and horizon must be >= 1")


@dataclass(frozen=True)
class Estimate:
    mean: Tuple[float, ...]
    stderr: Tuple[float, ...]
    samples: int
    horizon: int
    seed: int
    bias_bound: Tuple[Optional[Fraction], ...]
    censored: Tuple[int, ...]


class _ChainSampler:
    """Flattens a product chain into edge arrays for vectorized walking.

    Each step consumes one uniform draw and picks a joint (action, successor)
    edge; the law is exactly "draw the action, then the successor".  Edge
    order is deterministic (action order, then successor node index), and
    each node's cumulative row ends at exactly 1.0.
    """

    def __init__(self, model: Pomdp, strategy: FiniteMemoryStrategy, start: str):
        self.chain = product_chain(model, strategy, start)
        chain = self.chain
        n = len(chain.nodes)
        edges: List[List[Tuple[float, int, str]]] = []
        max_deg = 0
        for i, (s, mem) in enumerate(chain.nodes):
            z = model.obs[s]
            row = []
            for a in model.actions:
                alpha = chain.action_dists[i].get(a)
                if not alpha:
                    continue
                nxt_mem = strategy.skeleton.step(mem, z, a)
                for t in model.states:
                    p = model.dist(s, a).get(t, Fraction(0))
                    if p > 0:
                        row.append((float(alpha * p), chain.index[(t, nxt_mem)], a))
            edges.append(row)
            max_deg = max(max_deg, len(row))
        self.cum = np.ones((n, max_deg), dtype=np.float64)
        self.next = np.zeros((n, max_deg), dtype=np.int64)
        self.actions = [[a for _p, _j, a in row] for row in edges]
        for i, row in enumerate(edges):
            acc = 0.0
            for k, (p, j, _a) in enumerate(row):
                acc += p
                self.cum[i, k] = acc
                self.next[i, k] = j
            self.cum[i, len(row) - 1] = 1.0  # absorb float rounding

    def edge_weights(self, weights) -> np.ndarray:
        out = np.zeros(self.next.shape, dtype=np.float64)
        for i, (s, _mem) in enumerate(self.chain.nodes):
            for k, a in enumerate(self.actions[i]):
                out[i, k] = float(weights(s, a))
        return out

    def target_flags(self, target) -> np.ndarray:
        return np.array([s in target for s, _m in self.chain.nodes], dtype=bool)


def _uniform_matrix(seed: int, samples: int, horizon: int) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(key=seed))
    return gen.random((samples, horizon + 1))


def sample_play(model: Pomdp, strategy, start: str, horizon: int, seed: int,
                index: int = 0) -> Tuple[str, ...]:
    """One play prefix of `horizon` steps, reproducible from (seed, index).

    `strategy` may be a finite-memory strategy or a finite mixture; a mixture
    draws its pure member once, from the first draw of the sample's row.
    """
    u = _uniform_matrix(seed, index + 1, horizon)[index]
    if isinstance(strategy, FiniteMixture):
        member = _pick_member(strategy, u[0])
        sampler = _ChainSampler(model, member, start)
    else:
        sampler = _ChainSampler(model, strategy, start)
    chain = sampler.chain
    node = chain.init
    out: List[str] = [chain.nodes[node][0]]
    for t in range(horizon):
        r = u[t + 1]
        k = int(np.sum(sampler.cum[node] <= r))
        out.append(sampler.actions[node][k])
        node = int(sampler.next[node, k])
        out.append(chain.nodes[node][0])
    return tuple(out)


def _pick_member(mixture: FiniteMixture, draw: float):
    acc = 0.0
    cuts = []
    for w in mixture.weights:
        acc += float(w)
        cuts.append(acc)
    cuts[-1] = 1.0
    for member, cut in zip(mixture.support, cuts):
        if draw < cut:
            return member
    return mixture.support[-1]


def estimate_expectation(model: Pomdp, strategy, start: str, dims: MultiPayoff,
                         cfg: SampleConfig) -> Estimate:
    """Sample means of horizon-truncated payoffs with standard errors.

    Bias bounds: discounted sums carry the geometric tail bound
    W * lambda^H / (1 - lambda) (gated variants likewise once the gate has
    resolved); other kinds report None and expose a censored/unresolved count
    instead.
    """
    n, horizon, seed = cfg.samples, cfg.horizon, cfg.seed
    for spec in dims:
        if isinstance(spec, BuchiIndicator):
            raise UnsupportedKind("Buchi indicators are not horizon-determined; "
                                  "no truncation policy is provided")
    u = _uniform_matrix(seed, n, horizon)

    if isinstance(strategy, FiniteMixture):
        member_rows: List[Tuple[FiniteMemoryStrategy, np.ndarray]] = []
        cuts = []
        acc = 0.0
        for w in strategy.weights:
            acc += float(w)
            cuts.append(acc)
        cuts[-1] = 1.0
        draws = u[:, 0]
        prev = 0.0
        for member, cut in zip(strategy.support, cuts):
            mask = (draws >= prev) & (draws < cut)
            prev = cut
            member_rows.append((member, np.nonzero(mask)[0]))
    else:
        member_rows = [(strategy, np.arange(n))]

    values = np.zeros((n, len(dims)), dtype=np.float64)
    resolved = np.ones((n, len(dims)), dtype=bool)

    for member, rows in member_rows:
        if len(rows) == 0:
            continue
        sampler = _ChainSampler(model, member, start)
        _walk(model, sampler, dims, u, rows, horizon, values, resolved)

    means, errs, censored = [], [], []
    for j in range(len(dims)):
        ok = resolved[:, j]
        censored.append(int(n - ok.sum()))
        data = values[ok, j] if ok.any() else np.zeros(1)
        means.append(float(data.mean()))
        errs.append(float(data.std(ddof=1) / math.sqrt(max(len(data), 1))) if len(data) > 1 else 0.0)

    return Estimate(
        mean=tuple(means), stderr=tuple(errs), samples=n, horizon=horizon, seed=seed,
        bias_bound=tuple(_bias_bound(spec, horizon) for spec in dims),
        censored=tuple(censored),
    )


def _bias_bound(spec, horizon: int) -> Optional[Fraction]:
    if isinstance(spec, (DiscountedSum, ReachGatedDiscountedSum)):
        lam = spec.discount
        w = spec.weights.max_abs
        return w * lam ** horizon / (1 - lam) if lam > 0 else Fraction(0)
    return None


def _walk(model, sampler: _ChainSampler, dims, u, rows, horizon, values, resolved):
    chain = sampler.chain
    m = len(rows)

    ds_weights = {}
    ds_factor = {}
    sp_weights = {}
    hit_flags = {}
    acc = np.zeros((m, len(dims)), dtype=np.float64)
    hit = {}
    for j, spec in enumerate(dims):
        if isinstance(spec, (DiscountedSum, ReachGatedDiscountedSum)):
            ds_weights[j] = sampler.edge_weights(spec.weights)
            ds_factor[j] = 1.0
        elif isinstance(spec, TotalRewardNonNeg):
            ds_weights[j] = sampler.edge_weights(spec.weights)
            ds_factor[j] = None  # undiscounted partial sum
        elif isinstance(spec, ShortestPath):
            sp_weights[j] = sampler.edge_weights(spec.weights)
        if isinstance(spec, (ReachIndicator, ReachGatedDiscountedSum, ShortestPath)):
            hit_flags[j] = sampler.target_flags(spec.target)
            hit[j] = np.full(m, bool(hit_flags[j][chain.init]), dtype=bool)

    state = np.full(m, chain.init, dtype=np.int64)
    discount_pow = {j: 1.0 for j in ds_factor}
    for t in range(horizon):
        r = u[rows, t + 1]
        k = (sampler.cum[state] <= r[:, None]).sum(axis=1)
        for j, spec in enumerate(dims):
            if j in ds_weights:
                w = ds_weights[j][state, k]
                if ds_factor[j] is None:
                    acc[:, j] += w
                else:
                    acc[:, j] += discount_pow[j] * w
            elif j in sp_weights:
                live = ~hit[j]
                acc[live, j] += sp_weights[j][state[live], k[live]]
        state = sampler.next[state, k]
        for j in discount_pow:
            if ds_factor[j] is not None:
                discount_pow[j] *= float(dims[j].discount)
        for j in hit:
            hit[j] |= hit_flags[j][state]

    for j, spec in enumerate(dims):
        if isinstance(spec, ReachIndicator):
            values[rows, j] = hit[j].astype(np.float64)
        elif isinstance(spec, DiscountedSum):
            values[rows, j] = acc[:, j]
        elif isinstance(spec, TotalRewardNonNeg):
            values[rows, j] = acc[:, j]
        elif isinstance(spec, ReachGatedDiscountedSum):
            values[rows, j] = np.where(hit[j], acc[:, j], 0.0)
        elif isinstance(spec, ShortestPath):
            values[rows, j] = np.where(hit[j], acc[:, j], 0.0)
            resolved[rows[~hit[j]], j] = False
        else:
            raise UnsupportedKind(type(spec).__name__)


# -- convergence probes -------------------------------------------------------------------


@dataclass(frozen=True)
class ProbeRow:
    index: int
    vector: ExtRealVector
    premetric_sq: Fraction  # squared distance to the limit strategy


@dataclass(frozen=True)
class ProbeTable:
    rows: Tuple[ProbeRow, ...]
    limit_vector: ExtRealVector


def convergence_probe(model: Pomdp, family: Sequence[Tuple[int, FiniteMemoryStrategy]],
                      limit: FiniteMemoryStrategy, start: str, dims: MultiPayoff,
                      premetric_horizon: int) -> ProbeTable:
    """Exact payoff vectors along a strategy family, with the squared
    premetric to the limit strategy, for convergence (or divergence)
    assertions."""
    from .evaluate import expected_payoff

    rows = []
    for index, member in family:
        vec = expected_payoff(model, member, start, dims)
        dist = strategy_premetric(model, member, limit, premetric_horizon)
        rows.append(ProbeRow(index, vec, dist))
    return ProbeTable(tuple(rows), expected_payoff(model, limit, start, dims))
