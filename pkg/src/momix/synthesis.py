"""Strategy synthesis over finite pure pools: exact target matching,
(eps, M)-approximation with infinite components, lexicographic optimization
and support reduction of mixtures.

A "pool" is a list of (pure strategy, exact expected payoff vector) pairs as
produced by :func:`momix.evaluate.pure_payoff_set`.  Certificates always
carry the realized vector and are re-verified by exact recombination before
they are returned.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .errors import InfeasibleApproximation, NotAchievable, NotDominated, NotInHull
from .geometry import Decomposition, achievability_lp, caratheodory
from .lp import LinearProgram
from .rationals import ExtReal, ExtRealVector
from .strategies import FiniteMixture, PureStrategy

Pool = Sequence[Tuple[PureStrategy, ExtRealVector]]


@dataclass(frozen=True)
class MixtureCertificate:
    mixture: FiniteMixture
    realized: ExtRealVector
    relation: Tuple  # ("equals",), ("dominates",) or ("approximates", eps, M)
    target: ExtRealVector
    pool_info: Optional[str] = None

    def verify(self) -> bool:
        kind = self.relation[0]
        if kind == "equals":
            return self.realized == self.target
        if kind == "dominates":
            return self.realized.dominates(self.target)
        _, eps, big_m = self.relation
        for got, want in zip(self.realized, self.target):
            if want.inf > 0:
                if not (got >= ExtReal(big_m)):
                    return False
            elif want.inf < 0:
                if not (got <= ExtReal(-Fraction(big_m))):
                    return False
            else:
                lo, hi = want.finite - eps, want.finite + eps
                if not (got.is_finite and lo <= got.finite <= hi):
                    return False
        return True


@dataclass(frozen=True)
class LexResult:
    winner_index: int
    strategy: PureStrategy
    vector: ExtRealVector
    pool_size: int
    certified: bool  # every pool member compared lex-below the winner


def _finite_members(pool: Pool):
    """First pool index per distinct finite vector.  Mixtures over duplicate
    vectors are interchangeable, and collapsing them keeps the LPs small even
    when the enumerated pool contains thousands of table variants."""
    seen = {}
    idx, points = [], []
    for i, (_s, v) in enumerate(pool):
        if v.is_finite and v not in seen:
            seen[v] = i
            idx.append(i)
            points.append(v.to_fractions())
    return idx, points


def _distinct_members(pool: Pool):
    seen = set()
    out = []
    for i, (_s, v) in enumerate(pool):
        if v not in seen:
            seen.add(v)
            out.append(i)
    return out


def _mixture_from(pool: Pool, indices, coefficients) -> FiniteMixture:
    return FiniteMixture.of(
        (pool[i][0], c) for i, c in zip(indices, coefficients)
    )


def _realized(pool: Pool, indices, coefficients) -> ExtRealVector:
    return ExtRealVector.combine(list(coefficients), [pool[i][1] for i in indices])


def achieve(model, start, dims, target: ExtRealVector, pool: Pool,
            mode: str = "equals", pool_info: Optional[str] = None) -> MixtureCertificate:
    """An exact mixture realizing (mode "equals", support <= d+1) or
    dominating (mode "dominates", support <= d) a finite target vector.

    Pool members with infinite components cannot carry weight in an exact
    finite recombination and are ignored; use :func:`approximate` for
    infinite targets.
    """
    target = target if isinstance(target, ExtRealVector) else ExtRealVector(target)
    if not target.is_finite:
        raise ValueError("achieve needs a finite target; use approximate")
    if mode not in ("equals", "dominates"):
        raise ValueError("mode must be 'equals' or 'dominates'")
    idx, points = _finite_members(pool)
    if not points:
        raise NotAchievable("pool has no finite-vector members")
    goal = target.to_fractions()
    try:
        if mode == "equals":
            dec = caratheodory(goal, points)
        else:
            dec = achievability_lp(goal, points)
            if dec is None:
                raise NotAchievable(f"{target} is not dominated by the pool hull")
    except (NotInHull, NotDominated) as exc:
        raise NotAchievable(str(exc)) from exc
    indices = [idx[i] for i in dec.indices]
    certificate = MixtureCertificate(
        mixture=_mixture_from(pool, indices, dec.coefficients),
        realized=_realized(pool, indices, dec.coefficients),
        relation=(mode,),
        target=target,
        pool_info=pool_info,
    )
    assert certificate.verify(), "exact recombination check failed"
    return certificate


# -- (eps, M)-approximation ----------------------------------------------------------


def approximate(model, start, dims, target: ExtRealVector, eps: Fraction, big_m: Fraction,
                pool: Pool, pool_info: Optional[str] = None) -> MixtureCertificate:
    """A mixture meeting the three approximation requirements: dimensions
    with target +inf reach at least M, -inf at most -M, finite dimensions
    land within eps.

    Finite-vector mixtures are preferred; when they cannot reach M, one pure
    witness per infinite component is mixed in with a small dyadic weight
    eta chosen so the finite dimensions stay within eps.
    """
    target = target if isinstance(target, ExtRealVector) else ExtRealVector(target)
    eps = Fraction(eps)
    big_m = Fraction(big_m)
    if eps <= 0:
        raise ValueError("eps must be positive")
    d = len(target)
    fin_dims = [j for j in range(d) if target[j].is_finite]
    inf_dims = [j for j in range(d) if not target[j].is_finite]

    attempt = _approx_over_finite(pool, target, fin_dims, inf_dims, eps, big_m)
    if attempt is not None:
        indices, coeffs = attempt
        cert = MixtureCertificate(
            mixture=_mixture_from(pool, indices, coeffs),
            realized=_realized(pool, indices, coeffs),
            relation=("approximates", eps, big_m),
            target=target, pool_info=pool_info,
        )
        assert cert.verify()
        return cert

    cert = _approx_with_witnesses(pool, target, fin_dims, inf_dims, eps, big_m, pool_info)
    if cert is None:
        raise InfeasibleApproximation(
            f"no mixture over this pool approximates {target} at eps={eps}, M={big_m}",
            pool_info=pool_info,
        )
    assert cert.verify()
    return cert


def _approx_over_finite(pool, target, fin_dims, inf_dims, eps, big_m):
    """Feasibility over all-finite pool members only."""
    idx, points = _finite_members(pool)
    if not points:
        return None
    lp = LinearProgram()
    names = [lp.var(f"n{i}") for i in range(len(points))]
    lp.constrain({n: Fraction(1) for n in names}, "==", Fraction(1))
    for j in fin_dims:
        coeffs = {names[i]: points[i][j] for i in range(len(points))}
        t = target[j].finite
        lp.constrain(coeffs, ">=", t - eps)
        lp.constrain(coeffs, "<=", t + eps)
    for j in inf_dims:
        coeffs = {names[i]: points[i][j] for i in range(len(points))}
        if target[j].inf > 0:
            lp.constrain(coeffs, ">=", big_m)
        else:
            lp.constrain(coeffs, "<=", -big_m)
    result = lp.solve({}, maximize=False)
    if not result.ok:
        return None
    kept = [(idx[i], result[names[i]]) for i in range(len(points)) if result[names[i]] > 0]
    return [i for i, _ in kept], [c for _, c in kept]


def _approx_with_witnesses(pool, target, fin_dims, inf_dims, eps, big_m, pool_info):
    """The general construction: dedicated infinite-component witnesses with
    total weight eta, a finite sub-mixture at precision eps/3 for the rest."""
    if not inf_dims:
        return None
    distinct = _distinct_members(pool)

    def eligible_witness(v: ExtRealVector, dim: int) -> bool:
        if v[dim].inf != target[dim].inf or v[dim].inf == 0:
            return False
        for j in range(len(target)):
            if j == dim:
                continue
            if not v[j].is_finite and v[j].inf != target[j].inf:
                return False
        return True

    witnesses: List[int] = []
    for j in inf_dims:
        if any(pool[i][1][j].inf == target[j].inf for i in witnesses):
            continue
        found = next((i for i in distinct if eligible_witness(pool[i][1], j)), None)
        if found is None:
            return None
        witnesses.append(found)

    # Sub-pool: finite on the finite dimensions, never wrong-signed on the
    # infinite ones (a -inf member under a +inf target would poison the mix).
    sub_idx = []
    for i in distinct:
        v = pool[i][1]
        if any(not v[j].is_finite for j in fin_dims):
            continue
        if any(v[j].inf != 0 and v[j].inf != target[j].inf for j in inf_dims):
            continue
        sub_idx.append(i)
    if not sub_idx:
        return None

    lp = LinearProgram()
    names = {i: lp.var(f"n{i}") for i in sub_idx}
    lp.constrain({n: Fraction(1) for n in names.values()}, "==", Fraction(1))
    for j in fin_dims:
        coeffs = {names[i]: pool[i][1][j].finite for i in sub_idx}
        t = target[j].finite
        lp.constrain(coeffs, ">=", t - eps / 3)
        lp.constrain(coeffs, "<=", t + eps / 3)
    result = lp.solve({}, maximize=False)
    if not result.ok:
        return None
    nu = {i: result[names[i]] for i in sub_idx if result[names[i]] > 0}

    share = Fraction(1, len(witnesses))
    eta = Fraction(1, 2)
    while True:
        ok = True
        for j in fin_dims:
            w_j = sum((share * pool[i][1][j].finite for i in witnesses), Fraction(0))
            nu_j = sum((c * pool[i][1][j].finite for i, c in nu.items()), Fraction(0))
            if eta * abs(w_j - nu_j) > 2 * eps / 3:
                ok = False
                break
        if ok:
            break
        eta /= 2

    weights: dict = {}
    for i in witnesses:
        weights[i] = weights.get(i, Fraction(0)) + eta * share
    for i, c in nu.items():
        weights[i] = weights.get(i, Fraction(0)) + (1 - eta) * c
    indices = sorted(weights)
    coeffs = [weights[i] for i in indices]
    return MixtureCertificate(
        mixture=_mixture_from(pool, indices, coeffs),
        realized=_realized(pool, indices, coeffs),
        relation=("approximates", eps, big_m),
        target=target, pool_info=pool_info,
    )


# -- lexicographic optimization -----------------------------------------------------------


def lex_optimize(pool: Pool) -> LexResult:
    """Exact lexicographic maximum over the pool; ties break to the earliest
    enumeration index."""
    if not pool:
        raise ValueError("pool is empty")
    best = 0
    for i in range(1, len(pool)):
        if pool[best][1].lt_lex(pool[i][1]):
            best = i
    winner = pool[best]
    certified = all(v.le_lex(winner[1]) for _s, v in pool)
    return LexResult(best, winner[0], winner[1], len(pool), certified)


def check_pure_dominates_lex(vector: ExtRealVector, pool: Pool):
    """Some pool member whose vector is lex-greater-or-equal to `vector`,
    or None.  Since the lexicographic order is total, the pool maximum is
    the canonical witness."""
    if not pool:
        return None
    best = lex_optimize(pool)
    if vector.le_lex(best.vector):
        return best.winner_index, best.strategy, best.vector
    return None


# -- support reduction ---------------------------------------------------------------------


def reduce_support(mixture: FiniteMixture, vectors: Sequence[ExtRealVector]) -> FiniteMixture:
    """An equivalent mixture with support at most d+1, extended-real
    components included: one witness per infinite component keeps its weight,
    the finite remainder is Caratheodory-reduced after renormalization.

    `vectors` are the exact pure payoffs of the mixture's support, in order.
    """
    vectors = [v if isinstance(v, ExtRealVector) else ExtRealVector(v) for v in vectors]
    if len(vectors) != len(mixture.support):
        raise ValueError("one vector per support member is required")
    realized = ExtRealVector.combine(mixture.weights, vectors)
    d = len(realized)
    if len(mixture.support) <= d + 1:
        return mixture

    inf_dims = [j for j in range(d) if not realized[j].is_finite]
    fin_dims = [j for j in range(d) if realized[j].is_finite]

    witnesses: List[int] = []
    for j in inf_dims:
        if any(vectors[i][j].inf == realized[j].inf for i in witnesses):
            continue
        found = next(i for i in range(len(vectors)) if vectors[i][j].inf == realized[j].inf)
        witnesses.append(found)

    rest = [i for i in range(len(vectors)) if i not in witnesses]
    rest_mass = sum((mixture.weights[i] for i in rest), Fraction(0))

    if rest_mass == 0:
        pairs = [(mixture.support[i], mixture.weights[i]) for i in witnesses]
        reduced = FiniteMixture.of(pairs)
    elif not fin_dims:
        # all dimensions are infinite: drop the rest, renormalize witnesses
        total = sum((mixture.weights[i] for i in witnesses), Fraction(0))
        pairs = [(mixture.support[i], mixture.weights[i] / total) for i in witnesses]
        reduced = FiniteMixture.of(pairs)
    else:
        target = []
        for j in fin_dims:
            acc = realized[j].finite
            for i in witnesses:
                acc -= mixture.weights[i] * vectors[i][j].finite
            target.append(acc / rest_mass)
        points = [tuple(vectors[i][j].finite for j in fin_dims) for i in rest]
        dec = caratheodory(tuple(target), points)
        pairs = [(mixture.support[i], mixture.weights[i]) for i in witnesses]
        pairs += [(mixture.support[rest[t]], rest_mass * c)
                  for t, c in zip(dec.indices, dec.coefficients)]
        reduced = FiniteMixture.of(pairs)

    # exact preservation check, extended reals included
    kept_vectors = []
    for member in reduced.support:
        kept_vectors.append(vectors[mixture.support.index(member)])
    assert ExtRealVector.combine(reduced.weights, kept_vectors) == realized, \
        "support reduction changed the realized vector"
    assert len(reduced.support) <= d + 1
    return reduced
