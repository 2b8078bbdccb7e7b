"""A payoff set that is not a polytope.

On a four-state deterministic model with two discounted objectives, the pure
payoffs lie on a strictly concave curve: every single one of them is an
extreme point of the payoff set, so the set has infinitely many corners and
some of them need arbitrarily large (finite) memory to reach.
"""

import momix as mx

model, dims = mx.load_problem(open("models/two_discounts.json").read())

for horizon in (3, 6, 9):
    pool = mx.pure_payoff_set(model, "s0", dims, mx.counter(model, horizon))
    distinct = []
    for _s, v in pool:
        if v not in distinct:
            distinct.append(v)
    points = [v.to_fractions() for v in distinct]
    corners = mx.extreme_points(points)
    pareto = mx.pareto_frontier(distinct)
    print(f"counter horizon {horizon}: {len(distinct)} pure vectors, "
          f"{len(corners)} extreme, {len(pareto)} Pareto-optimal")

print("\nthe horizon-9 pure vectors (every one a corner):")
pool = mx.pure_payoff_set(model, "s0", dims, mx.counter(model, 9))
distinct = []
for _s, v in pool:
    if v not in distinct:
        distinct.append(v)
for v in sorted(distinct, key=lambda v: v.to_floats()):
    print("  ", v)

print("\nonly (0, 2) is dominated (by (1, 2)); the rest trade the two "
      "objectives along a strictly concave curve, so no finite corner list "
      "ever closes the set.")
