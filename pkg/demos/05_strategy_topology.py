"""Convergence of strategies vs convergence of their values.

The family "play a for n rounds, then switch to b forever" converges to
"always a" pointwise (the premetric to the limit vanishes at any fixed
horizon), and for bounded payoffs the values follow.  For the unbounded
shortest-path payoff they do not: every family member has value +inf while
the limit strategy has value 2.
"""

from fractions import Fraction

import momix as mx

model, dims = mx.load_problem(open("models/coin_exit.json").read())


def switch_after(n):
    sk = mx.counter(model, n)
    table = {}
    for q in range(n + 1):
        table[(q, "s")] = "a" if q < n else "b"
        table[(q, "t")] = "a"
    return mx.PureStrategy(sk, table)


limit = mx.PureStrategy(mx.memoryless(model), {(0, "s"): "a", (0, "t"): "a"})
family = [(n, switch_after(n)) for n in range(1, 9)]

print("shortest-path payoff (diverges):")
table = mx.convergence_probe(model, family, limit, "s", dims, premetric_horizon=4)
print(f"  limit strategy value: {table.limit_vector}")
for row in table.rows[:5]:
    print(f"  n={row.index}: value {row.vector}, squared distance to limit "
          f"at horizon 4 = {row.premetric_sq}")
print("  every member is +inf, yet the family converges to a strategy of value 2.")

stay = mx.WeightFunction({("s", "a"): Fraction(1), ("s", "b"): Fraction(0),
                          ("t", "a"): Fraction(0)})
bounded = (mx.DiscountedSum(Fraction(1, 2), stay),)
print("\ndiscounted payoff (converges):")
table = mx.convergence_probe(model, family, limit, "s", bounded, premetric_horizon=4)
lim = table.limit_vector[0].finite
print(f"  limit value: {lim}")
for row in table.rows[:6]:
    gap = abs(row.vector[0].finite - lim)
    print(f"  n={row.index}: value {row.vector[0]}, gap {gap}")
print("  the gap shrinks by an exact factor of 4 per step.")
