"""Seeded simulation as an independent cross-check of the exact engine.

Sampling uses a counter-based generator: sample i reads row i of one uniform
matrix, so estimates are bit-identical across runs and any single play can
be replayed from its index.  Shortest-path samples that have not reached the
target within the horizon are censored and counted, never averaged in.
"""

from fractions import Fraction

import momix as mx

model, dims = mx.load_problem(open("models/commute.json").read())
train = mx.PureStrategy(mx.memoryless(model),
                        {(0, "home"): "train", (0, "ride"): "train", (0, "work"): "meeting"})

exact = mx.expected_payoff(model, train, "home", dims)[0]
print(f"exact expected commute time: {exact}")

for n in (1_000, 10_000, 100_000):
    cfg = mx.SampleConfig(samples=n, horizon=256, seed=2024)
    est = mx.estimate_expectation(model, train, "home", dims, cfg)
    print(f"  n={n:>6}: mean {est.mean[0]:.4f}  stderr {est.stderr[0]:.4f}  "
          f"censored {est.censored[0]}")

cfg = mx.SampleConfig(samples=5_000, horizon=256, seed=2024)
again = mx.estimate_expectation(model, train, "home", dims, cfg)
same = mx.estimate_expectation(model, train, "home", dims, cfg)
print("\nsame seed, same estimate:", again == same)

print("\nreplaying sample 17 of that run:")
play = mx.sample_play(model, train, "home", 8, seed=2024, index=17)
print("  " + " ".join(play))

# A mixture draws its member once at the start, then commits.
mix = mx.FiniteMixture.of([(train, Fraction(3, 4)),
                           (mx.PureStrategy(mx.memoryless(model),
                                            {(0, "home"): "bike", (0, "ride"): "train",
                                             (0, "work"): "meeting"}), Fraction(1, 4))])
est = mx.estimate_expectation(model, mix, "home", dims,
                              mx.SampleConfig(samples=50_000, horizon=256, seed=7))
exact_mix = mx.mixed_expected_payoff(model, mix, "home", dims)[0]
print(f"\nmixture: exact {exact_mix} ({float(exact_mix):.3f}) vs "
      f"sampled {est.mean[0]:.3f} +/- {3 * est.stderr[0]:.3f}")
