"""Belief supports decide when a shortest path has finite expectation.

Whether *every* strategy reaches a target almost surely is a safety game on
belief supports: the answer is no exactly when some reachable state admits a
belief-based strategy that keeps every possible support away from the target
forever.  When the answer is yes, an explicit geometric bound kicks in.
"""

from fractions import Fraction

import momix as mx

# A model where avoiding is possible: loop on b forever.
model7, _ = mx.load_problem(open("models/coin_exit.json").read())
verdict, result = mx.classify_shortest_path(model7, "s", frozenset({"t"}))
print(f"coin-flip model: {verdict}")
print(f"  avoider found at state {result.witness_state}; its reach probability is",
      mx.expected_payoff(model7, result.witness, "s",
                         (mx.ReachIndicator(frozenset({'t'})),))[0])

# The commute: no strategy can dodge the office forever.
commute, _ = mx.load_problem(open("models/commute.json").read())
verdict, result = mx.classify_shortest_path(commute, "home", frozenset({"work"}))
print(f"\ncommute model: {verdict}")
print(f"  every strategy reaches within k = {result.k} steps with probability "
      f">= eta^k = {result.step_bound}")

train = mx.PureStrategy(mx.memoryless(commute),
                        {(0, "home"): "train", (0, "ride"): "train", (0, "work"): "meeting"})
report = mx.reach_bound_check(commute, train, "home", frozenset({"work"}), 4)
print("\n  l   exact P(reach <= l*k)            lower bound 1-(1-eta^k)^l")
for l, exact, bound in report.rows:
    print(f"  {l}   {str(exact):<28}  {bound}")

# A genuinely partially observable model: one observation for everything.
blind = mx.load_model(open("models/split_reach.json").read())
doc = mx.serialize(blind)
import json
raw = json.loads(doc)
raw["observations"] = ["z"]
raw["obs"] = {s: "z" for s in raw["states"]}
for s in ("s1", "s2", "s3", "s4"):
    raw["transitions"][s] = {a: {s: "1"} for a in ("a", "b", "c")}
blind = mx.load_model(json.dumps(raw))
graph = mx.belief_graph(blind, "s0")
print(f"\nblind five-state model: {len(graph.nodes)} belief supports from s0:")
for node in graph.nodes:
    print("   {" + ", ".join(sorted(node)) + "}")
print("(the c-branch leaves the controller unsure between s3 and s4)")
