"""Shared fixtures: the bundled models and the strategies used throughout."""

import os
from fractions import Fraction

import pytest

import momix as mx

MODELS = os.path.join(os.path.dirname(__file__), os.pardir, "models")


def load(name):
    with open(os.path.join(MODELS, name), "r", encoding="utf-8") as fh:
        return mx.load_problem(fh.read())


@pytest.fixture(scope="session")
def commute():
    return load("commute.json")


@pytest.fixture(scope="session")
def two_discounts():
    return load("two_discounts.json")


@pytest.fixture(scope="session")
def split_reach():
    return load("split_reach.json")


@pytest.fixture(scope="session")
def earn_or_exit():
    return load("earn_or_exit.json")


@pytest.fixture(scope="session")
def coin_exit():
    return load("coin_exit.json")


@pytest.fixture(scope="session")
def delayed_exit():
    return load("delayed_exit.json")


@pytest.fixture(scope="session")
def gated_reward():
    return load("gated_reward.json")


# -- strategy builders ---------------------------------------------------------


def memoryless_table(model, choices):
    """choices: observation -> action, single-action observations filled in."""
    table = {}
    for z in model.observations:
        enabled = model.enabled_for_observation(z)
        if not enabled:
            continue
        table[(0, z)] = choices.get(z, enabled[0])
    return mx.PureStrategy(mx.memoryless(model), table)


def commute_train(model):
    return memoryless_table(model, {"home": "train"})


def commute_bike(model):
    return memoryless_table(model, {"home": "bike"})


def commute_ltb(model, attempts):
    """Try the train `attempts` times, then bike."""
    sk = mx.counter(model, attempts)
    table = {}
    for q in range(attempts + 1):
        table[(q, "home")] = "train" if q < attempts else "bike"
        table[(q, "ride")] = "train"
        table[(q, "work")] = "meeting"
    return mx.PureStrategy(sk, table)


def split_reach_choice(model, action):
    return memoryless_table(model, {"s0": action})


def earn_or_exit_leave(model, rounds):
    """Loop `rounds` times in s with a, then switch to b."""
    sk = mx.counter(model, rounds)
    table = {}
    for q in range(rounds + 1):
        table[(q, "s")] = "a" if q < rounds else "b"
        table[(q, "t")] = "b"
    return mx.PureStrategy(sk, table)


def earn_or_exit_stay(model):
    return memoryless_table(model, {"s": "a", "t": "b"})


def coin_exit_switch(model, rounds):
    """Use a for the first `rounds` rounds, then b forever."""
    sk = mx.counter(model, rounds)
    table = {}
    for q in range(rounds + 1):
        table[(q, "s")] = "a" if q < rounds else "b"
        table[(q, "t")] = "a"
    return mx.PureStrategy(sk, table)


def coin_exit_always(model, action):
    return memoryless_table(model, {"s": action, "t": "a"})


def gated_reward_leave(model, loops):
    """Loop b `loops` times in s, then a to the target."""
    sk = mx.counter(model, loops)
    table = {}
    for q in range(loops + 1):
        table[(q, "s")] = "b" if q < loops else "a"
        table[(q, "t")] = "a"
    return mx.PureStrategy(sk, table)


def grid_randomized(model, skeleton, rng, grid=4):
    """A behavioural strategy whose action weights come from a rational grid."""
    act = {}
    for (mem, z), enabled in mx.strategies.reachable_choice_points(model, skeleton):
        raw = [rng.randrange(grid + 1) for _ in enabled]
        if sum(raw) == 0:
            raw[rng.randrange(len(raw))] = 1
        total = sum(raw)
        act[(mem, z)] = {a: Fraction(r, total) for a, r in zip(enabled, raw) if r}
    return mx.FiniteMemoryStrategy(skeleton, act)


def distinct_vectors(pool):
    out = []
    for _s, v in pool:
        if v not in out:
            out.append(v)
    return out
