import itertools
import json
import random

import numpy as np
import pytest

from elitist_lo_lab.framework import (
    OnePlusOneAdapter,
    RunRecord,
    StateBudgetExceeded,
    UniformSampler,
    make_monotone_transform,
    run_mu_lambda,
    run_one_plus_one,
    verify_ranking_invariance,
)
from elitist_lo_lab.heuristics import OneEa, Rls
from elitist_lo_lab.lo_core import (
    BitString,
    LoInstance,
    identity_instance,
    lo_value,
    random_instance,
)


class CheatStrategy:
    """White-box test strategy: always proposes the optimum."""

    name = "cheat"

    def __init__(self, z: BitString):
        self._z = z

    def fresh_state(self, n, rng):
        return None

    def step(self, incumbent, state, rng):
        return self._z

    def learn(self, outcome, state):
        pass


class PeekingStrategy:
    """Negative control: reads the numeric fitness through the test-only
    runner leak and lets it steer the proposals."""

    name = "peeker"
    peeks_fitness = True

    def __init__(self):
        self._seen = 0

    def peek(self, value):
        self._seen = value

    def fresh_state(self, n, rng):
        return None

    def step(self, incumbent, state, rng):
        return incumbent.flip(self._seen % incumbent.n)

    def learn(self, outcome, state):
        pass


class OverweightStrategy:
    """Declares a 4-bit state budget but packs two bytes."""

    name = "overweight"

    def fresh_state(self, n, rng):
        return {}

    def step(self, incumbent, state, rng):
        return incumbent.flip(0)

    def learn(self, outcome, state):
        pass

    def state_budget_bits(self, n):
        return 4

    def pack_state(self, state):
        return b"\x00\x00"


# -- run_one_plus_one ------------------------------------------------------------


def test_cheat_strategy_needs_two_queries():
    rng = random.Random(0)
    for seed in range(30):
        inst = random_instance(6, rng)
        rec = run_one_plus_one(CheatStrategy(inst.z), inst, seed)
        init = BitString.random(6, random.Random(seed))
        expected = 1 if init == inst.z else 2
        assert rec.total_queries == expected
        assert rec.hit_optimum


def test_rls_n1_at_most_two_queries():
    for seed in range(40):
        inst = random_instance(1, random.Random(seed + 1000))
        rec = run_one_plus_one(Rls(), inst, seed)
        assert rec.hit_optimum and rec.total_queries <= 2


def test_rls_mean_queries_n64():
    # closed-form oracle, independent of the simulator: each of the n levels
    # is visited with probability 1/2 and left after expected n queries
    n = 64
    oracle_mean = 1 + n * n / 2
    totals = []
    for rep in range(200):
        inst = random_instance(n, random.Random(10_000 + rep))
        rec = run_one_plus_one(Rls(), inst, seed=20_000 + rep)
        totals.append(rec.total_queries)
    mean = sum(totals) / len(totals)
    assert 0.40 <= mean / n**2 <= 0.60
    assert abs(mean - oracle_mean) <= 0.08 * oracle_mean


def test_run_record_determinism():
    inst = random_instance(16, random.Random(3))
    a = run_one_plus_one(Rls(), inst, seed=42)
    b = run_one_plus_one(Rls(), inst, seed=42)
    assert a == b


def test_budget_exhaustion():
    inst = random_instance(16, random.Random(4))
    rec = run_one_plus_one(OneEa(), inst, seed=5, budget=10)
    assert rec.budget_exhausted
    assert not rec.hit_optimum
    assert rec.total_queries == 10


def test_zero_budget():
    inst = random_instance(4, random.Random(4))
    rec = run_one_plus_one(Rls(), inst, seed=5, budget=0)
    assert rec.budget_exhausted and rec.total_queries == 0


def test_wrong_length_offspring_rejected():
    class BadStrategy:
        name = "bad"

        def fresh_state(self, n, rng):
            return None

        def step(self, incumbent, state, rng):
            return BitString(incumbent.n + 1)

        def learn(self, outcome, state):
            pass

    inst = random_instance(4, random.Random(1))
    with pytest.raises(ValueError):
        run_one_plus_one(BadStrategy(), inst, seed=0)


def test_per_level_sum_and_init_level():
    inst = random_instance(24, random.Random(9))
    rec = run_one_plus_one(Rls(), inst, seed=77)
    per_level = rec.per_level_dict()
    assert sum(per_level.values()) == rec.total_queries
    assert per_level[-1] == 1


def test_elitism_incumbent_fitness_non_decreasing():
    for seed in range(20):
        inst = random_instance(12, random.Random(seed + 50))
        fitness_curve = []

        def observer(event):
            if event[0] == "step":
                _, inc, off, outcome, accepted = event
                cur = lo_value(inst, off if accepted else inc)
                fitness_curve.append(cur)

        run_one_plus_one(Rls(), inst, seed, observer=observer)
        assert all(a <= b for a, b in zip(fitness_curve, fitness_curve[1:]))


def test_state_budget_enforced():
    inst = random_instance(8, random.Random(2))
    with pytest.raises(StateBudgetExceeded):
        run_one_plus_one(OverweightStrategy(), inst, seed=1, budget=100)


# -- RunRecord JSON ----------------------------------------------------------------


def test_run_record_json_schema_and_round_trip():
    inst = random_instance(10, random.Random(6))
    rec = run_one_plus_one(Rls(), inst, seed=11)
    d = json.loads(rec.to_json())
    assert set(d) == {"algo", "n", "seed", "total_queries", "hit_optimum",
                      "budget_exhausted", "per_level"}
    assert d["algo"] == "rls"
    assert isinstance(d["per_level"], list) and all(len(kv) == 2 for kv in d["per_level"])
    back = RunRecord.from_json_dict(d)
    assert back == RunRecord(rec.algo, rec.n, rec.seed, rec.total_queries,
                             rec.hit_optimum, rec.budget_exhausted, rec.per_level)


# -- run_mu_lambda -----------------------------------------------------------------


def test_one_plus_one_adapter_matches_runner():
    for strategy_cls in (Rls, OneEa):
        for seed in range(10):
            inst = random_instance(12, random.Random(seed + 500))
            direct = run_one_plus_one(strategy_cls(), inst, seed,
                                      record_queries=True)
            adapted = run_mu_lambda(
                OnePlusOneAdapter(strategy_cls(), 12), inst, mu=1, lam=1,
                seed=seed, discard_newest_on_ties=False, record_queries=True,
            )
            assert direct.queries == adapted.queries
            assert direct.total_queries == adapted.total_queries


def test_population_size_invariant_and_rank_consistency():
    calls = []

    class SpySampler(UniformSampler):
        def sample(self, members, ranks, rng, count):
            calls.append((list(members), list(ranks)))
            return super().sample(members, ranks, rng, count)

    inst = random_instance(4, random.Random(8))
    run_mu_lambda(SpySampler(4), inst, mu=3, lam=2, seed=21, budget=500)
    post_init = calls[3:]  # the first mu calls see the growing initial population
    assert post_init
    for members, ranks in post_init:
        assert len(members) == 3
    for members, ranks in calls:
        fitness = [lo_value(inst, p) for p in members]
        for i, j in itertools.combinations(range(len(members)), 2):
            assert (fitness[i] == fitness[j]) == (ranks[i] == ranks[j])
            if fitness[i] > fitness[j]:
                assert ranks[i] < ranks[j]


def _exact_mu2_lambda1_mean(inst: LoInstance) -> float:
    """First-step analysis of the (2+1) uniform-offspring chain on n=2."""
    points = [BitString(2, w) for w in range(4)]
    f = {p.word: lo_value(inst, p) for p in points}
    optimum = inst.z.word
    non_opt = [p for p in points if p.word != optimum]

    # ordered (older, newer) states over non-optimal points
    states = [(a.word, b.word) for a in non_opt for b in non_opt]
    index = {s: i for i, s in enumerate(states)}

    def select(a, b, o):
        pool = [(a, 0), (b, 1), (o, 2)]
        pool.sort(key=lambda t: (-f[t[0]], t[1]))
        kept = sorted(pool[:2], key=lambda t: t[1])
        return (kept[0][0], kept[1][0])

    A = np.zeros((len(states), len(states)))
    rhs = np.ones(len(states))
    for s, (a, b) in enumerate(states):
        A[s, s] = 1.0
        for o in range(4):
            if o == optimum:
                continue
            A[s, index[select(a, b, o)]] -= 0.25
    e = np.linalg.solve(A, rhs)

    # init: two uniform samples, stopping early on the optimum
    total = 0.25 * 1.0
    for x1 in range(4):
        if x1 == optimum:
            continue
        total += 0.25 * 0.25 * 2.0
        for x2 in range(4):
            if x2 == optimum:
                continue
            total += 0.25 * 0.25 * (2.0 + e[index[(x1, x2)]])
    return float(total)


def test_mu2_lambda1_uniform_matches_markov_chain():
    inst = identity_instance(2)
    exact = _exact_mu2_lambda1_mean(inst)
    totals = []
    for seed in range(4000):
        rec = run_mu_lambda(UniformSampler(2), inst, mu=2, lam=1, seed=seed)
        assert rec.hit_optimum
        totals.append(rec.total_queries)
    mean = sum(totals) / len(totals)
    assert abs(mean - exact) < 0.06 * exact


def test_mu_lambda_validates_arguments():
    inst = identity_instance(2)
    with pytest.raises(ValueError):
        run_mu_lambda(UniformSampler(2), inst, mu=0, lam=1, seed=0)


def test_mu_lambda_stops_mid_batch_on_optimum():
    # with lambda > 1 the run ends at the query that samples the optimum,
    # and the counters stay consistent
    for seed in range(30):
        inst = identity_instance(3)
        rec = run_mu_lambda(UniformSampler(3), inst, mu=2, lam=4, seed=seed,
                            record_queries=True)
        assert rec.hit_optimum
        assert rec.queries[-1] == inst.z
        assert inst.z not in rec.queries[:-1]
        assert rec.total_queries == len(rec.queries)
        assert rec.total_queries == sum(c for _, c in rec.per_level)


def test_mu_lambda_budget_counts_charged_queries():
    inst = identity_instance(8)
    rec = run_mu_lambda(UniformSampler(8), inst, mu=3, lam=5, seed=1, budget=7)
    if not rec.hit_optimum:
        assert rec.budget_exhausted
        assert rec.total_queries <= 7


# -- ranking invariance -------------------------------------------------------------


def test_ranking_invariance_identity_transform():
    inst = random_instance(12, random.Random(31))
    assert verify_ranking_invariance(Rls, inst, lambda v: v, seed=5)
    # a strategy instance works as well as a factory
    assert verify_ranking_invariance(Rls(), inst, lambda v: v, seed=5)


def test_ranking_invariance_affine_transform():
    inst = random_instance(16, random.Random(32))
    for seed in range(5):
        assert verify_ranking_invariance(Rls, inst, lambda v: 2 * v + 1, seed=seed)


def test_ranking_invariance_random_transforms_all_strategies():
    from elitist_lo_lab.heuristics import Memlog

    rng = random.Random(33)
    inst = random_instance(16, rng)
    for strategy_cls in (Rls, OneEa, Memlog):
        for trial in range(3):
            transform = make_monotone_transform(16, rng)
            assert verify_ranking_invariance(strategy_cls, inst, transform,
                                             seed=trial)


def test_ranking_invariance_detects_peeking():
    inst = random_instance(16, random.Random(34))
    assert not verify_ranking_invariance(
        PeekingStrategy, inst, lambda v: 3 * v + 2, seed=3, budget=5000
    )


def test_ranking_invariance_rejects_non_monotone():
    inst = random_instance(8, random.Random(35))
    with pytest.raises(ValueError):
        verify_ranking_invariance(Rls, inst, lambda v: 0, seed=1)
