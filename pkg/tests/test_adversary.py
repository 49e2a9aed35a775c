from __future__ import annotations

import numpy as np
import pytest

from biosketch.adversary import (
    Attack,
    CompromiseSet,
    attack_coset_sampling,
    attack_linked_rank_dependent,
    attack_substitute_enrollment,
    attack_uninformed,
    attack_with_biometric_and_key,
    attack_with_stored,
    best_attack,
    expose,
)
from biosketch.biomodel import sample_enrollments, sample_probe, sample_world
from biosketch.codes import build_coset_table, make_code_from_H, random_code
from biosketch.gf2 import BitVec, mat_vec_mul
from biosketch.multisys import linkage_preset
from biosketch.schemes import Scheme, SystemParams, authenticate, enroll

FC = Scheme.FUZZY_COMMITMENT
SS = Scheme.SECURE_SKETCH


def wilson(hits: int, trials: int) -> tuple[float, float]:
    z = 1.959963984540054
    p = hits / trials
    denom = 1 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * np.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return center - half, center + half


def overlap(a: tuple[float, float], b: tuple[float, float]) -> bool:
    return a[0] <= b[1] and b[0] <= a[1]


def run_multi(codes, scheme, keyed, tau, enroll_noise, probe_noise, compromise,
              target, make_attack, trials, seed):
    """Per-trial scenario loop through the real enroll/expose/authenticate path."""
    params = [SystemParams(scheme=scheme, keyed=keyed, tau=tau, code=c) for c in codes]
    tables = {id(params[target - 1].code): build_coset_table(params[target - 1].code)}
    table_j = tables[id(params[target - 1].code)]
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(trials):
        world = sample_world(codes[0].n, enroll_noise, probe_noise, rng)
        enr = sample_enrollments(world, rng)
        records = [enroll(p, a, rng) for p, a in zip(params, enr)]
        view = expose(records, world.A0, enr, compromise)
        atk = make_attack(view, rng)
        if authenticate(records[target - 1], atk.C, atk.J, table_j).accepted:
            hits += 1
    return hits


def run_single(code, scheme, keyed, tau, p1, alpha, make_attack, trials, seed):
    comp = CompromiseSet(1, frozenset({1}), frozenset({1}), frozenset({0, 1}))
    return run_multi([code], scheme, keyed, tau, [p1], [alpha], comp, 1,
                     make_attack, trials, seed)


@pytest.fixture(scope="module")
def code_10_5():
    return random_code(10, 5, np.random.default_rng(110))


@pytest.fixture(scope="module")
def far_reference(code_10_5):
    """Empirical FAR of the [10,5] system at tau=0.1, shared across tests."""
    hits = run_single(code_10_5, SS, True, 0.1, 0.1, 0.1,
                      lambda view, rng: attack_uninformed(view.params[0], rng),
                      trials=20_000, seed=111)
    return wilson(hits, 20_000)


class TestUninformed:
    def test_distribution_free_rates(self, code_10_5, far_reference):
        # uniform J, zero J, and zero C all land at the same accept rate
        n, klen = 10, 5
        variants = {
            "zero_J": lambda view, rng: Attack(
                attack_uninformed(view.params[0], rng).C, BitVec.zeros(klen)),
            "zero_C": lambda view, rng: Attack(
                BitVec.zeros(n), attack_uninformed(view.params[0], rng).J),
        }
        for name, fn in variants.items():
            hits = run_single(code_10_5, SS, True, 0.1, 0.1, 0.1, fn,
                              trials=20_000, seed=hash(name) % 2 ** 32)
            assert overlap(wilson(hits, 20_000), far_reference), name


class TestStored:
    @pytest.mark.parametrize("scheme,keyed", [(FC, True), (FC, False), (SS, True), (SS, False)])
    def test_always_accepts(self, code_10_5, scheme, keyed):
        hits = run_single(
            code_10_5, scheme, keyed, 0.1, 0.1, 0.1,
            lambda view, rng: attack_with_stored(view.params[0], view.S[1]),
            trials=400, seed=112)
        assert hits == 400

    def test_forces_weight_zero(self, code_10_5):
        rng = np.random.default_rng(113)
        table = build_coset_table(code_10_5)
        for scheme in (FC, SS):
            for keyed in (True, False):
                p = SystemParams(scheme=scheme, keyed=keyed, tau=0.1, code=code_10_5)
                rec = enroll(p, BitVec.from01("1100101001"), rng)
                atk = attack_with_stored(p, rec.S)
                decision = authenticate(rec, atk.C, atk.J, table)
                assert decision.accepted and decision.weight == 0


class TestBiometricAndKey:
    @pytest.mark.parametrize("scheme,keyed", [(FC, True), (SS, True), (FC, False), (SS, False)])
    def test_full_exposure_accepts(self, code_10_5, scheme, keyed):
        hits = run_single(
            code_10_5, scheme, keyed, 0.1, 0.1, 0.1,
            lambda view, rng: attack_with_biometric_and_key(
                view.params[0], rng, A=view.bio[1], K=view.K[1]),
            trials=400, seed=114)
        assert hits == 400

    def test_single_factor_key_only_is_far(self, code_10_5, far_reference):
        hits = run_single(
            code_10_5, SS, True, 0.1, 0.1, 0.1,
            lambda view, rng: attack_with_biometric_and_key(
                view.params[0], rng, K=view.K[1]),
            trials=20_000, seed=115)
        assert overlap(wilson(hits, 20_000), far_reference)

    def test_single_factor_bio_only_is_far(self, code_10_5, far_reference):
        hits = run_single(
            code_10_5, SS, True, 0.1, 0.1, 0.1,
            lambda view, rng: attack_with_biometric_and_key(
                view.params[0], rng, A=view.bio[1]),
            trials=20_000, seed=116)
        assert overlap(wilson(hits, 20_000), far_reference)

    def test_requires_some_factor(self, code_10_5):
        p = SystemParams(scheme=SS, keyed=True, tau=0.1, code=code_10_5)
        with pytest.raises(ValueError):
            attack_with_biometric_and_key(p, np.random.default_rng(0))


class TestSubstitute:
    def test_ground_truth_beats_legitimate_frr(self):
        code = random_code(16, 8, np.random.default_rng(117))
        tau, p_j, alpha_j = 0.2, 0.08, 0.08
        trials = 8_000
        comp = CompromiseSet(1, frozenset(), frozenset({1}), frozenset({0}))
        sar_hits = run_multi([code], SS, True, tau, [p_j], [alpha_j], comp, 1,
                             lambda view, rng: attack_substitute_enrollment(
                                 view.params[0], view.bio[0], view.K[1]),
                             trials, seed=118)
        # legitimate-user accept rate on the same system
        params = SystemParams(scheme=SS, keyed=True, tau=tau, code=code)
        table = build_coset_table(code)
        rng = np.random.default_rng(119)
        legit_hits = 0
        for _ in range(trials):
            world = sample_world(16, [p_j], [alpha_j], rng)
            (a,) = sample_enrollments(world, rng)
            rec = enroll(params, a, rng)
            b = sample_probe(world, 1, rng)
            legit_hits += authenticate(rec, b, rec.K, table).accepted
        assert sar_hits / trials >= legit_hits / trials - 0.02

    def test_noiseless_donor_accepts_exactly(self):
        code = random_code(12, 6, np.random.default_rng(120))
        comp = CompromiseSet(2, frozenset(), frozenset({2}), frozenset({1}))
        hits = run_multi([code, code], SS, True, 0.1, [0.0, 0.0], [0.05, 0.05],
                         comp, 2,
                         lambda view, rng: attack_substitute_enrollment(
                             view.params[1], view.bio[1], view.K[2]),
                         trials=300, seed=121)
        assert hits == 300  # A_1 = A_2 exactly under noiseless enrollment

    def test_without_target_key_drops_to_far(self, code_10_5, far_reference):
        comp = CompromiseSet(1, frozenset(), frozenset(), frozenset({0}))
        hits = run_multi([code_10_5], SS, True, 0.1, [0.1], [0.1], comp, 1,
                         lambda view, rng: attack_substitute_enrollment(
                             view.params[0], view.bio[0], None, rng),
                         trials=20_000, seed=122)
        assert overlap(wilson(hits, 20_000), far_reference)


def example_compromise() -> CompromiseSet:
    # stored data and keys of systems 1 and 2, plus the key of target 3
    return CompromiseSet(3, frozenset({1, 2}), frozenset({1, 2, 3}), frozenset())


class TestRankLinked:
    def test_example1_noiseless_probability_one(self):
        mats = linkage_preset("example1", 4, 12, np.random.default_rng(123))
        codes = [make_code_from_H(H) for H in mats]
        hits = run_multi(codes, SS, True, 0.1, [0.0] * 3, [0.05] * 3,
                         example_compromise(), 3,
                         lambda view, rng: attack_linked_rank_dependent(view, 3),
                         trials=500, seed=124)
        assert hits == 500

    def test_example2_identical_noiseless(self):
        mats = linkage_preset("example2", 4, 12, np.random.default_rng(125))
        codes = [make_code_from_H(H) for H in mats]
        comp = CompromiseSet(3, frozenset({1}), frozenset({1, 3}), frozenset())
        hits = run_multi(codes, SS, True, 0.1, [0.0] * 3, [0.05] * 3, comp, 3,
                         lambda view, rng: attack_linked_rank_dependent(view, 3),
                         trials=300, seed=126)
        assert hits == 300

    def test_fc_scheme_works_too(self):
        mats = linkage_preset("example1", 4, 12, np.random.default_rng(127))
        codes = [make_code_from_H(H) for H in mats]
        hits = run_multi(codes, FC, True, 0.1, [0.0] * 3, [0.05] * 3,
                         example_compromise(), 3,
                         lambda view, rng: attack_linked_rank_dependent(view, 3),
                         trials=300, seed=128)
        assert hits == 300

    def test_noisy_enrollments_beat_frr(self):
        mats = linkage_preset("example2", 5, 15, np.random.default_rng(129))
        codes = [make_code_from_H(H) for H in mats]
        tau, p, alpha = 0.2, 0.05, 0.05
        trials = 6_000
        hits = run_multi(codes, SS, True, tau, [p] * 3, [alpha] * 3,
                         example_compromise(), 3,
                         lambda view, rng: attack_linked_rank_dependent(view, 3),
                         trials=trials, seed=130)
        params = SystemParams(scheme=SS, keyed=True, tau=tau, code=codes[2])
        table = build_coset_table(codes[2])
        rng = np.random.default_rng(131)
        legit = 0
        for _ in range(trials):
            world = sample_world(15, [p] * 3, [alpha] * 3, rng)
            enr = sample_enrollments(world, rng)
            rec = enroll(params, enr[2], rng)
            b = sample_probe(world, 3, rng)
            legit += authenticate(rec, b, rec.K, table).accepted
        assert hits / trials >= legit / trials - 0.02

    def test_independent_target_rejected(self):
        mats = linkage_preset("example3", 4, 12, np.random.default_rng(132))
        codes = [make_code_from_H(H) for H in mats]
        params = [SystemParams(scheme=SS, keyed=True, tau=0.1, code=c) for c in codes]
        rng = np.random.default_rng(133)
        world = sample_world(12, [0.0] * 3, [0.05] * 3, rng)
        enr = sample_enrollments(world, rng)
        records = [enroll(p, a, rng) for p, a in zip(params, enr)]
        view = expose(records, world.A0, enr, example_compromise())
        with pytest.raises(ValueError, match="not rank-dependent"):
            attack_linked_rank_dependent(view, 3)

    def test_requires_target_key(self):
        mats = linkage_preset("example1", 4, 12, np.random.default_rng(134))
        codes = [make_code_from_H(H) for H in mats]
        params = [SystemParams(scheme=SS, keyed=True, tau=0.1, code=c) for c in codes]
        rng = np.random.default_rng(135)
        world = sample_world(12, [0.0] * 3, [0.05] * 3, rng)
        enr = sample_enrollments(world, rng)
        records = [enroll(p, a, rng) for p, a in zip(params, enr)]
        comp = CompromiseSet(3, frozenset({1, 2}), frozenset({1, 2}), frozenset())
        view = expose(records, world.A0, enr, comp)
        with pytest.raises(ValueError, match="K_3 not exposed"):
            attack_linked_rank_dependent(view, 3)


class TestCosetSampling:
    def test_residual_zero_degenerates_to_certain_success(self):
        mats = linkage_preset("example1", 4, 12, np.random.default_rng(136))
        codes = [make_code_from_H(H) for H in mats]
        hits = run_multi(codes, SS, True, 0.1, [0.0] * 3, [0.05] * 3,
                         example_compromise(), 3,
                         lambda view, rng: attack_coset_sampling(view, 3, rng),
                         trials=300, seed=137)
        assert hits == 300

    def test_full_residual_is_far_level(self, far_reference):
        # independent matrices: compromised data is useless
        mats = linkage_preset("example3", 5, 15, np.random.default_rng(138))
        codes = [make_code_from_H(H) for H in mats]
        # match the [10,5]-style FAR geometry? no: compute FAR for this code directly
        comp = example_compromise()
        trials = 20_000
        hits = run_multi(codes, SS, True, 0.1, [0.0] * 3, [0.05] * 3, comp, 3,
                         lambda view, rng: attack_coset_sampling(view, 3, rng),
                         trials=trials, seed=139)
        far_hits = run_multi(codes, SS, True, 0.1, [0.0] * 3, [0.05] * 3,
                             CompromiseSet(3), 3,
                             lambda view, rng: attack_uninformed(view.params[2], rng),
                             trials=trials, seed=140)
        assert overlap(wilson(hits, trials), wilson(far_hits, trials))

    def test_example4_success_floor(self):
        m = 8
        mats = linkage_preset("example4", m, 3 * m, np.random.default_rng(141))
        codes = [make_code_from_H(H) for H in mats]
        trials = 20_000
        hits = run_multi(codes, SS, True, 0.05, [0.0] * 3, [0.02] * 3,
                         example_compromise(), 3,
                         lambda view, rng: attack_coset_sampling(view, 3, rng),
                         trials=trials, seed=142)
        lo, _ = wilson(hits, trials)
        assert lo >= 2.0 ** -(m // 2) - 0.01

    def test_no_full_compromise_falls_back_to_uniform(self, code_10_5, far_reference):
        comp = CompromiseSet(1, frozenset(), frozenset({1}), frozenset())
        hits = run_multi([code_10_5], SS, True, 0.1, [0.1], [0.1], comp, 1,
                         lambda view, rng: attack_coset_sampling(view, 1, rng),
                         trials=20_000, seed=143)
        assert overlap(wilson(hits, 20_000), far_reference)


class TestExpose:
    def test_values_and_keyless_convention(self, code_10_5):
        rng = np.random.default_rng(144)
        params = SystemParams(scheme=SS, keyed=False, tau=0.1, code=code_10_5)
        world = sample_world(10, [0.0], [0.1], rng)
        enr = sample_enrollments(world, rng)
        records = [enroll(params, enr[0], rng)]
        comp = CompromiseSet(1, frozenset({1}), frozenset(), frozenset({0}))
        view = expose(records, world.A0, enr, comp)
        assert view.compromise.fully_compromised(1)  # keyless: zero key is public
        assert view.S[1] == records[0].S
        assert view.K[1] == BitVec.zeros(5)
        assert view.bio[0] == world.A0
        assert view.known_syndrome(1) == mat_vec_mul(code_10_5.H, enr[0])

    def test_known_syndrome_fc(self, code_10_5):
        rng = np.random.default_rng(145)
        params = SystemParams(scheme=FC, keyed=True, tau=0.1, code=code_10_5)
        world = sample_world(10, [0.0], [0.1], rng)
        enr = sample_enrollments(world, rng)
        records = [enroll(params, enr[0], rng)]
        comp = CompromiseSet(1, frozenset({1}), frozenset({1}), frozenset())
        view = expose(records, world.A0, enr, comp)
        assert view.known_syndrome(1) == mat_vec_mul(code_10_5.H, enr[0])


class TestBestAttackMonotonicity:
    def test_enlarging_compromise_never_hurts(self):
        mats = linkage_preset("example4", 4, 12, np.random.default_rng(146))
        codes = [make_code_from_H(H) for H in mats]
        chain = [
            CompromiseSet(3),
            CompromiseSet(3, frozenset(), frozenset({3}), frozenset()),
            CompromiseSet(3, frozenset({1}), frozenset({1, 3}), frozenset()),
            CompromiseSet(3, frozenset({1, 2}), frozenset({1, 2, 3}), frozenset()),
            CompromiseSet(3, frozenset({1, 2, 3}), frozenset({1, 2, 3}), frozenset()),
        ]
        trials = 4_000
        rates = []
        for idx, comp in enumerate(chain):
            hits = run_multi(codes, SS, True, 0.1, [0.0] * 3, [0.05] * 3, comp, 3,
                             lambda view, rng: best_attack(view, 3, rng)[1],
                             trials=trials, seed=147)
            rates.append(hits / trials)
        for a, b in zip(rates, rates[1:]):
            assert b >= a - 0.025
        assert rates[-1] == 1.0  # stored data of the target itself

    def test_best_attack_tags(self):
        mats = linkage_preset("example1", 4, 12, np.random.default_rng(148))
        codes = [make_code_from_H(H) for H in mats]
        params = [SystemParams(scheme=SS, keyed=True, tau=0.1, code=c) for c in codes]
        rng = np.random.default_rng(149)
        world = sample_world(12, [0.0] * 3, [0.05] * 3, rng)
        enr = sample_enrollments(world, rng)
        records = [enroll(p, a, rng) for p, a in zip(params, enr)]
        cases = [
            (CompromiseSet(3), "uninformed"),
            (CompromiseSet(3, frozenset({3}), frozenset(), frozenset()), "stored"),
            (CompromiseSet(3, frozenset(), frozenset({3}), frozenset({3})), "biometric+key"),
            (example_compromise(), "rank-linked"),
            (CompromiseSet(3, frozenset(), frozenset({3}), frozenset({0})), "substitute"),
            # H3 is outside span(H1) alone, so only coset sampling applies
            (CompromiseSet(3, frozenset({1}), frozenset({1, 3}), frozenset()), "coset-sampling"),
        ]
        for comp, expected in cases:
            view = expose(records, world.A0, enr, comp)
            tag, _ = best_attack(view, 3, rng)
            assert tag == expected, (comp, tag)


def test_compromise_set_validation():
    with pytest.raises(ValueError):
        CompromiseSet(0)
    with pytest.raises(ValueError):
        CompromiseSet(2, exposed_S=frozenset({3}))
    with pytest.raises(ValueError):
        CompromiseSet(2, exposed_bio=frozenset({5}))
    a = CompromiseSet(2, frozenset({1}), frozenset(), frozenset())
    b = CompromiseSet(2, frozenset(), frozenset({2}), frozenset({0}))
    u = a.union(b)
    assert u.exposed_S == {1} and u.exposed_K == {2} and u.exposed_bio == {0}
