import pytest
from hypothesis import given
from hypothesis import strategies as st

from melo import (
    ConfigError,
    DomainError,
    EngineConfig,
    Interaction,
    ItemState,
    LearnerState,
    ModelState,
    StreamError,
    Variant,
    average_competency,
    concept_weights,
    logistic,
    melo_alpha,
    predict_melo,
    predict_standard,
    replay,
    uncertainty,
    update_melo,
    update_standard,
)
from melo.model import ConceptRating

# Frozen with the arbitrary-precision oracle in oracles.py.
LOGISTIC_04 = 0.598687660112452
LOGISTIC_08 = 0.689974481127612

ELO = EngineConfig(variant=Variant.STANDARD_ELO, k=0.4)
MELO = EngineConfig(variant=Variant.M_ELO, k=0.4)

# Rating differences beyond ~36 saturate the logistic to exactly 1.0 in
# float64, so strict-bound and strict-monotonicity properties are asserted
# over a range where probabilities stay representable inside (0, 1).
ratings = st.floats(min_value=-15, max_value=15)
answers = st.integers(min_value=0, max_value=1)


def melo_learner(lambdas, attempts=0):
    return LearnerState(
        concepts={c: ConceptRating(v, attempts) for c, v in lambdas.items()}
    )


class TestLogistic:
    def test_zero_is_half(self):
        assert logistic(0.0) == 0.5

    def test_complement_identity(self):
        assert abs(logistic(2.0) - (1.0 - logistic(-2.0))) <= 1e-15

    def test_against_high_precision_oracle(self):
        assert logistic(0.4) == pytest.approx(LOGISTIC_04, abs=1e-15)

    @pytest.mark.parametrize("bad", [float("nan"), float("inf"), -float("inf")])
    def test_rejects_non_finite(self, bad):
        with pytest.raises(ValueError):
            logistic(bad)

    @given(st.floats(min_value=-100, max_value=100), st.floats(min_value=1e-6, max_value=10))
    def test_non_decreasing_everywhere(self, x, step):
        assert logistic(x + step) >= logistic(x)

    @given(st.floats(min_value=-14, max_value=14), st.floats(min_value=1e-6, max_value=1))
    def test_strictly_increasing_in_representable_range(self, x, step):
        assert logistic(x + step) > logistic(x)


class TestUncertainty:
    def test_starting_value_is_gamma(self):
        assert uncertainty(0, 1.8, 0.05) == 1.8

    def test_twenty_updates_halve(self):
        assert uncertainty(20, 1.8, 0.05) == 0.9

    def test_beta_zero_degenerates_to_constant(self):
        for n in (0, 1, 17, 100):
            assert uncertainty(n, 0.4, 0.0) == 0.4

    def test_negative_count_rejected(self):
        with pytest.raises(ValueError):
            uncertainty(-1, 1.8, 0.05)

    @given(st.integers(min_value=0, max_value=10_000))
    def test_positive_and_non_increasing(self, n):
        assert uncertainty(n, 1.8, 0.05) > 0
        assert uncertainty(n + 1, 1.8, 0.05) <= uncertainty(n, 1.8, 0.05)


class TestPredictStandard:
    def test_even_match(self):
        assert predict_standard(LearnerState(), ItemState(), ELO) == 0.5

    def test_guess_correction_shifts_floor(self):
        cfg = EngineConfig(variant=Variant.STANDARD_ELO, k=0.4, guess_correction=True)
        item = ItemState(options=4)
        assert predict_standard(LearnerState(), item, cfg) == pytest.approx(0.625)

    def test_against_oracle(self):
        learner = LearnerState(theta=1.2)
        item = ItemState(difficulty=0.4)
        assert predict_standard(learner, item, ELO) == pytest.approx(LOGISTIC_08, abs=1e-15)

    def test_guess_without_option_count_is_config_error(self):
        cfg = EngineConfig(variant=Variant.STANDARD_ELO, k=0.4, guess_correction=True)
        with pytest.raises(ConfigError):
            predict_standard(LearnerState(), ItemState(), cfg)

    def test_wrong_variant_rejected(self):
        with pytest.raises(ConfigError):
            predict_standard(LearnerState(), ItemState(tags=("a",)), MELO)

    @given(ratings, ratings, st.floats(min_value=0.01, max_value=5))
    def test_monotone_in_theta_and_difficulty(self, theta, d, eps):
        item = ItemState(difficulty=d)
        base = predict_standard(LearnerState(theta=theta), item, ELO)
        assert predict_standard(LearnerState(theta=theta + eps), item, ELO) > base
        harder = ItemState(difficulty=d + eps)
        assert predict_standard(LearnerState(theta=theta), harder, ELO) < base

    @given(ratings, ratings, st.integers(min_value=2, max_value=8))
    def test_bounds_with_guess_correction(self, theta, d, c):
        cfg = EngineConfig(variant=Variant.STANDARD_ELO, k=0.4, guess_correction=True)
        p = predict_standard(LearnerState(theta=theta), ItemState(difficulty=d, options=c), cfg)
        assert 1.0 / c < p < 1.0


class TestUpdateStandard:
    def test_correct_answer_even_match(self):
        learner, item = LearnerState(), ItemState()
        delta = update_standard(learner, item, 1, ELO)
        assert learner.theta == pytest.approx(0.2)
        assert item.difficulty == pytest.approx(-0.2)
        assert delta.theta_delta == pytest.approx(0.2)
        assert delta.item_delta == pytest.approx(-0.2)
        assert learner.theta_attempts == 1 and item.attempts == 1

    def test_incorrect_answer_mirrors(self):
        learner, item = LearnerState(), ItemState()
        update_standard(learner, item, 0, ELO)
        assert learner.theta == pytest.approx(-0.2)
        assert item.difficulty == pytest.approx(0.2)

    @given(ratings, ratings, answers, st.floats(min_value=0.01, max_value=2))
    def test_constant_k_zero_sum(self, theta, d, a, k):
        cfg = EngineConfig(variant=Variant.STANDARD_ELO, k=k)
        delta = update_standard(LearnerState(theta=theta), ItemState(difficulty=d), a, cfg)
        assert abs(delta.item_delta + delta.student_delta_sum()) <= 1e-12

    def test_uncertainty_mode_uses_per_parameter_counts(self):
        cfg = EngineConfig(variant=Variant.STANDARD_ELO)
        learner = LearnerState(theta=0.0, theta_attempts=0)
        item = ItemState(difficulty=0.0, attempts=20)
        delta = update_standard(learner, item, 1, cfg)
        # student K on its pre-update count 0 -> 1.8; item K on 20 -> 0.9
        assert delta.theta_delta == pytest.approx(1.8 * 0.5)
        assert delta.item_delta == pytest.approx(0.9 * -0.5)
        assert learner.theta_attempts == 1 and item.attempts == 21

    def test_deltas_match_applied_changes(self):
        learner, item = LearnerState(theta=0.7), ItemState(difficulty=-0.3)
        before = (learner.theta, item.difficulty)
        delta = update_standard(learner, item, 0, ELO)
        assert learner.theta == before[0] + delta.theta_delta
        assert item.difficulty == before[1] + delta.item_delta

    @given(ratings, ratings, answers)
    def test_answer_sign_fixes_delta_sign(self, theta, d, a):
        delta = update_standard(LearnerState(theta=theta), ItemState(difficulty=d), a, ELO)
        if a == 1:
            assert delta.theta_delta > 0    # P < 1, so a correct answer always gains
        else:
            assert delta.theta_delta < 0


class TestAverageCompetency:
    def test_symmetric_pair_cancels(self):
        learner = melo_learner({"A": 0.4, "B": -0.4})
        assert average_competency(learner, ItemState(tags=("A", "B"))) == pytest.approx(0.0)

    def test_single_concept_identity(self):
        learner = melo_learner({"A": 0.7})
        assert average_competency(learner, ItemState(tags=("A",))) == pytest.approx(0.7)

    def test_three_way_mean(self):
        learner = melo_learner({"A": 0.3, "B": 0.6, "C": 0.9})
        assert average_competency(learner, ItemState(tags=("A", "B", "C"))) == pytest.approx(0.6)

    def test_untracked_concepts_at_init(self):
        learner = melo_learner({"A": 1.0})
        assert average_competency(learner, ItemState(tags=("A", "B")), init=0.5) == pytest.approx(0.75)

    def test_zero_tags_is_domain_error(self):
        with pytest.raises(DomainError):
            average_competency(LearnerState(), ItemState())

    def test_weights_are_one_over_g(self):
        assert concept_weights(["A", "B"]) == {"A": 0.5, "B": 0.5}
        with pytest.raises(DomainError):
            concept_weights([])
        with pytest.raises(DomainError):
            concept_weights(["A", "A"])


class TestPredictMelo:
    def test_even_match(self):
        learner = melo_learner({"A": 0.0})
        assert predict_melo(learner, ItemState(tags=("A",)), MELO) == 0.5

    def test_single_concept_equals_per_concept_logistic(self):
        learner = melo_learner({"A": 0.9})
        item = ItemState(difficulty=0.2, tags=("A",))
        assert predict_melo(learner, item, MELO) == logistic(0.9 - 0.2)

    def test_symmetric_lambdas_give_half(self):
        learner = melo_learner({"A": 0.4, "B": -0.4})
        assert predict_melo(learner, ItemState(tags=("A", "B")), MELO) == pytest.approx(0.5)


class TestMeloAlpha:
    def test_single_concept_is_exactly_one(self):
        learner = melo_learner({"A": 1.3})
        assert melo_alpha(learner, ItemState(difficulty=0.4, tags=("A",)), 1, MELO) == 1.0

    def test_derived_two_concept_case(self):
        learner = melo_learner({"A": 0.4, "B": -0.4})
        item = ItemState(tags=("A", "B"))
        assert melo_alpha(learner, item, 1, MELO) == pytest.approx(0.5, abs=1e-12)

    @given(ratings, ratings, st.integers(min_value=1, max_value=6), answers)
    def test_equal_lambdas_give_one_over_g(self, lam, d, g, a):
        tags = tuple(f"c{i}" for i in range(g))
        learner = melo_learner({c: lam for c in tags})
        item = ItemState(difficulty=d, tags=tags)
        assert melo_alpha(learner, item, a, MELO) == pytest.approx(1.0 / g, rel=1e-12)


class TestUpdateMelo:
    def test_derived_two_concept_case(self):
        learner = melo_learner({"A": 0.4, "B": -0.4})
        item = ItemState(tags=("A", "B"))
        delta = update_melo(learner, item, 1, MELO)
        assert delta.item_delta == pytest.approx(-0.2, abs=1e-12)
        assert delta.concept_deltas["A"] == pytest.approx(0.0802624679775096, abs=1e-12)
        assert delta.concept_deltas["B"] == pytest.approx(0.1197375320224904, abs=1e-12)
        assert abs(delta.item_delta + delta.student_delta_sum()) <= 1e-12
        assert item.attempts == 1
        assert learner.concepts["A"].attempts == 1
        assert learner.concepts["B"].attempts == 1

    def test_incorrect_mirror_swaps_magnitudes(self):
        learner = melo_learner({"A": 0.4, "B": -0.4})
        item = ItemState(tags=("A", "B"))
        delta = update_melo(learner, item, 0, MELO)
        assert delta.item_delta == pytest.approx(0.2, abs=1e-12)
        assert delta.concept_deltas["A"] == pytest.approx(-0.1197375320224904, abs=1e-12)
        assert delta.concept_deltas["B"] == pytest.approx(-0.0802624679775096, abs=1e-12)

    def test_single_concept_item_collapses_to_standard_elo(self):
        melo_side = melo_learner({"A": 0.6})
        elo_side = LearnerState(theta=0.6)
        item_m = ItemState(difficulty=-0.2, tags=("A",))
        item_e = ItemState(difficulty=-0.2)
        dm = update_melo(melo_side, item_m, 1, MELO)
        de = update_standard(elo_side, item_e, 1, ELO)
        assert dm.concept_deltas["A"] == de.theta_delta
        assert dm.item_delta == de.item_delta
        assert melo_side.concepts["A"].rating == elo_side.theta

    @given(
        st.dictionaries(st.sampled_from("ABCDE"), ratings, min_size=1, max_size=5),
        ratings,
        answers,
        st.floats(min_value=0.01, max_value=2),
    )
    def test_constant_k_zero_sum(self, lambdas, d, a, k):
        cfg = EngineConfig(variant=Variant.M_ELO, k=k)
        learner = melo_learner(lambdas)
        item = ItemState(difficulty=d, tags=tuple(lambdas))
        delta = update_melo(learner, item, a, cfg)
        assert abs(delta.item_delta + delta.student_delta_sum()) <= 1e-12

    @given(
        st.dictionaries(st.sampled_from("ABCDE"), ratings, min_size=1, max_size=5),
        ratings,
        answers,
        st.integers(min_value=0, max_value=200),
    )
    def test_uncertainty_zero_sum_when_counters_match(self, lambdas, d, a, n):
        cfg = EngineConfig(variant=Variant.M_ELO)
        learner = melo_learner(lambdas, attempts=n)
        item = ItemState(difficulty=d, attempts=n, tags=tuple(lambdas))
        delta = update_melo(learner, item, a, cfg)
        assert abs(delta.item_delta + delta.student_delta_sum()) <= 1e-12

    def test_untouched_concepts_unchanged(self):
        learner = melo_learner({"A": 0.1, "B": 0.2, "C": 0.3})
        item = ItemState(tags=("A",))
        update_melo(learner, item, 1, MELO)
        assert learner.concepts["B"].rating == 0.2
        assert learner.concepts["C"].rating == 0.3
        assert learner.concepts["B"].attempts == 0

    @given(
        st.dictionaries(st.sampled_from("ABCDE"), ratings, min_size=1, max_size=5),
        ratings,
        answers,
    )
    def test_answer_sign_fixes_delta_signs(self, lambdas, d, a):
        learner = melo_learner(lambdas)
        item = ItemState(difficulty=d, tags=tuple(lambdas))
        delta = update_melo(learner, item, a, MELO)
        for v in delta.concept_deltas.values():
            if a == 1:
                assert v >= 0
            else:
                assert v <= 0


class TestReplay:
    def test_empty_stream_leaves_state_unchanged(self):
        initial = ModelState(items={"q1": ItemState(difficulty=0.4, tags=("A",))})
        final, steps = replay([], MELO, initial)
        assert steps == []
        assert final.items["q1"].difficulty == 0.4

    def test_single_interaction_equals_one_update(self):
        stream = [Interaction("s1", "q1", 1, seq=1)]
        initial = ModelState(items={"q1": ItemState(tags=("A",))})
        final, steps = replay(stream, MELO, initial)

        learner, item = LearnerState(), ItemState(tags=("A",))
        expected = update_melo(learner, item, 1, MELO)
        assert steps[0].prediction == expected.probability_used
        assert steps[0].delta.concept_deltas == expected.concept_deltas
        assert final.learners["s1"].concepts["A"].rating == learner.concepts["A"].rating

    def test_initial_state_not_mutated(self):
        initial = ModelState(items={"q1": ItemState(tags=("A",))})
        replay([Interaction("s1", "q1", 1, seq=1)], MELO, initial)
        assert initial.items["q1"].attempts == 0
        assert "s1" not in initial.learners

    def test_deterministic(self):
        stream = [
            Interaction("s1", "q1", i % 2, seq=i + 1) for i in range(50)
        ]
        initial = ModelState(items={"q1": ItemState(tags=("A", "B"))})
        a, _ = replay(stream, MELO, initial)
        b, _ = replay(stream, MELO, initial)
        assert a.learners["s1"].concepts["A"].rating == b.learners["s1"].concepts["A"].rating
        assert a.items["q1"].difficulty == b.items["q1"].difficulty

    def test_order_sensitivity(self):
        # Same multiset of interactions, different order, different final state.
        from melo.synth import CohortSpec, simulate

        truth, stream = simulate(CohortSpec(
            n_students=5, n_items=20, n_answers=100, n_concepts=4, sigma=1.0, seed=7
        ))
        cfg = EngineConfig(variant=Variant.STANDARD_ELO)
        sorted_final, _ = replay(stream, cfg)
        permuted = list(reversed(stream))
        permuted = [
            Interaction(r.student, r.item, r.correct, seq=i + 1)
            for i, r in enumerate(permuted)
        ]
        permuted_final, _ = replay(permuted, cfg)
        thetas_sorted = {s: st.theta for s, st in sorted_final.learners.items()}
        thetas_permuted = {s: st.theta for s, st in permuted_final.learners.items()}
        assert thetas_sorted != thetas_permuted

    def test_non_increasing_seq_rejected_with_position(self):
        stream = [
            Interaction("s1", "q1", 1, seq=1),
            Interaction("s1", "q1", 1, seq=1),
        ]
        with pytest.raises(StreamError) as err:
            replay(stream, ELO)
        assert err.value.position == 1

    def test_unknown_ids_auto_register_at_init(self):
        cfg = EngineConfig(variant=Variant.STANDARD_ELO, k=0.4, init_rating=0.3)
        final, steps = replay([Interaction("new", "fresh", 1, seq=1)], cfg)
        # prediction used theta = d = 0.3 -> even match
        assert steps[0].prediction == 0.5

    def test_melo_untagged_auto_registered_item_is_stream_error(self):
        with pytest.raises(StreamError):
            replay([Interaction("s1", "unseen", 1, seq=1)], MELO)


class TestEngineConfig:
    def test_defaults_are_uncertainty_mode(self):
        cfg = EngineConfig()
        assert cfg.k is None
        assert cfg.gamma == 1.8 and cfg.beta == 0.05
        assert cfg.init_rating == 0.0
        assert cfg.sensitivity(0) == 1.8

    def test_constant_mode_ignores_counts(self):
        cfg = EngineConfig(k=0.4)
        assert cfg.sensitivity(0) == cfg.sensitivity(1000) == 0.4

    def test_invalid_values_rejected(self):
        with pytest.raises(ConfigError):
            EngineConfig(k=0.0)
        with pytest.raises(ConfigError):
            EngineConfig(gamma=-1.0)
        with pytest.raises(ConfigError):
            EngineConfig(beta=-0.1)

    def test_round_trips_through_dict(self):
        cfg = EngineConfig(variant=Variant.STANDARD_ELO, k=0.4, guess_correction=True)
        assert EngineConfig.from_dict(cfg.to_dict()) == cfg
        with pytest.raises(ConfigError):
            EngineConfig.from_dict({"variant": "bogus"})
        with pytest.raises(ConfigError):
            EngineConfig.from_dict({"nope": 1})
