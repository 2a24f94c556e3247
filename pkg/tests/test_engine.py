import math

import numpy as np
import pytest

from causalkit import (
    Domain,
    EvalError,
    MultipleApplicableError,
    NoApplicableLawError,
    RandomError,
    RandomSpec,
    RngStream,
    StateSchema,
    SystemState,
    TypeDesc,
    VBool,
    VInt,
    VList,
    VReal,
    apply_law,
    build_initial_state,
    classify_determinism,
    deep_equal,
    eval_guard,
    load_model,
    make_initial_state,
    sample_random,
    sample_state,
    select_law,
    step,
)

from conftest import fixture_source


def real_state(model, **values):
    assignments = {k: VReal(float(v)) for k, v in values.items()}
    return make_initial_state(model.schema, assignments)


class TestEvalGuard:
    def test_constant_true(self, load_fixture_model):
        model = load_fixture_model("guard_true.cml")
        s = real_state(model, x=3.0)
        assert eval_guard(model.laws[0], s, model.consts) is True

    def test_boundary(self):
        model = load_model(
            "model m { state { n: int in [0, 200]; } init { n = 0; } "
            "law L { when n < 100; then { n = n + 1; } } }")
        s = make_initial_state(model.schema, {"n": VInt(100)})
        assert eval_guard(model.laws[0], s, model.consts) is False

    def test_index_out_of_range_is_eval_error(self):
        model = load_model(
            "model m { state { xs: list(real, 3); ok: bool; } "
            "init { ok = false; } "
            "law L { when xs[5] > 0.0; then { ok = true; } } }")
        s = make_initial_state(model.schema, {
            "xs": VList([VReal(1.0), VReal(2.0), VReal(3.0)]),
            "ok": VBool(False)})
        with pytest.raises(EvalError) as exc:
            eval_guard(model.laws[0], s, model.consts)
        assert exc.value.law == "L"
        assert "out of range" in str(exc.value)

    def test_guard_purity_no_draws_no_mutation(self, load_fixture_model):
        # evaluating every guard of every fixture model on sampled states
        # consumes no randomness and leaves the state unchanged
        for name in ("overlap.cml", "partition.cml", "guard_true.cml",
                     "escaping.cml"):
            model = load_fixture_model(name)
            rng = RngStream(17)
            for _ in range(250):
                s = sample_state(model.schema, rng)
                before = rng.draw_count
                snapshot = dict(s.values)
                for law in model.laws:
                    eval_guard(law, s, model.consts)
                assert rng.draw_count == before
                assert s.values == snapshot


class TestSelectLaw:
    def test_partition_boundary(self, load_fixture_model):
        model = load_fixture_model("partition.cml")
        s = real_state(model, x=0.0)
        assert select_law(model, s, "strict").name == "Down"

    def test_overlap_strict_raises_with_witness(self, load_fixture_model):
        model = load_fixture_model("overlap.cml")
        s = real_state(model, x=0.0)
        with pytest.raises(MultipleApplicableError) as exc:
            select_law(model, s, "strict")
        assert set(exc.value.law_names) == {"Neg", "Pos"}
        assert exc.value.witness is s

    def test_gap_strict_raises_no_applicable(self):
        model = load_model(
            "model m { state { x: real in [-5.0, 5.0]; } init { x = 2.0; } "
            "law L { when x < 0.0; then { x = x + 1.0; } } }")
        s = real_state(model, x=2.0)
        with pytest.raises(NoApplicableLawError) as exc:
            select_law(model, s, "strict")
        assert exc.value.witness is s

    def test_first_match_picks_declaration_order(self, load_fixture_model):
        model = load_fixture_model("overlap.cml")
        s = real_state(model, x=0.0)
        assert select_law(model, s, "first-match").name == "Neg"


class TestApplyLaw:
    def test_increment(self):
        model = load_model(
            "model m { state { n: int in [0, 100]; } init { n = 7; } "
            "law Inc { when true; then { n = n + 1; } } }")
        s0 = build_initial_state(model)
        s1 = apply_law(model.laws[0], s0, 1.0, RngStream(0), model.consts)
        assert s1.values["n"].value == 8
        assert s1.time == s0.time  # time advance is the interpreter's job
        assert s0.values["n"].value == 7  # s0 untouched

    def test_swap_simultaneous_semantics(self, load_fixture_model):
        model = load_fixture_model("swap.cml")
        rng = RngStream(23)
        for _ in range(1000):
            a, b = rng.uniform(-10, 10), rng.uniform(-10, 10)
            s0 = real_state(model, a=a, b=b)
            s1 = apply_law(model.laws[0], s0, 1.0, rng, model.consts)
            assert s1.values["a"].value == b
            assert s1.values["b"].value == a

    def test_degenerate_weights_always_zero(self):
        model = load_model(
            "model m { state { n: int in {0, 1}; } init { n = 1; } "
            "law L { when true; then { n = random({0, 1}, WEIGHTS(1.0, 0.0)); } } }")
        s0 = build_initial_state(model)
        rng = RngStream(1)
        for _ in range(200):
            s1 = apply_law(model.laws[0], s0, 1.0, rng, model.consts)
            assert s1.values["n"].value == 0

    def test_dt_available_in_transition(self):
        model = load_model(
            "model m { state { x: real in [0.0, 10.0]; } init { x = 0.0; } "
            "law L { when true; then { x = x + dt; } } }")
        s0 = build_initial_state(model)
        s1 = apply_law(model.laws[0], s0, 0.25, RngStream(0), model.consts)
        assert s1.values["x"].value == 0.25

    def test_for_loop_updates_each_element(self, load_fixture_model):
        from causalkit import VRecord
        model = load_fixture_model("drift_particles.cml")

        def particle(m, x, v):
            return VRecord("P", {"m": VReal(m), "x": VReal(x), "v": VReal(v)})

        s0 = make_initial_state(model.schema, {
            "ps": VList([particle(1, 0.0, 1.0), particle(1, 5.0, -2.0),
                         particle(2, 1.0, 0.0)]),
            "count": VInt(0)})
        s1 = apply_law(model.law("Drift"), s0, 0.5, RngStream(0), model.consts)
        xs = [p.fields["x"].value for p in s1.values["ps"].items]
        assert xs == [0.5, 4.0, 1.0]
        assert s1.values["count"].value == 1

    def test_division_by_zero_is_eval_error(self):
        model = load_model(
            "model m { state { x: real in [0.0, 1.0]; } init { x = 0.0; } "
            "law L { when true; then { x = 1.0 / x; } } }")
        s0 = build_initial_state(model)
        with pytest.raises(EvalError) as exc:
            apply_law(model.laws[0], s0, 1.0, RngStream(0), model.consts)
        assert "division by zero" in str(exc.value)
        assert exc.value.law == "L"


class TestStep:
    def test_counter_step(self):
        model = load_model(fixture_source("guard_true.cml"))
        s0 = build_initial_state(model)
        s1 = step(model, s0, 1.0, RngStream(0))
        assert s1.time == 1.0
        assert s1.values["x"].value == 0.5

    def test_strict_mode_propagates_overlap(self, load_fixture_model):
        model = load_fixture_model("overlap.cml")
        s0 = real_state(model, x=0.0)
        with pytest.raises(MultipleApplicableError):
            step(model, s0, 1.0, RngStream(0), "strict")

    def test_repeat_run_same_seed_identical(self, load_fixture_model):
        model = load_fixture_model("psi_draw.cml")
        s0 = build_initial_state(model)
        a = step(model, s0, 1.0, RngStream(42))
        b = step(model, s0, 1.0, RngStream(42))
        assert deep_equal(a, b, tol=0.0)

    def test_seed_determinism_long_sequences(self, load_fixture_model):
        model = load_fixture_model("swap.cml")

        def run_states(seed):
            rng = RngStream(seed)
            s = real_state(model, a=1.0, b=2.0)
            out = []
            for i in range(1000):
                s = step(model, s, 0.5, rng)
                out.append(s)
            return out

        for sa, sb in zip(run_states(5), run_states(5)):
            assert deep_equal(sa, sb, tol=0.0)


class TestSampleRandom:
    def test_flat_interval_mean(self):
        # law of large numbers against the closed-form mean of U[0,1)
        rng = RngStream(101)
        spec = RandomSpec("FLAT", lo=0.0, hi=1.0)
        n = 100_000
        total = sum(sample_random(spec, rng).value for _ in range(n))
        assert abs(total / n - 0.5) < 0.01

    def test_psi_born_weights(self):
        # |0.6|^2 = 0.36 and |0.8i|^2 = 0.64; empirical frequency within
        # 3 sigma of the binomial at 1e5 draws
        rng = RngStream(102)
        spec = RandomSpec("PSI", values=(VInt(0), VInt(1)),
                          params=(0.6, 0.8j))
        n = 100_000
        ones = sum(sample_random(spec, rng).value for _ in range(n))
        sigma = math.sqrt(0.36 * 0.64 * n)
        assert abs(ones - 0.64 * n) < 3 * sigma

    def test_zero_weights_error(self):
        spec = RandomSpec("WEIGHTS", values=(VInt(0), VInt(1)),
                          params=(0.0, 0.0))
        with pytest.raises(RandomError):
            sample_random(spec, RngStream(0))

    def test_empty_interval_error(self):
        with pytest.raises(RandomError):
            sample_random(RandomSpec("FLAT", lo=1.0, hi=1.0), RngStream(0))

    def test_gauss_requires_positive_sigma(self):
        with pytest.raises(RandomError):
            sample_random(RandomSpec("GAUSS", params=(0.0, 0.0)), RngStream(0))

    def test_gauss_unbounded_and_truncated(self):
        rng = RngStream(103)
        unbounded = RandomSpec("GAUSS", params=(0.0, 1.0))
        xs = [sample_random(unbounded, rng).value for _ in range(20_000)]
        assert abs(sum(xs) / len(xs)) < 0.03
        truncated = RandomSpec("GAUSS", lo=0.0, hi=1.0, params=(0.0, 1.0))
        ys = [sample_random(truncated, rng).value for _ in range(2000)]
        assert all(0.0 <= y <= 1.0 for y in ys)

    def test_psi_normalization_invariance(self):
        # scaling all amplitudes by a common complex factor leaves the
        # categorical distribution identical
        base = RandomSpec("PSI", values=(VInt(0), VInt(1), VInt(2)),
                          params=(0.5, 0.5j, -0.70710678118654752))
        factor = 2.3 * np.exp(1j * 0.77)
        scaled = RandomSpec("PSI", values=base.values,
                            params=tuple(factor * a for a in base.params))
        np.testing.assert_allclose(base.probabilities(),
                                   scaled.probabilities(), atol=1e-12)


class TestClassifyDeterminism:
    def test_counter_deterministic(self, load_fixture_model):
        model = load_fixture_model("guard_true.cml")
        assert classify_determinism(model).deterministic

    def test_psi_draw_nondeterministic(self, load_fixture_model):
        model = load_fixture_model("psi_draw.cml")
        verdict = classify_determinism(model)
        assert not verdict.deterministic
        assert verdict.random_laws == ("Draw",)
