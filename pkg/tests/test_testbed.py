"""Classification testbed tests: problems, gradients, training, evaluation."""

import math

import numpy as np
import pytest

from enslab.numkit import RngStream
from enslab.testbed import (
    BootstrapMode,
    ClassifierMember,
    MlpParams,
    TrainConfig,
    draw_weights,
    evaluate_agent,
    forward,
    generate_problem,
    init_mlp,
    load_mlp,
    loss_and_gradient,
    mlp_from_bytes,
    mlp_logits,
    mlp_to_bytes,
    save_mlp,
    softmax,
    train_ensemble,
    truth_model,
)
from enslab.testbed.training import _train_member


def zero_net(widths):
    layers = []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        layers.append((np.zeros((fan_in, fan_out)), np.zeros(fan_out)))
    return MlpParams(tuple(layers))


def quick_config(**overrides):
    base = dict(weight_decay=0.05, prior_scale=1.0, epochs=20, batch_size=16)
    base.update(overrides)
    return TrainConfig(**base)


class TestMlp:
    def test_fixed_two_unit_forward(self):
        # One hidden pair: z = [1.5, -0.5] -> relu [1.5, 0] -> identity out.
        params = MlpParams(
            (
                (np.array([[1.0, -1.0]]), np.array([0.5, 0.5])),
                (np.eye(2), np.zeros(2)),
            )
        )
        probs = softmax(mlp_logits(params, np.array([[1.0]])))
        e = math.exp(1.5)
        np.testing.assert_allclose(probs, [[e / (e + 1), 1 / (e + 1)]], rtol=1e-12)

    def test_softmax_rows_normalized(self):
        gen = np.random.default_rng(0)
        probs = softmax(gen.standard_normal((40, 5)) * 30)
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)
        assert np.all(probs >= 0)

    def test_init_is_fan_in_bounded_and_deterministic(self):
        a = init_mlp((4, 50, 50, 2), RngStream(3))
        b = init_mlp((4, 50, 50, 2), RngStream(3))
        for (wa, ba), (wb, bb) in zip(a.layers, b.layers):
            np.testing.assert_array_equal(wa, wb)
            np.testing.assert_array_equal(ba, bb)
            bound = 1.0 / math.sqrt(wa.shape[0])
            assert np.abs(wa).max() <= bound and np.abs(ba).max() <= bound

    def test_shape_chain_validated(self):
        with pytest.raises(ValueError):
            MlpParams(((np.zeros((2, 3)), np.zeros(3)), (np.zeros((4, 1)), np.zeros(1))))

    def test_checkpoint_roundtrip_is_bit_identical(self, tmp_path):
        params = init_mlp((3, 7, 5, 2), RngStream(4))
        path = tmp_path / "net.bin"
        save_mlp(params, path)
        again = load_mlp(path)
        assert mlp_to_bytes(params) == mlp_to_bytes(again)
        for (wa, ba), (wb, bb) in zip(params.layers, again.layers):
            assert np.array_equal(wa, wb) and np.array_equal(ba, bb)

    def test_checkpoint_layout_is_little_endian_header(self):
        params = zero_net((2, 3))
        blob = mlp_to_bytes(params)
        assert blob[:4] == b"MLP1"
        assert int.from_bytes(blob[4:8], "little") == 1
        assert int.from_bytes(blob[8:12], "little") == 2
        assert int.from_bytes(blob[12:16], "little") == 3
        assert len(blob) == 16 + 8 * (2 * 3 + 3)

    def test_corrupt_checkpoints_rejected(self):
        blob = mlp_to_bytes(zero_net((2, 3)))
        with pytest.raises(ValueError):
            mlp_from_bytes(b"XXXX" + blob[4:])
        with pytest.raises(ValueError):
            mlp_from_bytes(blob + b"\x00" * 8)


class TestGenerateProblem:
    def test_zero_temperature_labels_are_argmax(self):
        p = generate_problem(5, 5000, 1e-6, 0.0, RngStream(1))
        logits = mlp_logits(p.generative, p.dataset.inputs)
        agreement = np.mean(p.labels == logits.argmax(axis=1))
        assert agreement > 0.999

    def test_label_marginal_matches_truth(self):
        p = generate_problem(4, 4000, 0.5, 0.0, RngStream(2))
        probs = truth_model(p)(p.dataset.inputs)
        expected = probs[:, 1].mean()
        se = math.sqrt(np.sum(probs[:, 1] * (1 - probs[:, 1]))) / p.train_size
        assert abs(p.labels.mean() - expected) < 4 * se + 1e-6

    def test_flip_moves_exact_count_one_to_zero(self):
        clean = generate_problem(6, 400, 0.3, 0.0, RngStream(7))
        flipped = generate_problem(6, 400, 0.3, 0.25, RngStream(7))
        before = clean.labels
        after = flipped.labels
        ones = np.flatnonzero(before == 1)
        n_flips = int(round(0.25 * ones.size))
        changed = np.flatnonzero(before != after)
        assert changed.size == n_flips
        assert np.all(before[changed] == 1) and np.all(after[changed] == 0)
        # Unchanged rows keep their labels and inputs.
        np.testing.assert_array_equal(clean.dataset.inputs, flipped.dataset.inputs)

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            generate_problem(0, 10, 0.1, 0.0, RngStream(0))
        with pytest.raises(ValueError):
            generate_problem(2, 10, 0.0, 0.0, RngStream(0))
        with pytest.raises(ValueError):
            generate_problem(2, 10, 0.1, 1.0, RngStream(0))

    def test_truth_model_is_preflip_law(self):
        p = generate_problem(3, 200, 0.2, 0.4, RngStream(8))
        probs = truth_model(p)(p.dataset.inputs)
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)
        # Flipping corrupted the training labels, not the truth: on average
        # the truth still assigns the clean generative frequency to class 1.
        assert probs[:, 1].mean() > p.labels.mean()


class TestForward:
    def test_zero_everything_is_uniform(self):
        net = zero_net((3, 4, 2))
        member = ClassifierMember(net, zero_net((3, 4, 2)), 0.0, np.ones(1))
        probs = forward(member, np.random.default_rng(0).standard_normal((6, 3)))
        np.testing.assert_allclose(probs, 0.5, rtol=1e-12)

    def test_zero_prior_scale_reduces_to_plain_mlp(self):
        rng = RngStream(5)
        trainable = init_mlp((4, 8, 3), rng.substream("t"))
        prior = init_mlp((4, 8, 3), rng.substream("p"))
        member = ClassifierMember(trainable, prior, 0.0, np.ones(1))
        x = np.random.default_rng(1).standard_normal((10, 4))
        np.testing.assert_array_equal(forward(member, x), softmax(mlp_logits(trainable, x)))

    def test_prior_contribution_is_scaled_addition(self):
        rng = RngStream(6)
        trainable = zero_net((2, 5, 2))
        prior = init_mlp((2, 5, 2), rng)
        member = ClassifierMember(trainable, prior, 2.5, np.ones(1))
        x = np.random.default_rng(2).standard_normal((7, 2))
        np.testing.assert_allclose(
            forward(member, x), softmax(2.5 * mlp_logits(prior, x)), rtol=1e-12
        )


class TestLossAndGradient:
    def make_member(self, seed=0, widths=(4, 7, 6, 3), prior_scale=1.3):
        rng = RngStream(seed)
        return ClassifierMember(
            init_mlp(widths, rng.substream("t")),
            init_mlp(widths, rng.substream("p")),
            prior_scale,
            np.ones(1),
        )

    def make_batch(self, seed=1, n=12, d=4, k=3):
        gen = np.random.default_rng(seed)
        x = gen.standard_normal((n, d))
        y = gen.integers(0, k, n)
        w = 2.0 * (gen.random(n) < 0.5)
        return x, y, w

    def test_zero_weights_zero_decay(self):
        member = self.make_member()
        x, y, _ = self.make_batch()
        loss, grads = loss_and_gradient(member, x, y, np.zeros(len(y)), 0.0)
        assert loss == 0.0
        for gw, gb in grads:
            assert np.all(gw == 0.0) and np.all(gb == 0.0)

    def test_matches_central_finite_differences(self):
        member = self.make_member()
        x, y, w = self.make_batch()
        decay = 0.7
        _, grads = loss_and_gradient(member, x, y, w, decay)
        h = 1e-5
        check = np.random.default_rng(3)
        for _ in range(50):
            li = int(check.integers(0, len(member.trainable.layers)))
            use_bias = check.random() < 0.3
            arr = member.trainable.layers[li][1 if use_bias else 0]
            idx = tuple(int(check.integers(0, s)) for s in arr.shape)
            orig = arr[idx]
            arr[idx] = orig + h
            up, _ = loss_and_gradient(member, x, y, w, decay)
            arr[idx] = orig - h
            down, _ = loss_and_gradient(member, x, y, w, decay)
            arr[idx] = orig
            fd = (up - down) / (2 * h)
            an = grads[li][1 if use_bias else 0][idx]
            assert abs(fd - an) / max(abs(fd), abs(an), 1e-4) < 1e-4

    def test_doubling_weights_doubles_data_term(self):
        member = self.make_member()
        x, y, w = self.make_batch()
        w = np.abs(np.random.default_rng(4).standard_normal(len(y))) + 0.1
        base, _ = loss_and_gradient(member, x, y, w, 0.0)
        doubled, _ = loss_and_gradient(member, x, y, 2 * w, 0.0)
        np.testing.assert_allclose(doubled, 2 * base, rtol=1e-12)

    def test_decay_only_gradient_is_two_lambda_theta(self):
        member = self.make_member(prior_scale=0.0)
        x, y, _ = self.make_batch()
        decay = 0.9
        _, grads = loss_and_gradient(member, x, y, np.zeros(len(y)), decay)
        for (wl, bl), (gw, gb) in zip(member.trainable.layers, grads):
            np.testing.assert_allclose(gw, 2 * decay * wl, rtol=1e-12)
            np.testing.assert_allclose(gb, 2 * decay * bl, rtol=1e-12)

    def test_prior_gets_no_gradient_entry(self):
        # Gradients mirror the trainable layers only; changing prior_scale
        # changes the loss but the gradient structure stays trainable-sized.
        member = self.make_member()
        x, y, w = self.make_batch()
        _, grads = loss_and_gradient(member, x, y, w, 0.0)
        assert len(grads) == len(member.trainable.layers)

    def test_empty_batch_rejected(self):
        member = self.make_member()
        with pytest.raises(ValueError):
            loss_and_gradient(member, np.zeros((0, 4)), np.zeros(0, int), np.zeros(0), 0.0)


class TestBootstrapWeights:
    def test_modes_have_unit_mean(self):
        gen = np.random.default_rng(10)
        n = 10_000
        for mode, sd in [
            (BootstrapMode.none(), 0.0),
            (BootstrapMode.bernoulli(0.5), 1.0),
            (BootstrapMode.bernoulli(0.9), math.sqrt(1 / 9)),
            (BootstrapMode.double_or_nothing(), 1.0),
        ]:
            w = draw_weights(mode, n, gen)
            assert np.all(w >= 0)
            assert abs(w.mean() - 1.0) <= 3 * sd / math.sqrt(n) + 1e-12

    def test_double_or_nothing_support(self):
        w = draw_weights(BootstrapMode.double_or_nothing(), 1000, np.random.default_rng(11))
        assert set(np.unique(w)) == {0.0, 2.0}

    def test_bernoulli_support(self):
        w = draw_weights(BootstrapMode.bernoulli(0.25), 1000, np.random.default_rng(12))
        assert set(np.unique(w)) == {0.0, 4.0}

    def test_mode_validation(self):
        with pytest.raises(ValueError):
            BootstrapMode("jackknife")
        with pytest.raises(ValueError):
            BootstrapMode.bernoulli(0.0)
        with pytest.raises(ValueError):
            BootstrapMode("none", p=0.5)


@pytest.fixture(scope="module")
def problem():
    return generate_problem(3, 48, 0.5, 0.0, RngStream(20), hidden=(10, 10))


class TestTrainEnsemble:
    def test_family_posts(self, problem):
        cfg = quick_config(epochs=2)
        n_member = train_ensemble(problem, 1, "N", cfg, RngStream(21))[0]
        assert n_member.prior_scale == 0.0 and np.all(n_member.data_weights == 1.0)
        p_member = train_ensemble(problem, 1, "P", cfg, RngStream(21))[0]
        assert p_member.prior_scale == 1.0 and np.all(p_member.data_weights == 1.0)
        bp_member = train_ensemble(problem, 1, "BP", cfg, RngStream(21))[0]
        assert bp_member.prior_scale == 1.0
        assert set(np.unique(bp_member.data_weights)) <= {0.0, 2.0}
        assert not np.all(bp_member.data_weights == bp_member.data_weights[0])

    def test_same_stream_reproduces_members(self, problem):
        cfg = quick_config(epochs=3)
        a = train_ensemble(problem, 2, "BP", cfg, RngStream(22))
        b = train_ensemble(problem, 2, "BP", cfg, RngStream(22))
        for ma, mb in zip(a, b):
            assert mlp_to_bytes(ma.trainable) == mlp_to_bytes(mb.trainable)
            assert mlp_to_bytes(ma.prior) == mlp_to_bytes(mb.prior)
            np.testing.assert_array_equal(ma.data_weights, mb.data_weights)

    def test_members_differ_from_each_other(self, problem):
        members = train_ensemble(problem, 2, "N", quick_config(epochs=2), RngStream(23))
        assert mlp_to_bytes(members[0].trainable) != mlp_to_bytes(members[1].trainable)

    def test_zero_prior_scale_p_family_equals_n_family(self, problem):
        cfg = quick_config(prior_scale=0.0, epochs=4)
        n_members = train_ensemble(problem, 2, "N", cfg, RngStream(24))
        p_members = train_ensemble(problem, 2, "P", cfg, RngStream(24))
        for mn, mp in zip(n_members, p_members):
            assert mlp_to_bytes(mn.trainable) == mlp_to_bytes(mp.trainable)

    def test_prior_and_weights_survive_training_untouched(self, problem):
        cfg = quick_config(epochs=3)
        member = train_ensemble(problem, 1, "BP", cfg, RngStream(25))[0]
        prior_before = mlp_to_bytes(member.prior)
        trainable_before = mlp_to_bytes(member.trainable)
        weights_before = member.data_weights.copy()
        _train_member(
            member,
            problem.dataset.inputs,
            problem.labels,
            quick_config(epochs=5),
            RngStream(26).generator(),
        )
        assert mlp_to_bytes(member.prior) == prior_before
        assert mlp_to_bytes(member.trainable) != trainable_before
        np.testing.assert_array_equal(member.data_weights, weights_before)

    def test_prior_matches_its_documented_substream(self, problem):
        member = train_ensemble(problem, 1, "P", quick_config(epochs=1), RngStream(27))[0]
        redrawn = init_mlp(problem.generative.widths, RngStream(27).substream("member", 0, "prior"))
        assert mlp_to_bytes(member.prior) == mlp_to_bytes(redrawn)

    def test_bad_family_rejected(self, problem):
        with pytest.raises(ValueError):
            train_ensemble(problem, 1, "Q", quick_config(), RngStream(0))

    def test_training_reduces_loss(self, problem):
        cfg = quick_config(epochs=30, weight_decay=0.01)
        member = train_ensemble(problem, 1, "N", cfg, RngStream(28))[0]
        fresh = ClassifierMember(
            init_mlp(problem.generative.widths, RngStream(28).substream("member", 0, "init")),
            member.prior,
            0.0,
            np.ones(problem.train_size),
        )
        args = (problem.dataset.inputs, problem.labels, np.ones(problem.train_size), 0.0)
        trained_loss, _ = loss_and_gradient(member, *args)
        fresh_loss, _ = loss_and_gradient(fresh, *args)
        assert trained_loss < fresh_loss


class TestTrainConfig:
    def test_schedule_steps(self):
        cfg = quick_config(epochs=200, learning_rate=0.05)
        assert cfg.learning_rate_at(0) == 0.05
        assert cfg.learning_rate_at(99) == 0.05
        assert cfg.learning_rate_at(100) == pytest.approx(0.005)
        assert cfg.learning_rate_at(150) == pytest.approx(5e-4)
        assert cfg.learning_rate_at(175) == pytest.approx(5e-5)

    def test_validation(self):
        with pytest.raises(ValueError):
            TrainConfig(weight_decay=-0.1)
        with pytest.raises(ValueError):
            TrainConfig(weight_decay=0.0, epochs=0)
        with pytest.raises(ValueError):
            TrainConfig(weight_decay=0.0, prior_scale=-1.0)


class TestEvaluateAgent:
    def test_uniform_member_matches_closed_form(self):
        problem = generate_problem(3, 40, 0.4, 0.0, RngStream(30), hidden=(10, 10))
        net = zero_net((3, 2))
        member = ClassifierMember(net, zero_net((3, 2)), 0.0, np.ones(40))
        marginal, joint = evaluate_agent(
            problem, [member], RngStream(31), marginal_queries=4000, anchor_pairs=200
        )
        gen = np.random.default_rng(32)
        x = gen.standard_normal((40_000, 3))
        t = truth_model(problem)(x)
        row_kl = np.sum(t * np.log(np.maximum(t, 1e-300) * 2.0), axis=1)
        ref = row_kl.mean()
        ref_se = row_kl.std() / math.sqrt(len(row_kl))
        assert marginal.value == pytest.approx(ref, abs=3 * (marginal.std_error + ref_se))
        assert marginal.tau == 1 and not marginal.dyadic
        assert joint.tau == 10 and joint.dyadic
        assert joint.value > 0

    def test_empty_members_rejected(self):
        problem = generate_problem(2, 10, 0.4, 0.0, RngStream(33), hidden=(4, 4))
        with pytest.raises(ValueError):
            evaluate_agent(problem, [], RngStream(0))

    def test_deterministic_given_stream(self):
        problem = generate_problem(2, 24, 0.4, 0.0, RngStream(34), hidden=(6, 6))
        members = train_ensemble(problem, 2, "P", quick_config(epochs=3), RngStream(35))
        a = evaluate_agent(problem, members, RngStream(36), marginal_queries=200, anchor_pairs=50)
        b = evaluate_agent(problem, members, RngStream(36), marginal_queries=200, anchor_pairs=50)
        assert a == b
