import numpy as np
import pytest

from chaosforge import ann
from chaosforge.errors import NonFiniteError
from chaosforge.oscillator import (
    OscillatorState,
    extract_bits,
    generate,
    step,
)

def constant_model(value=0.25):
    """Zero weights, output biases = value: the loop sits at a fixed point."""
    model = ann.init_model((3, 4, 3), "relu", 0)
    model.w1[:] = 0
    model.w2[:] = 0
    model.b1[:] = 0
    model.b2[:] = np.float32(value)
    return model


class TestStep:
    def test_constant_model_fixed_point(self):
        model = constant_model(0.25)
        state = OscillatorState(model=model,
                                seed=np.full(3, 0.25, dtype=np.float32))
        for _ in range(5):
            out = step(state)
            assert np.array_equal(out, np.full(3, 0.25, dtype=np.float32))

    def test_two_steps_equal_forward_composition(self, trained_model):
        seed = np.array([0.4, 0.5, 0.6], dtype=np.float32)
        state = OscillatorState(model=trained_model, seed=seed)
        first = step(state)
        second = step(state)
        assert np.array_equal(first, ann.forward(trained_model, seed))
        assert np.array_equal(second, ann.forward(trained_model, first))

    def test_seed_consumed_only_on_first_iteration(self, trained_model):
        seed = np.array([0.4, 0.5, 0.6], dtype=np.float32)
        state = OscillatorState(model=trained_model, seed=seed)
        outputs = [step(state) for _ in range(4)]
        # k-fold composition of forward on the seed, bit for bit
        expected = seed
        for out in outputs:
            expected = ann.forward(trained_model, expected)
            assert np.array_equal(out, expected)

    def test_rejects_non_square_model(self):
        model = ann.init_model((3, 4, 2), "relu", 0)
        with pytest.raises(ValueError):
            OscillatorState(model=model, seed=np.zeros(3, dtype=np.float32))

    def test_divergent_model_raises_with_index(self):
        model = ann.init_model((2, 2, 2), "relu", 0)
        model.w1[:] = np.float32(4.0)
        model.b1[:] = 0
        model.w2[:] = np.float32(4.0)
        model.b2[:] = np.float32(1.0)
        state = OscillatorState(model=model,
                                seed=np.ones(2, dtype=np.float32))
        with pytest.raises(NonFiniteError) as err:
            for _ in range(50):
                step(state)
        assert err.value.index is not None


class TestGenerate:
    def test_one_iteration_equals_one_step(self, trained_model):
        seed = np.array([0.3, 0.4, 0.5], dtype=np.float32)
        out = generate(OscillatorState(model=trained_model, seed=seed), 1)
        state = OscillatorState(model=trained_model, seed=seed)
        assert np.array_equal(out[0], step(state))

    def test_matches_stepwise_loop(self, trained_model):
        seed = np.array([0.3, 0.4, 0.5], dtype=np.float32)
        out = generate(OscillatorState(model=trained_model, seed=seed), 64)
        state = OscillatorState(model=trained_model, seed=seed)
        for k in range(64):
            assert np.array_equal(out[k], step(state))

    def test_identical_seeds_identical_matrices(self, trained_model):
        seed = np.array([0.2, 0.7, 0.4], dtype=np.float32)
        a = generate(OscillatorState(model=trained_model, seed=seed), 2000)
        b = generate(OscillatorState(model=trained_model, seed=seed), 2000)
        assert a.tobytes() == b.tobytes()

    def test_half_ulp_seed_perturbation_diverges(self, trained_model,
                                                 chen_dataset):
        # 2^-15-scale perturbation (hundreds of ulps) must separate fast
        seed = chen_dataset.inputs[1800].copy()
        pert = seed.copy()
        pert[0] = np.float32(pert[0] + 2.0**-15)
        a = generate(OscillatorState(model=trained_model, seed=seed), 10_000)
        b = generate(OscillatorState(model=trained_model, seed=pert), 10_000)
        dev = np.abs(a.astype(np.float64) - b.astype(np.float64)).max(axis=1)
        assert dev.max() > 0.1

    def test_stays_inside_attractor_box(self, trained_model, chen_dataset):
        seed = chen_dataset.inputs[500].copy()
        out = generate(OscillatorState(model=trained_model, seed=seed), 10_000)
        assert np.all(np.isfinite(out))
        assert out.min() > -1.0 and out.max() < 2.0

    def test_deviation_from_reference_grows_but_stays_bounded(
            self, trained_model, chen_dataset):
        # surrogate drifts from the integrator trajectory with positive
        # rate yet remains inside the attractor's normalized box
        start = 1000
        horizon = 1000
        seed = chen_dataset.inputs[start].copy()
        out = generate(OscillatorState(model=trained_model, seed=seed),
                       horizon)
        ref = chen_dataset.targets[start : start + horizon].astype(np.float64)
        dev = np.abs(out.astype(np.float64) - ref).max(axis=1)
        early = dev[:50].max()
        late = dev[-200:].max()
        assert late > early  # error accumulates along the loop
        assert np.all(dev < 2.0)  # but never leaves the attractor scale

    def test_requires_fresh_state(self, trained_model):
        seed = np.array([0.3, 0.4, 0.5], dtype=np.float32)
        state = OscillatorState(model=trained_model, seed=seed)
        step(state)
        with pytest.raises(ValueError):
            generate(state, 10)

    def test_generate_raw_denormalizes(self, trained_model):
        from chaosforge.oscillator import generate_raw

        seed = np.array([0.3, 0.4, 0.5], dtype=np.float32)
        norm = generate(OscillatorState(model=trained_model, seed=seed), 20)
        raw = generate_raw(OscillatorState(model=trained_model, seed=seed), 20)
        lo = trained_model.norm_min.astype(np.float64)
        hi = trained_model.norm_max.astype(np.float64)
        expected = norm.astype(np.float64) * (hi - lo) + lo
        np.testing.assert_allclose(raw, expected, rtol=1e-6)


class TestExtractBits:
    def test_one_point_zero_has_empty_tail(self):
        values = np.array([[1.0]], dtype=np.float32)  # 0x3F800000
        stream = extract_bits(values, bits_per_value=8, dims=[0])
        assert stream.data == b"\x00"
        assert stream.n_bits == 8

    def test_one_ulp_above_one(self):
        value = np.frombuffer(np.uint32(0x3F800001).tobytes(), dtype=np.float32)
        stream = extract_bits(value.reshape(1, 1), bits_per_value=8, dims=[0])
        assert stream.data == b"\x01"

    def test_length_formula(self, trained_model):
        seed = np.array([0.3, 0.4, 0.5], dtype=np.float32)
        out = generate(OscillatorState(model=trained_model, seed=seed), 1000)
        stream = extract_bits(out, bits_per_value=8, dims=[0, 1, 2])
        assert stream.n_bits == 1000 * 3 * 8
        assert len(stream.data) == 1000 * 3

    def test_msb_first_within_value(self):
        # low 4 bits of pattern 0b1011 -> stream bits 1,0,1,1
        pattern = np.uint32(0x3F80000B)
        value = np.frombuffer(pattern.tobytes(), dtype=np.float32)
        stream = extract_bits(value.reshape(1, 1), bits_per_value=4, dims=[0])
        assert stream.to_bit_array().tolist() == [1, 0, 1, 1]

    def test_dim_order_permutes_stream(self):
        rng = np.random.default_rng(0)
        values = rng.uniform(0.5, 1.5, size=(10, 3)).astype(np.float32)
        fwd = extract_bits(values, 8, [0, 1, 2]).to_bit_array()
        rev = extract_bits(values, 8, [2, 1, 0]).to_bit_array()
        fwd_rows = fwd.reshape(10, 3, 8)
        rev_rows = rev.reshape(10, 3, 8)
        assert np.array_equal(fwd_rows[:, ::-1, :], rev_rows)

    def test_pure_function_of_bit_patterns(self):
        values = np.array([[0.7, -0.7]], dtype=np.float32)
        a = extract_bits(values, 23, [0, 1])
        b = extract_bits(values.copy(), 23, [0, 1])
        assert a.data == b.data

    def test_padding_to_whole_bytes(self):
        values = np.array([[1.0]], dtype=np.float32)
        stream = extract_bits(values, bits_per_value=3, dims=[0])
        assert stream.n_bits == 3
        assert len(stream.data) == 1  # padded with zero bits

    @pytest.mark.parametrize("bad", [0, 24, -1])
    def test_rejects_bad_bit_counts(self, bad):
        with pytest.raises(ValueError):
            extract_bits(np.ones((2, 1), dtype=np.float32), bad, [0])
