import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from nedkit.neural.optim import AdamState, adam_step


@settings(max_examples=50)
@given(st.lists(st.floats(1e-3, 1e3) | st.floats(-1e3, -1e-3), min_size=1, max_size=20))
def test_first_step_is_sign_step(gs):
    g = np.array(gs)
    params = {"w": np.zeros_like(g)}
    adam_step(params, {"w": g}, AdamState(lr=1e-3))
    np.testing.assert_allclose(params["w"], -1e-3 * np.sign(g), rtol=1e-4)


def test_zero_gradient_keeps_params():
    params = {"a": np.array([1.0, -2.0]), "b": np.array([[3.0]])}
    state = AdamState()
    for _ in range(50):
        adam_step(params, {k: np.zeros_like(v) for k, v in params.items()}, state)
    assert np.array_equal(params["a"], [1.0, -2.0])
    assert np.array_equal(params["b"], [[3.0]])
    assert state.t == 50


def _reference_adam(g_seq, lr=1e-3, b1=0.9, b2=0.999, eps=1e-8):
    # textbook scalar loop, independent of the vectorized version
    w, m, v = 0.0, 0.0, 0.0
    for t, g in enumerate(g_seq, start=1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        w -= lr * (m / (1 - b1**t)) / ((v / (1 - b2**t)) ** 0.5 + eps)
    return w


def test_matches_scalar_reference():
    rng = np.random.default_rng(3)
    seq = rng.standard_normal(30)
    params = {"w": np.zeros(1)}
    state = AdamState()
    for g in seq:
        adam_step(params, {"w": np.array([g])}, state)
    assert abs(params["w"][0] - _reference_adam(seq)) < 1e-15


def test_deterministic():
    def run():
        rng = np.random.default_rng(9)
        params = {"w": rng.standard_normal((4, 3))}
        state = AdamState()
        for _ in range(20):
            adam_step(params, {"w": rng.standard_normal((4, 3))}, state)
        return params["w"]

    assert np.array_equal(run(), run())
