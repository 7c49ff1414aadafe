import numpy as np
import pytest

from twtlrl.nn import Adam, GruCell, Mlp, ParamVector, load_params, \
    log_softmax, save_params, softmax, unroll, unroll_backward
from twtlrl.seeding import substream


def flatten_grads(params: ParamVector, grads: ParamVector) -> np.ndarray:
    return np.concatenate([np.asarray(grads[k]).ravel() for k in params.keys()])


def central_difference(params: ParamVector, loss_fn, eps: float = 1e-6
                       ) -> np.ndarray:
    """Numerical gradient of loss_fn() w.r.t. params, perturbed in place."""
    flat = params.to_flat()
    out = np.empty_like(flat)
    for i in range(flat.size):
        for sign in (1.0, -1.0):
            bumped = flat.copy()
            bumped[i] += sign * eps
            _assign(params, bumped)
            if sign > 0:
                hi = loss_fn()
            else:
                lo = loss_fn()
        out[i] = (hi - lo) / (2.0 * eps)
    _assign(params, flat)
    return out


def _assign(params: ParamVector, flat: np.ndarray) -> None:
    for k, v in params.from_flat(flat).items():
        params.segments[k][...] = v


def rel_err(a: np.ndarray, b: np.ndarray) -> float:
    # small absolute guard so near-zero components don't inflate the ratio
    scale = np.maximum(1e-4, np.abs(a) + np.abs(b))
    return float(np.max(np.abs(a - b) / scale))


def test_param_vector_flat_roundtrip():
    pv = ParamVector({"W": np.arange(6.0).reshape(2, 3), "b": np.ones(3)})
    flat = pv.to_flat()
    assert flat.size == pv.size == 9
    again = pv.from_flat(flat)
    assert np.array_equal(again["W"], pv["W"])
    with pytest.raises(ValueError):
        pv.from_flat(np.zeros(5))


def test_softmax_is_normalized_and_stable():
    logits = np.array([1000.0, 1001.0, 999.0])
    p = softmax(logits)
    assert p.sum() == pytest.approx(1.0)
    assert np.all(np.isfinite(log_softmax(logits)))


def test_mlp_linear_gradients_match_finite_differences():
    rng = substream(0, "nn")
    net = Mlp.init([3, 8, 5, 2], "linear", rng)
    x = rng.normal(size=(4, 3))
    target = rng.normal(size=(4, 2))

    def loss():
        out, _ = net.forward(x)
        return float(np.sum((out - target) ** 2))

    out, cache = net.forward(x)
    grads, dx = net.backward(cache, 2.0 * (out - target))
    assert rel_err(flatten_grads(net.params, grads),
                   central_difference(net.params, loss)) < 1e-5

    # input gradient too
    def loss_x(xv):
        out2, _ = net.forward(xv)
        return float(np.sum((out2 - target) ** 2))

    eps = 1e-6
    num_dx = np.empty_like(x)
    for idx in np.ndindex(x.shape):
        xp = x.copy(); xp[idx] += eps
        xm = x.copy(); xm[idx] -= eps
        num_dx[idx] = (loss_x(xp) - loss_x(xm)) / (2 * eps)
    assert rel_err(dx, num_dx) < 1e-5


def test_mlp_softmax_head_gradients():
    rng = substream(1, "nn")
    net = Mlp.init([2, 6, 3], "softmax", rng)
    x = rng.normal(size=(5, 2))
    labels = np.array([0, 2, 1, 1, 0])

    def loss():
        probs, _ = net.forward(x)
        return -float(np.sum(np.log(probs[np.arange(5), labels])))

    probs, cache = net.forward(x)
    dlogits = probs.copy()
    dlogits[np.arange(5), labels] -= 1.0  # d(NLL)/d(logits)
    grads, _ = net.backward(cache, dlogits)
    assert rel_err(flatten_grads(net.params, grads),
                   central_difference(net.params, loss)) < 1e-5


def test_gru_bptt_gradients_match_finite_differences():
    rng = substream(2, "nn")
    cell = GruCell.init(3, 4, rng)
    xs = rng.normal(size=(6, 2, 3))
    w = rng.normal(size=(6, 2, 4))

    def loss():
        hs, _ = unroll(cell, xs)
        return float(np.sum(w * hs))

    hs, caches = unroll(cell, xs)
    grads, dxs, dh0 = unroll_backward(cell, caches, w.copy())
    assert rel_err(flatten_grads(cell.params, grads),
                   central_difference(cell.params, loss)) < 1e-5


def test_adam_reduces_quadratic():
    params = ParamVector({"w": np.array([5.0, -3.0])})
    opt = Adam(params, lr=0.1)
    for _ in range(300):
        opt.step(ParamVector({"w": 2.0 * params["w"]}))
    assert np.all(np.abs(params["w"]) < 1e-2)


def test_adam_zero_lr_is_noop():
    params = ParamVector({"w": np.array([1.0, 2.0])})
    opt = Adam(params, lr=0.0)
    opt.step(ParamVector({"w": np.array([10.0, -10.0])}))
    assert np.array_equal(params["w"], [1.0, 2.0])


def test_params_persistence_roundtrip(tmp_path):
    pv = ParamVector({"W0": np.array([[1.5, -2.25], [0.125, 3.0]]),
                      "scalar_thing": np.asarray(0.7),
                      "b0": np.array([1e-17, -4.0])})
    path = tmp_path / "p.params"
    save_params(path, "unit-test", pv)
    kind, again = load_params(path)
    assert kind == "unit-test"
    for k in pv.keys():
        assert np.array_equal(again[k], pv[k])
        assert again[k].shape == pv[k].shape


def test_load_rejects_foreign_files(tmp_path):
    path = tmp_path / "junk.txt"
    path.write_text("hello\n")
    with pytest.raises(ValueError):
        load_params(path)
