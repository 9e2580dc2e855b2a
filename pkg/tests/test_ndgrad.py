"""Tensor op forward/backward checks against central finite differences."""

import numpy as np
import pytest

import eventgcn.ndgrad as nd
from eventgcn.ndgrad import Adam, ShapeError, Tensor

from oracles import finite_difference, max_relative_error

TOL = 1e-5


def weighted_sum(t, rng):
    """Collapse a tensor to a size-1 result with fixed non-uniform weights."""
    if t.ndim == 2:
        u = Tensor(rng.normal(size=(1, t.shape[0])))
        v = Tensor(rng.normal(size=(t.shape[1], 1)))
        return nd.matmul(nd.matmul(u, t), v)
    if t.ndim == 1:
        u = Tensor(rng.normal(size=(t.shape[0], 1)))
        return nd.matmul(t, u)
    return t


def check_grads(make_loss, params):
    """Backward pass vs finite differences for every parameter."""
    for p in params:
        p.zero_grad()
    loss = make_loss()
    loss.backward()
    for p in params:
        numeric = finite_difference(lambda: make_loss().item(), p)
        assert p.grad is not None
        err = max_relative_error(p.grad, numeric)
        assert err < TOL, f"gradient mismatch {err:.3e}"


class TestForward:
    """Values of individual ops."""

    def test_matmul_shapes(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=(3, 4))
        b = rng.normal(size=(4, 2))
        np.testing.assert_allclose(nd.matmul(Tensor(a), Tensor(b)).data, a @ b)
        v = rng.normal(size=4)
        np.testing.assert_allclose(nd.matmul(Tensor(v), Tensor(b)).data, v @ b)
        np.testing.assert_allclose(nd.matmul(Tensor(a), Tensor(v)).data, a @ v)

    def test_matmul_shape_error(self):
        with pytest.raises(ShapeError, match="matmul"):
            nd.matmul(Tensor(np.zeros((2, 3))), Tensor(np.zeros((2, 3))))

    def test_add_row_bias(self):
        a = np.arange(6, dtype=float).reshape(2, 3)
        b = np.array([10.0, 20.0, 30.0])
        np.testing.assert_allclose(nd.add(Tensor(a), Tensor(b)).data, a + b)

    def test_add_shape_error(self):
        with pytest.raises(ShapeError, match="add"):
            nd.add(Tensor(np.zeros((2, 3))), Tensor(np.zeros(2)))

    def test_scale_rows(self):
        a = np.ones((3, 2))
        f = np.array([1.0, 0.5, 2.0])
        out = nd.scale_rows(Tensor(a), f).data
        np.testing.assert_allclose(out, a * f[:, None])

    def test_sigmoid_extremes_stable(self):
        out = nd.sigmoid(Tensor(np.array([-1000.0, 0.0, 1000.0]))).data
        np.testing.assert_allclose(out, [0.0, 0.5, 1.0], atol=1e-12)

    def test_softmax_rows_sum_to_one(self):
        rng = np.random.default_rng(1)
        y = nd.softmax(Tensor(rng.normal(size=(5, 7)) * 10)).data
        np.testing.assert_allclose(y.sum(axis=1), np.ones(5), atol=1e-12)
        assert (y >= 0).all()

    def test_pools(self):
        a = np.array([[1.0, 5.0], [3.0, 2.0], [2.0, 4.0]])
        np.testing.assert_allclose(nd.max_pool_rows(Tensor(a)).data, [3.0, 5.0])
        np.testing.assert_allclose(nd.avg_pool_rows(Tensor(a)).data, [2.0, 11.0 / 3.0])
        np.testing.assert_allclose(nd.sum_pool_rows(Tensor(a)).data, [6.0, 11.0])

    def test_concat_axes(self):
        a = np.ones((2, 3))
        b = np.zeros((2, 2))
        assert nd.concat([Tensor(a), Tensor(b)], axis=1).shape == (2, 5)
        c = np.zeros((1, 3))
        assert nd.concat([Tensor(a), Tensor(c)], axis=0).shape == (3, 3)
        with pytest.raises(ShapeError, match="concat"):
            nd.concat([Tensor(a), Tensor(b)], axis=0)

    def test_uniform_logits_cross_entropy_is_log_c(self):
        for c in (2, 19, 20):
            loss = nd.cross_entropy(Tensor(np.zeros(c)), 0)
            np.testing.assert_allclose(loss.data, np.log(c), rtol=1e-12)

    def test_cross_entropy_nonnegative_and_stable(self):
        rng = np.random.default_rng(2)
        logits = Tensor(rng.normal(size=(6, 4)) * 500)
        loss = nd.cross_entropy(logits, [0, 1, 2, 3, 0, 1])
        assert np.isfinite(loss.data)
        assert float(loss.data) >= 0.0

    def test_cross_entropy_target_range(self):
        with pytest.raises(ShapeError, match="target"):
            nd.cross_entropy(Tensor(np.zeros(3)), 3)

    def test_take_rows_out_of_range(self):
        with pytest.raises(ShapeError, match="row index"):
            nd.take_rows(Tensor(np.zeros((2, 2))), [2])

    def test_backward_needs_scalar(self):
        with pytest.raises(ShapeError, match="scalar"):
            Tensor(np.zeros(3), requires_grad=True).backward()


class TestGradients:
    """Every op's backward rule vs central finite differences."""

    def test_matmul_matrix_matrix(self):
        rng = np.random.default_rng(10)
        a = Tensor(rng.normal(size=(3, 4)), requires_grad=True)
        b = Tensor(rng.normal(size=(4, 2)), requires_grad=True)
        check_grads(lambda: weighted_sum(nd.matmul(a, b), np.random.default_rng(5)), [a, b])

    def test_matmul_vector_matrix(self):
        rng = np.random.default_rng(11)
        a = Tensor(rng.normal(size=4), requires_grad=True)
        b = Tensor(rng.normal(size=(4, 3)), requires_grad=True)
        check_grads(lambda: weighted_sum(nd.matmul(a, b), np.random.default_rng(6)), [a, b])

    def test_matmul_matrix_vector(self):
        rng = np.random.default_rng(12)
        a = Tensor(rng.normal(size=(3, 4)), requires_grad=True)
        b = Tensor(rng.normal(size=4), requires_grad=True)
        check_grads(lambda: weighted_sum(nd.matmul(a, b), np.random.default_rng(7)), [a, b])

    def test_add_same_shape_and_row_bias(self):
        rng = np.random.default_rng(13)
        a = Tensor(rng.normal(size=(3, 4)), requires_grad=True)
        b = Tensor(rng.normal(size=(3, 4)), requires_grad=True)
        bias = Tensor(rng.normal(size=4), requires_grad=True)
        check_grads(
            lambda: weighted_sum(nd.add(nd.add(a, b), bias), np.random.default_rng(8)),
            [a, b, bias],
        )

    def test_add_n(self):
        rng = np.random.default_rng(14)
        parts = [Tensor(rng.normal(size=(2, 3)), requires_grad=True) for _ in range(3)]
        check_grads(lambda: weighted_sum(nd.add_n(parts), np.random.default_rng(9)), parts)

    def test_scale_and_scale_rows(self):
        rng = np.random.default_rng(15)
        a = Tensor(rng.normal(size=(4, 3)), requires_grad=True)
        factors = 1.0 / np.array([1.0, 2.0, 3.0, 2.0])
        check_grads(
            lambda: weighted_sum(
                nd.scale(nd.scale_rows(a, factors), 2.5), np.random.default_rng(10)
            ),
            [a],
        )

    def test_sigmoid(self):
        rng = np.random.default_rng(16)
        a = Tensor(rng.normal(size=(3, 3)), requires_grad=True)
        check_grads(lambda: weighted_sum(nd.sigmoid(a), np.random.default_rng(11)), [a])

    def test_relu_away_from_kink(self):
        rng = np.random.default_rng(17)
        vals = rng.normal(size=(3, 3))
        vals[np.abs(vals) < 0.1] += 0.2
        a = Tensor(vals, requires_grad=True)
        check_grads(lambda: weighted_sum(nd.relu(a), np.random.default_rng(12)), [a])

    def test_softmax_vector_and_rows(self):
        rng = np.random.default_rng(18)
        v = Tensor(rng.normal(size=5), requires_grad=True)
        check_grads(lambda: nd.nll(nd.softmax(v), 2), [v])
        m = Tensor(rng.normal(size=(3, 4)), requires_grad=True)
        check_grads(lambda: weighted_sum(nd.softmax(m), np.random.default_rng(13)), [m])

    def test_concat_both_axes(self):
        rng = np.random.default_rng(19)
        a = Tensor(rng.normal(size=(2, 3)), requires_grad=True)
        b = Tensor(rng.normal(size=(2, 2)), requires_grad=True)
        check_grads(
            lambda: weighted_sum(nd.concat([a, b], axis=1), np.random.default_rng(14)),
            [a, b],
        )
        c = Tensor(rng.normal(size=(1, 3)), requires_grad=True)
        check_grads(
            lambda: weighted_sum(nd.concat([a, c], axis=0), np.random.default_rng(15)),
            [a, c],
        )

    def test_take_rows_accumulates_repeats(self):
        rng = np.random.default_rng(20)
        table = Tensor(rng.normal(size=(4, 3)), requires_grad=True)
        check_grads(
            lambda: weighted_sum(
                nd.take_rows(table, [0, 2, 2, 1, 2]), np.random.default_rng(16)
            ),
            [table],
        )

    def test_pools(self):
        rng = np.random.default_rng(21)
        a = Tensor(rng.normal(size=(4, 3)), requires_grad=True)
        for pool in (nd.max_pool_rows, nd.avg_pool_rows, nd.sum_pool_rows):
            a.zero_grad()
            check_grads(lambda: weighted_sum(pool(a), np.random.default_rng(17)), [a])

    def test_cross_entropy_matrix(self):
        rng = np.random.default_rng(22)
        logits = Tensor(rng.normal(size=(5, 4)), requires_grad=True)
        check_grads(lambda: nd.cross_entropy(logits, [0, 3, 1, 2, 2]), [logits])

    def test_cross_entropy_vector(self):
        rng = np.random.default_rng(23)
        logits = Tensor(rng.normal(size=6), requires_grad=True)
        check_grads(lambda: nd.cross_entropy(logits, 4), [logits])

    def test_shared_subexpression_accumulates(self):
        rng = np.random.default_rng(24)
        a = Tensor(rng.normal(size=(3, 3)), requires_grad=True)
        def loss():
            y = nd.sigmoid(a)
            return weighted_sum(nd.add(y, y), np.random.default_rng(18))
        check_grads(loss, [a])

    def test_composite_mlp(self):
        rng = np.random.default_rng(25)
        x = Tensor(rng.normal(size=(4, 5)))
        w1 = Tensor(rng.normal(size=(5, 6)), requires_grad=True)
        b1 = Tensor(rng.normal(size=6), requires_grad=True)
        w2 = Tensor(rng.normal(size=(6, 3)), requires_grad=True)
        b2 = Tensor(rng.normal(size=3), requires_grad=True)
        def loss():
            h = nd.sigmoid(nd.add(nd.matmul(x, w1), b1))
            return nd.cross_entropy(nd.add(nd.matmul(h, w2), b2), [0, 1, 2, 1])
        check_grads(loss, [w1, b1, w2, b2])


class TestAdam:
    """Optimizer behaviour on closed-form cases."""

    def test_first_step_magnitude_is_lr(self):
        p = Tensor(np.array([1.0, -2.0]), requires_grad=True)
        p.grad = np.array([0.3, -0.7])
        opt = Adam([p], lr=0.01)
        before = p.data.copy()
        opt.step()
        step = p.data - before
        np.testing.assert_allclose(np.abs(step), [0.01, 0.01], rtol=1e-6)
        assert step[0] < 0 and step[1] > 0

    def test_quadratic_converges(self):
        p = Tensor(np.array([0.0]), requires_grad=True)
        opt = Adam([p], lr=0.01)
        for _ in range(2000):
            p.grad = 2.0 * (p.data - 3.0)
            opt.step()
            if abs(p.data[0] - 3.0) < 1e-3:
                break
        assert abs(p.data[0] - 3.0) < 1e-3

    def test_none_grad_leaves_param_untouched(self):
        p = Tensor(np.array([5.0]), requires_grad=True)
        opt = Adam([p], lr=0.1)
        opt.step()
        np.testing.assert_array_equal(p.data, [5.0])

    def test_zero_grad_resets(self):
        p = Tensor(np.array([1.0]), requires_grad=True)
        p.grad = np.array([1.0])
        opt = Adam([p])
        opt.zero_grad()
        assert p.grad is None


class TestCheckpoint:
    """Binary tensor container round-trips."""

    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(30)
        tensors = {
            "w": rng.normal(size=(7, 3)),
            "b": rng.normal(size=3),
            "scalar": np.asarray(np.pi),
        }
        path = tmp_path / "params.ckpt"
        nd.save_tensors(path, tensors)
        loaded = nd.load_tensors(path)
        assert list(loaded) == ["w", "b", "scalar"]
        for name, arr in tensors.items():
            assert loaded[name].tobytes() == np.asarray(arr).tobytes()
            assert loaded[name].shape == np.asarray(arr).shape

    def test_identical_saves_identical_bytes(self, tmp_path):
        tensors = {"a": np.arange(6, dtype=float).reshape(2, 3)}
        p1, p2 = tmp_path / "a.ckpt", tmp_path / "b.ckpt"
        nd.save_tensors(p1, tensors)
        nd.save_tensors(p2, tensors)
        assert p1.read_bytes() == p2.read_bytes()

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.ckpt"
        path.write_bytes(b"NOPE" + b"\x00" * 16)
        with pytest.raises(nd.CheckpointError, match="magic"):
            nd.load_tensors(path)

    def test_truncation_rejected(self, tmp_path):
        path = tmp_path / "t.ckpt"
        nd.save_tensors(path, {"w": np.zeros((4, 4))})
        raw = path.read_bytes()
        path.write_bytes(raw[:-5])
        with pytest.raises(nd.CheckpointError, match="truncated"):
            nd.load_tensors(path)

    def test_accepts_tensor_values(self, tmp_path):
        t = Tensor(np.ones((2, 2)), requires_grad=True)
        path = tmp_path / "t.ckpt"
        nd.save_tensors(path, {"t": t})
        np.testing.assert_array_equal(nd.load_tensors(path)["t"], t.data)
