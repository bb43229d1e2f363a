"""Shared test helpers: central finite-difference gradient oracle."""

import numpy as np
import pytest

from tsuda.engine import Tensor


def finite_difference(fn, leaves, h=1e-5):
    """Central finite differences of scalar fn(*leaves) w.r.t. each leaf.

    ``fn`` must rebuild its graph from the leaves' current ``.data`` on
    every call; returns one gradient array per leaf.
    """
    grads = []
    for leaf in leaves:
        g = np.zeros_like(leaf.data)
        flat = leaf.data.reshape(-1)
        gf = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            hi = float(fn(*leaves).data)
            flat[i] = orig - h
            lo = float(fn(*leaves).data)
            flat[i] = orig
            gf[i] = (hi - lo) / (2.0 * h)
        grads.append(g)
    return grads


def analytic_gradients(fn, leaves):
    """Backprop gradients of scalar fn(*leaves) w.r.t. each leaf."""
    for leaf in leaves:
        leaf.grad = None
    out = fn(*leaves)
    out.backward()
    return [np.zeros_like(l.data) if l.grad is None else l.grad.copy() for l in leaves]


def assert_close_rel(analytic, numeric, rtol, atol=1e-8):
    analytic = np.asarray(analytic)
    numeric = np.asarray(numeric)
    denom = np.maximum(np.abs(numeric), np.abs(analytic))
    err = np.abs(analytic - numeric)
    bad = err > atol + rtol * denom
    assert not bad.any(), (
        f"gradient mismatch: max abs err {err.max():.3e}, "
        f"worst rel {(err / np.maximum(denom, 1e-12)).max():.3e}")


def check_gradients(fn, leaves, rtol=1e-4, h=1e-5, atol=1e-8):
    ana = analytic_gradients(fn, leaves)
    num = finite_difference(fn, leaves, h=h)
    for a, n in zip(ana, num):
        assert_close_rel(a, n, rtol=rtol, atol=atol)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def leaf(rng, *shape, lo=-2.0, hi=2.0):
    return Tensor(rng.uniform(lo, hi, size=shape), requires_grad=True)
