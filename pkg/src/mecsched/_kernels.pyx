# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled network kernels; same contracts as `_kernels_py`.

Small dense layers dominate the simulator's runtime, so the matrix work is
written as C loops with unit-stride inner dimensions rather than delegated
to BLAS, which has too much per-call overhead at these sizes.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

BACKEND = "compiled"


cdef void _dense(double[:, ::1] a, double[:, ::1] w, double[::1] b,
                 double[:, ::1] out, bint relu) noexcept nogil:
    cdef Py_ssize_t n = a.shape[0], din = a.shape[1], dout = w.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double av
    for i in range(n):
        for j in range(dout):
            out[i, j] = b[j]
        for k in range(din):
            av = a[i, k]
            if av != 0.0:
                for j in range(dout):
                    out[i, j] += av * w[k, j]
        if relu:
            for j in range(dout):
                if out[i, j] < 0.0:
                    out[i, j] = 0.0


def mlp_forward(list weights, list biases, cnp.ndarray x):
    cdef Py_ssize_t last = len(weights) - 1
    cdef Py_ssize_t i
    cdef cnp.ndarray h = x
    cdef cnp.ndarray out
    for i in range(len(weights)):
        w = weights[i]
        out = np.empty((h.shape[0], w.shape[1]))
        _dense(h, w, biases[i], out, i != last)
        h = out
    return h


def mlp_backward(list weights, list biases, cnp.ndarray x,
                 cnp.ndarray actions, cnp.ndarray targets,
                 cnp.ndarray sample_weights):
    cdef Py_ssize_t n_layers = len(weights)
    cdef Py_ssize_t last = n_layers - 1
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i, j, k, r

    # forward pass keeping pre-activations and activations
    cdef list pre = []
    cdef list acts = [x]
    cdef cnp.ndarray h = x
    cdef cnp.ndarray z, act
    for i in range(n_layers):
        w = weights[i]
        z = np.empty((h.shape[0], w.shape[1]))
        _dense(h, w, biases[i], z, False)
        pre.append(z)
        if i != last:
            act = np.maximum(z, 0.0)
        else:
            act = z
        acts.append(act)
        h = act

    cdef double[:, ::1] q = acts[n_layers]
    cdef long[::1] act_idx = actions
    cdef double[::1] tgt = targets
    cdef double[::1] sw = sample_weights

    cdef double wsum = 0.0, loss = 0.0, resid
    for r in range(n):
        wsum += sw[r]
    cdef cnp.ndarray delta_np = np.zeros((n, q.shape[1]))
    cdef double[:, ::1] delta = delta_np
    for r in range(n):
        resid = q[r, act_idx[r]] - tgt[r]
        loss += sw[r] * resid * resid
        delta[r, act_idx[r]] = 2.0 * sw[r] * resid / wsum
    loss /= wsum

    cdef list grad_w = [None] * n_layers
    cdef list grad_b = [None] * n_layers
    cdef cnp.ndarray gw_np, gb_np, nd_np
    cdef double[:, ::1] a_prev, gw, nd, wmat, zprev
    cdef double[::1] gb
    cdef double av, acc
    cdef Py_ssize_t dout, dprev
    for i in range(last, -1, -1):
        a_prev = acts[i]
        dout = delta.shape[1]
        gw_np = np.zeros((a_prev.shape[1], dout))
        gb_np = np.zeros(dout)
        gw = gw_np
        gb = gb_np
        for r in range(n):
            for j in range(dout):
                gb[j] += delta[r, j]
            for k in range(a_prev.shape[1]):
                av = a_prev[r, k]
                if av != 0.0:
                    for j in range(dout):
                        gw[k, j] += av * delta[r, j]
        grad_w[i] = gw_np
        grad_b[i] = gb_np
        if i > 0:
            wmat = weights[i]
            zprev = pre[i - 1]
            dprev = wmat.shape[0]
            nd_np = np.empty((n, dprev))
            nd = nd_np
            for r in range(n):
                for k in range(dprev):
                    if zprev[r, k] <= 0.0:
                        nd[r, k] = 0.0
                    else:
                        acc = 0.0
                        for j in range(dout):
                            acc += delta[r, j] * wmat[k, j]
                        nd[r, k] = acc
            delta_np = nd_np
            delta = delta_np
    return loss, grad_w, grad_b


def double_q_values(list policy_w, list policy_b, list target_w,
                    list target_b, cnp.ndarray x):
    """Per row: target-network value of the policy-argmax action."""
    cdef cnp.ndarray qp = mlp_forward(policy_w, policy_b, x)
    cdef cnp.ndarray qt = mlp_forward(target_w, target_b, x)
    cdef double[:, ::1] p = qp
    cdef double[:, ::1] tv = qt
    cdef Py_ssize_t n = p.shape[0], a = p.shape[1]
    cdef cnp.ndarray out_np = np.empty(n)
    cdef double[::1] out = out_np
    cdef Py_ssize_t r, j, best
    cdef double m_best
    for r in range(n):
        best = 0
        m_best = p[r, 0]
        for j in range(1, a):
            if p[r, j] > m_best:
                m_best = p[r, j]
                best = j
        out[r] = tv[r, best]
    return out_np


def adam_update(list params, list grads, list m, list v, long t,
                double lr, double beta1, double beta2, double eps):
    cdef double bc1 = 1.0 - beta1 ** t
    cdef double bc2 = 1.0 - beta2 ** t
    cdef Py_ssize_t i, k
    cdef double[::1] p, g, mi, vi
    cdef double gk
    for i in range(len(params)):
        p = params[i].ravel()
        g = grads[i].ravel()
        mi = m[i].ravel()
        vi = v[i].ravel()
        for k in range(p.shape[0]):
            gk = g[k]
            mi[k] = beta1 * mi[k] + (1.0 - beta1) * gk
            vi[k] = beta2 * vi[k] + (1.0 - beta2) * gk * gk
            p[k] -= lr * (mi[k] / bc1) / (sqrt(vi[k] / bc2) + eps)


def soft_update_arrays(list targets, list sources, double tau):
    cdef Py_ssize_t i, k
    cdef double[::1] t_arr, s_arr
    for i in range(len(targets)):
        t_arr = targets[i].ravel()
        s_arr = sources[i].ravel()
        for k in range(t_arr.shape[0]):
            t_arr[k] = tau * s_arr[k] + (1.0 - tau) * t_arr[k]
