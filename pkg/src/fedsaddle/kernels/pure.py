"""Pure-numpy reference implementations of the hot kernels.

Both backends must perform the same elementwise IEEE operation sequence for
the estimator recursion, and each backend must route every quadratic-saddle
gradient through a single shared routine, so that within one backend the
one-shot path (`quad_batch_grads`) and the fused path (`quad_vr_update`)
produce identical floats.
"""
name = "pure"
compiled = False


def _grads(hess, lin, coup, mu, sigma, x, y, nx, ny):
    gx = hess @ x + lin + coup @ y
    gy = coup.T @ x - mu * y
    if sigma != 0.0:
        gx = gx + sigma * nx
        gy = gy + sigma * ny
    return gx, gy


def quad_batch_grads(hess, lin, coup, mu, sigma, x, y, noise):
    """Minibatch-averaged sampled gradients of one client's quadratic saddle.

    noise holds one standard-normal row per sample, laid out (b, d1 + d2);
    the sampled per-sample gradient is the exact gradient plus sigma times
    that sample's noise row.
    """
    d1 = x.shape[0]
    nm = noise.mean(axis=0)
    return _grads(hess, lin, coup, mu, sigma, x, y, nm[:d1], nm[d1:])


def quad_vr_update(hess, lin, coup, mu, sigma, x, y, px, py, u, v, noise, alpha, beta):
    """One momentum variance-reduction refresh on a quadratic saddle, in place.

    Evaluates the minibatch gradient at (x, y) and at (px, py) with the same
    noise rows (the shared-minibatch correlation the estimator relies on),
    applies  u <- g_new + (1-alpha)(u - g_old)  and the analogous v update,
    then advances (px, py) to (x, y).
    """
    d1 = x.shape[0]
    nm = noise.mean(axis=0)
    nx, ny = nm[:d1], nm[d1:]
    gxn, gyn = _grads(hess, lin, coup, mu, sigma, x, y, nx, ny)
    gxo, gyo = _grads(hess, lin, coup, mu, sigma, px, py, nx, ny)
    u[:] = gxn + (1.0 - alpha) * (u - gxo)
    v[:] = gyn + (1.0 - beta) * (v - gyo)
    px[:] = x
    py[:] = y


def quad_vr_round(hess, lin_rows, coup, mu, sigma, X, Y, PX, PY, U, V,
                  noise, alpha, beta, step_x, step_y, do_step):
    """Per-round refresh for all clients (row k is client k), optionally
    followed by each client's next local step with its fresh direction."""
    for k in range(X.shape[0]):
        quad_vr_update(hess, lin_rows[k], coup, mu, sigma, X[k], Y[k],
                       PX[k], PY[k], U[k], V[k], noise[k], alpha, beta)
        if do_step:
            X[k] -= step_x * U[k]
            Y[k] += step_y * V[k]
