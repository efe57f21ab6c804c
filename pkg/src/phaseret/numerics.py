"""Low-level numerical helpers: polynomial evaluation from roots, the
paraconjugate, finiteness guards, and the Adam optimizer."""

import numpy as np

__all__ = [
    "require_finite",
    "eval_poly_from_roots",
    "conj_reflect_eval",
    "AdamState",
    "adam_step",
]


def require_finite(value, name="value"):
    """Raise ValueError if `value` contains NaN or Inf.

    Accepts scalars or arrays, real or complex. Returns the input unchanged
    so it can be used inline at construction sites.
    """
    arr = np.asarray(value)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


def eval_poly_from_roots(roots, z):
    """Evaluate the monic polynomial with the given roots at z.

    Returns prod_k (z - a_k); the empty product is 1. `z` may be a scalar
    or an array (evaluated elementwise). Roots are multiplied in the order
    given, so a fixed root order gives bit-identical results.
    """
    roots = np.asarray(roots, dtype=complex)
    require_finite(roots, "roots")
    z = np.asarray(z, dtype=complex)
    out = np.ones_like(z)
    for a in roots:
        out = out * (z - a)
    return out if out.ndim else complex(out)


def conj_reflect_eval(roots, z):
    """Evaluate the paraconjugate P*(z) = conj(P(-conj(z))) of the monic
    polynomial P with the given roots.

    Expanding the definition, P*(z) = prod_k (-z - conj(a_k)), i.e. the
    reflected-root polynomial up to the sign (-1)^m of the leading
    coefficient. On the imaginary axis this reduces to
    P*(jw) = conj(P(jw)), which is the identity the phase model relies on.
    """
    z = np.asarray(z, dtype=complex)
    out = np.conj(eval_poly_from_roots(roots, -np.conj(z)))
    return out if np.asarray(out).ndim else complex(out)


class AdamState:
    """Optimizer state for Adam with bias correction.

    Holds the two moment vectors and the step counter; one instance is
    owned by exactly one training run.
    """

    def __init__(self, n_params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        if n_params < 1:
            raise ValueError("n_params must be >= 1")
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.m = np.zeros(n_params)
        self.v = np.zeros(n_params)
        self.t = 0


def adam_step(state, params, grad):
    """Apply one bias-corrected Adam update and return the new parameters.

    `state` is mutated (moments and step counter advance). Raises on a
    length mismatch between state, params, and grad.
    """
    params = np.asarray(params, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if params.shape != grad.shape or params.shape != state.m.shape:
        raise ValueError(
            f"length mismatch: params {params.shape}, grad {grad.shape}, "
            f"state {state.m.shape}"
        )
    state.t += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = state.m / (1.0 - state.beta1 ** state.t)
    v_hat = state.v / (1.0 - state.beta2 ** state.t)
    return params - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
