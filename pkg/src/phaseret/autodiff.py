"""A small reverse-mode differentiation tape.

The tape records a computation over a flat real parameter vector as an
append-only sequence of primitive operations. Node values are numpy arrays
(0-d arrays for scalars); the final node must be scalar. A recorded tape
can be re-evaluated with new parameter values, so one tape drives a whole
training run: build once, then forward/backward every epoch.

Primitives are the elementwise set add, sub, mul, div, neg, relu, sin,
cos, sqrt, log, square (with numpy broadcasting), plus the structural
operations needed to express dense-layer and amplitude-fitting graphs:
matmul, transpose, sum, getitem, concat and scale. This is deliberately
not a general autodiff system.
"""

import numpy as np

__all__ = ["Tape"]


def _unbroadcast(grad, shape):
    """Sum `grad` down to `shape` (inverse of numpy broadcasting)."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


class Tape:
    """Reverse-mode tape over a real parameter vector.

    Graph-building methods append one node each and return its integer id.
    Call ``forward(params)`` to evaluate the recorded program (the final
    node must be scalar) and ``backward()`` afterwards for the gradient of
    that scalar with respect to every parameter slot.
    """

    def __init__(self):
        self._nodes = []        # (op, input ids, aux)
        self._values = []       # per-node ndarray, filled by forward()
        self._adjoints = None   # per-node ndarray, filled by backward()
        self._n_params = 0      # one past the highest referenced slot
        self._placeholders = {} # node id -> current value
        self._forward_done = False

    # -- leaves ----------------------------------------------------------

    def _append(self, op, inputs, aux=None):
        self._nodes.append((op, inputs, aux))
        self._values.append(None)
        self._forward_done = False
        return len(self._nodes) - 1

    def const(self, value):
        """Constant leaf (any shape)."""
        return self._append("const", (), np.asarray(value, dtype=float))

    def placeholder(self, value):
        """Constant leaf whose value may be replaced between forwards
        (used for dropout masks)."""
        i = self._append("placeholder", (), None)
        self._placeholders[i] = np.asarray(value, dtype=float)
        return i

    def set_placeholder(self, node, value):
        if node not in self._placeholders:
            raise KeyError(f"node {node} is not a placeholder")
        self._placeholders[node] = np.asarray(value, dtype=float)

    def param(self, index):
        """Scalar leaf reading parameter slot `index`."""
        if index < 0:
            raise ValueError("parameter index must be >= 0")
        self._n_params = max(self._n_params, index + 1)
        return self._append("param", (), (index, index + 1, ()))

    def param_slice(self, start, stop, shape=None):
        """Leaf reading params[start:stop], optionally reshaped."""
        if not 0 <= start < stop:
            raise ValueError("need 0 <= start < stop")
        if shape is None:
            shape = (stop - start,)
        if int(np.prod(shape)) != stop - start:
            raise ValueError("shape does not match slice length")
        self._n_params = max(self._n_params, stop)
        return self._append("param", (), (start, stop, tuple(shape)))

    # -- elementwise primitives -------------------------------------------

    def add(self, a, b):
        return self._append("add", (a, b))

    def sub(self, a, b):
        return self._append("sub", (a, b))

    def mul(self, a, b):
        return self._append("mul", (a, b))

    def div(self, a, b):
        return self._append("div", (a, b))

    def neg(self, a):
        return self._append("neg", (a,))

    def relu(self, a):
        return self._append("relu", (a,))

    def sin(self, a):
        return self._append("sin", (a,))

    def cos(self, a):
        return self._append("cos", (a,))

    def sqrt(self, a):
        return self._append("sqrt", (a,))

    def log(self, a):
        return self._append("log", (a,))

    def square(self, a):
        return self._append("square", (a,))

    def scale(self, a, c):
        """Multiply by a fixed python scalar (no extra leaf node)."""
        return self._append("scale", (a,), float(c))

    # -- structural operations --------------------------------------------

    def matmul(self, a, b):
        return self._append("matmul", (a, b))

    def transpose(self, a):
        return self._append("transpose", (a,))

    def sum(self, a):
        """Full reduction to a 0-d scalar."""
        return self._append("sum", (a,))

    def getitem(self, a, key):
        """Basic-slicing view of a node (no fancy indexing)."""
        return self._append("getitem", (a,), key)

    def concat(self, nodes, axis):
        return self._append("concat", tuple(nodes), int(axis))

    # -- execution ---------------------------------------------------------

    @property
    def n_params(self):
        return self._n_params

    def value(self, node):
        if self._values[node] is None:
            raise RuntimeError("forward() has not been run")
        return self._values[node]

    def adjoint(self, node):
        if self._adjoints is None:
            raise RuntimeError("backward() has not been run")
        return self._adjoints[node]

    def forward(self, params):
        """Evaluate the recorded program; returns the final scalar value."""
        if not self._nodes:
            raise RuntimeError("empty tape")
        params = np.asarray(params, dtype=float)
        if params.ndim != 1 or params.shape[0] < self._n_params:
            raise ValueError(
                f"parameter vector of length >= {self._n_params} required, "
                f"got shape {params.shape}"
            )
        vals = self._values
        for i, (op, inp, aux) in enumerate(self._nodes):
            if op == "mul":
                vals[i] = vals[inp[0]] * vals[inp[1]]
            elif op == "add":
                vals[i] = vals[inp[0]] + vals[inp[1]]
            elif op == "sub":
                vals[i] = vals[inp[0]] - vals[inp[1]]
            elif op == "div":
                vals[i] = vals[inp[0]] / vals[inp[1]]
            elif op == "square":
                v = vals[inp[0]]
                vals[i] = v * v
            elif op == "matmul":
                vals[i] = vals[inp[0]] @ vals[inp[1]]
            elif op == "getitem":
                vals[i] = vals[inp[0]][aux]
            elif op == "neg":
                vals[i] = -vals[inp[0]]
            elif op == "relu":
                vals[i] = np.maximum(vals[inp[0]], 0.0)
            elif op == "sin":
                vals[i] = np.sin(vals[inp[0]])
            elif op == "cos":
                vals[i] = np.cos(vals[inp[0]])
            elif op == "sqrt":
                vals[i] = np.sqrt(vals[inp[0]])
            elif op == "log":
                vals[i] = np.log(vals[inp[0]])
            elif op == "scale":
                vals[i] = vals[inp[0]] * aux
            elif op == "sum":
                vals[i] = np.asarray(vals[inp[0]].sum())
            elif op == "transpose":
                vals[i] = vals[inp[0]].T
            elif op == "concat":
                vals[i] = np.concatenate([vals[j] for j in inp], axis=aux)
            elif op == "param":
                start, stop, shape = aux
                v = params[start:stop]
                vals[i] = v.reshape(shape) if shape else np.asarray(v[0])
            elif op == "const":
                vals[i] = aux
            elif op == "placeholder":
                vals[i] = self._placeholders[i]
            else:  # pragma: no cover
                raise AssertionError(f"unknown op {op}")
        out = vals[-1]
        if np.asarray(out).size != 1:
            raise ValueError(
                f"final tape node must be scalar, got shape {np.asarray(out).shape}"
            )
        self._forward_done = True
        self._adjoints = None
        return float(out)

    def backward(self):
        """Gradient of the final scalar w.r.t. the parameter vector.

        Must be called after forward(); the adjoint of the final node is
        seeded with 1.
        """
        if not self._forward_done:
            raise RuntimeError("backward() called before forward()")
        vals = self._values
        adj = [None] * len(self._nodes)
        adj[-1] = np.asarray(1.0)
        grad = np.zeros(self._n_params)
        for i in range(len(self._nodes) - 1, -1, -1):
            g = adj[i]
            if g is None:
                continue
            op, inp, aux = self._nodes[i]
            if op in ("const", "placeholder"):
                continue
            if op == "param":
                start, stop, shape = aux
                grad[start:stop] += np.asarray(g).reshape(-1)
                continue
            if op == "mul":
                a, b = inp
                self._acc(adj, a, _unbroadcast(g * vals[b], vals[a].shape))
                self._acc(adj, b, _unbroadcast(g * vals[a], vals[b].shape))
            elif op == "add":
                a, b = inp
                self._acc(adj, a, _unbroadcast(g, vals[a].shape))
                self._acc(adj, b, _unbroadcast(g, vals[b].shape))
            elif op == "sub":
                a, b = inp
                self._acc(adj, a, _unbroadcast(g, vals[a].shape))
                self._acc(adj, b, _unbroadcast(-g, vals[b].shape))
            elif op == "div":
                a, b = inp
                vb = vals[b]
                self._acc(adj, a, _unbroadcast(g / vb, vals[a].shape))
                self._acc(adj, b, _unbroadcast(-g * vals[a] / (vb * vb), vb.shape))
            elif op == "square":
                self._acc(adj, inp[0], 2.0 * g * vals[inp[0]])
            elif op == "matmul":
                a, b = inp
                self._acc(adj, a, g @ vals[b].T)
                self._acc(adj, b, vals[a].T @ g)
            elif op == "getitem":
                full = np.zeros_like(vals[inp[0]])
                full[aux] = g
                self._acc(adj, inp[0], full)
            elif op == "neg":
                self._acc(adj, inp[0], -g)
            elif op == "relu":
                # subgradient 0 at exactly 0: dead units stay dead
                self._acc(adj, inp[0], g * (vals[inp[0]] > 0.0))
            elif op == "sin":
                self._acc(adj, inp[0], g * np.cos(vals[inp[0]]))
            elif op == "cos":
                self._acc(adj, inp[0], -g * np.sin(vals[inp[0]]))
            elif op == "sqrt":
                self._acc(adj, inp[0], g * 0.5 / vals[i])
            elif op == "log":
                self._acc(adj, inp[0], g / vals[inp[0]])
            elif op == "scale":
                self._acc(adj, inp[0], g * aux)
            elif op == "sum":
                self._acc(adj, inp[0], np.broadcast_to(g, vals[inp[0]].shape))
            elif op == "transpose":
                self._acc(adj, inp[0], g.T)
            elif op == "concat":
                offset = 0
                for j in inp:
                    n = vals[j].shape[aux]
                    key = [slice(None)] * vals[j].ndim
                    key[aux] = slice(offset, offset + n)
                    self._acc(adj, j, g[tuple(key)])
                    offset += n
            else:  # pragma: no cover
                raise AssertionError(f"unknown op {op}")
        self._adjoints = adj
        return grad

    @staticmethod
    def _acc(adj, i, contribution):
        if adj[i] is None:
            adj[i] = contribution
        else:
            adj[i] = adj[i] + contribution
