"""Fully connected proxy network with width-rescaled layers.

Every layer computes ``sigma(W @ x / sqrt(d_l) + beta * b)`` where ``d_l``
is the layer's output width; the final layer is affine.  Besides plain
forward evaluation the module exposes the per-layer quantities (rescaled
augmented inputs and output-Jacobian blocks) that gradient kernels
consume, plus full-batch MSE training and a brute-force parameter
Jacobian used as the correctness oracle for those kernels.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NonFiniteLoss
from .validation import check_matrix, check_vector

_net_ids = itertools.count(1)

_ACTIVATIONS = ("relu", "identity")


def _act(name, z):
    if name == "relu":
        return np.maximum(z, 0.0)
    return z


def _act_grad(name, z):
    # Subgradient of relu at 0 is taken as 0.
    if name == "relu":
        return (z > 0.0).astype(np.float64)
    return np.ones_like(z)


@dataclass
class ProxyLayer:
    """One layer: weight ``(d_l, d_prev)``, bias ``(d_l,)``."""

    weight: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        self.weight = np.ascontiguousarray(self.weight, dtype=np.float64)
        self.bias = np.ascontiguousarray(self.bias, dtype=np.float64)
        if self.weight.ndim != 2 or self.bias.ndim != 1:
            raise DimensionMismatch("layer weight must be 2-D and bias 1-D")
        if self.weight.shape[0] != self.bias.shape[0]:
            raise DimensionMismatch(
                "bias length %d does not match weight rows %d"
                % (self.bias.shape[0], self.weight.shape[0])
            )

    @property
    def width(self):
        return self.weight.shape[0]

    @property
    def in_width(self):
        return self.weight.shape[1]


class ProxyNetwork:
    """Width-rescaled fully connected network.

    Parameters
    ----------
    layers: list of ProxyLayer
        Ordered layers; adjacent widths must chain.
    beta: float
        Nonnegative bias coefficient shared by all layers.
    activation: str
        'relu' or 'identity', applied to every layer except the last.

    Notes
    -----
    Training mutates parameters in place and bumps an internal version
    counter.  ``snapshot()`` returns an immutable deep copy; traces taken
    from different parameter versions refuse to combine in kernel code.
    """

    def __init__(self, layers, beta, activation="relu"):
        if not layers:
            raise DimensionMismatch("network needs at least one layer")
        if beta < 0.0:
            raise ValueError("beta must be nonnegative, got %r" % (beta,))
        if activation not in _ACTIVATIONS:
            raise ValueError("unknown activation %r" % (activation,))
        for prev, cur in zip(layers, layers[1:]):
            if cur.in_width != prev.width:
                raise DimensionMismatch(
                    "layer input width %d does not chain with previous width %d"
                    % (cur.in_width, prev.width)
                )
        self.layers = list(layers)
        self.beta = float(beta)
        self.activation = activation
        self.frozen = False
        self._uid = next(_net_ids)
        self._version = 0

    @property
    def input_dim(self):
        return self.layers[0].in_width

    @property
    def output_dim(self):
        return self.layers[-1].width

    @property
    def depth(self):
        return len(self.layers)

    @property
    def param_count(self):
        return sum(lay.weight.size + lay.bias.size for lay in self.layers)

    @property
    def token(self):
        """Identity of the current parameter values."""
        return (self._uid, self._version)

    def snapshot(self):
        """Frozen deep copy safe to share across threads."""
        copy = ProxyNetwork(
            [ProxyLayer(lay.weight.copy(), lay.bias.copy()) for lay in self.layers],
            self.beta,
            self.activation,
        )
        copy.frozen = True
        return copy


@dataclass(frozen=True, eq=False)
class LayerTrace:
    """Per-sample layer quantities at fixed parameters.

    ``aug_inputs[l]`` is the rescaled input of layer l+1 with beta
    appended, length d_l + 1.  ``jac_blocks[l]`` is the (d_L, d_{l+1})
    Jacobian of the network output with respect to layer l+1's affine
    preactivation; the last block is the identity.
    """

    aug_inputs: tuple
    jac_blocks: tuple
    token: tuple = field(compare=False)


def init_proxy(input_dim, hidden_widths, output_dim, beta=0.1, activation="relu",
               seed=0):
    """Build a network with i.i.d. standard normal weights and biases."""
    if input_dim < 1 or output_dim < 1:
        raise DimensionMismatch("input and output dims must be positive")
    rng = np.random.default_rng(seed)
    widths = [int(input_dim)] + [int(w) for w in hidden_widths] + [int(output_dim)]
    layers = []
    for d_prev, d_cur in zip(widths, widths[1:]):
        if d_cur < 1:
            raise DimensionMismatch("layer widths must be positive")
        layers.append(ProxyLayer(rng.standard_normal((d_cur, d_prev)),
                                 rng.standard_normal(d_cur)))
    return ProxyNetwork(layers, beta, activation)


def _forward_batch(net, x):
    """Shared forward: returns post-activation list [A^0..A^L] and
    preactivation list [Z^1..Z^L] for a (d, B) batch."""
    acts = [x]
    pres = []
    for idx, lay in enumerate(net.layers):
        z = (lay.weight @ acts[-1]) / np.sqrt(lay.width) \
            + net.beta * lay.bias[:, None]
        pres.append(z)
        last = idx == len(net.layers) - 1
        acts.append(z if last else _act(net.activation, z))
    return acts, pres


def _jac_blocks_batch(net, pres):
    """Output/preactivation Jacobians G^l of shape (B, d_L, d_l), l=1..L."""
    n_batch = pres[0].shape[1]
    d_out = net.output_dim
    blocks = [None] * net.depth
    g = np.broadcast_to(np.eye(d_out), (n_batch, d_out, d_out)).copy()
    blocks[-1] = g
    for l in range(net.depth - 1, 0, -1):
        lay = net.layers[l]
        g = blocks[l] @ (lay.weight / np.sqrt(lay.width))
        g = g * _act_grad(net.activation, pres[l - 1]).T[:, None, :]
        blocks[l - 1] = g
    return blocks


def forward(net, m):
    """Evaluate the network on one feature vector.

    Returns
    -------
    output: (d_L,) array
    trace: LayerTrace
        Augmented inputs and Jacobian blocks at the current parameters.
    """
    m = check_vector(m, "m", length=net.input_dim)
    acts, pres = _forward_batch(net, m[:, None])
    token = net.token
    aug = tuple(
        np.concatenate([acts[l][:, 0] / np.sqrt(lay.width), [net.beta]])
        for l, lay in enumerate(net.layers)
    )
    blocks = _jac_blocks_batch(net, pres)
    jac = tuple(b[0] for b in blocks)
    return acts[-1][:, 0], LayerTrace(aug, jac, token)


def trace_batch(net, x):
    """Traces for every column of a (d, N) feature block.

    One batched forward/backward instead of N scalar passes; the returned
    traces equal per-column ``forward`` traces exactly.
    """
    x = check_matrix(x, "features")
    if x.shape[0] != net.input_dim:
        raise DimensionMismatch(
            "feature rows %d != network input dim %d" % (x.shape[0], net.input_dim)
        )
    acts, pres = _forward_batch(net, x)
    blocks = _jac_blocks_batch(net, pres)
    token = net.token
    traces = []
    for i in range(x.shape[1]):
        aug = tuple(
            np.concatenate([acts[l][:, i] / np.sqrt(lay.width), [net.beta]])
            for l, lay in enumerate(net.layers)
        )
        jac = tuple(b[i] for b in blocks)
        traces.append(LayerTrace(aug, jac, token))
    return traces


def predict(net, x):
    """Batch forward without traces: (d, N) -> (d_L, N)."""
    x = check_matrix(x, "features")
    if x.shape[0] != net.input_dim:
        raise DimensionMismatch(
            "feature rows %d != network input dim %d" % (x.shape[0], net.input_dim)
        )
    acts, _ = _forward_batch(net, x)
    return acts[-1]


def _mse_loss(net, x, y):
    acts, _ = _forward_batch(net, x)
    resid = acts[-1] - y
    return float(np.mean(resid * resid))


def _mse_gradients(net, x, y):
    """Loss (mean over all output entries) and per-layer (dW, db)."""
    acts, pres = _forward_batch(net, x)
    resid = acts[-1] - y
    loss = float(np.mean(resid * resid))
    delta = 2.0 * resid / resid.size
    grads = []
    for l in range(net.depth - 1, -1, -1):
        lay = net.layers[l]
        scale = 1.0 / np.sqrt(lay.width)
        grads.append((scale * (delta @ acts[l].T), net.beta * delta.sum(axis=1)))
        if l > 0:
            delta = (scale * (lay.weight.T @ delta)) \
                * _act_grad(net.activation, pres[l - 1])
    grads.reverse()
    return loss, grads


def train_mse(net, inputs, targets, epochs, lr):
    """Full-batch gradient descent on mean squared error.

    The loss is averaged over every output entry (batch size times output
    dim).  Returns the loss measured after each parameter update, so the
    curve has exactly ``epochs`` entries.
    """
    if net.frozen:
        raise ValueError("cannot train a frozen snapshot")
    x = check_matrix(inputs, "inputs")
    y = check_matrix(targets, "targets")
    if x.shape[1] != y.shape[1]:
        raise DimensionMismatch(
            "inputs have %d columns but targets have %d" % (x.shape[1], y.shape[1])
        )
    if x.shape[0] != net.input_dim or y.shape[0] != net.output_dim:
        raise DimensionMismatch("input/target rows do not match network dims")
    if epochs < 0:
        raise ValueError("epochs must be nonnegative")
    if lr <= 0.0:
        raise ValueError("lr must be positive")
    curve = []
    for _ in range(int(epochs)):
        _, grads = _mse_gradients(net, x, y)
        for lay, (dw, db) in zip(net.layers, grads):
            lay.weight -= lr * dw
            lay.bias -= lr * db
        net._version += 1
        loss = _mse_loss(net, x, y)
        if not np.isfinite(loss):
            raise NonFiniteLoss(
                "training loss became non-finite after %d epochs; lower lr"
                % (len(curve) + 1,)
            )
        curve.append(loss)
    return curve


def param_jacobian(net, m):
    """Stacked per-coordinate parameter Jacobian, shape (d_L, P).

    Row k holds the gradient of output coordinate k with respect to all
    parameters, ordered layer by layer: W^l flattened row-major, then
    b^l.  The Frobenius inner product of two such Jacobians is the
    brute-force value every gradient kernel must reproduce.
    """
    m = check_vector(m, "m", length=net.input_dim)
    acts, pres = _forward_batch(net, m[:, None])
    blocks = _jac_blocks_batch(net, pres)
    d_out = net.output_dim
    cols = []
    for l, lay in enumerate(net.layers):
        g = blocks[l][0]
        scaled_in = acts[l][:, 0] / np.sqrt(lay.width)
        # d f_k / d W_ab = G_ka * scaled_in_b, flattened over (a, b)
        jw = (g[:, :, None] * scaled_in[None, None, :]).reshape(d_out, -1)
        cols.append(jw)
        cols.append(g * net.beta)
    return np.concatenate(cols, axis=1)
