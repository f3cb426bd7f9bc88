"""PSD kernel evaluators and Gram-matrix assembly.

Four kernel kinds share one interface: plain dot product, Laplace RBF
(``exp(-||a-b||/sigma)``, Euclidean norm), and two gradient kernels read
off proxy-network traces: the full layerwise tangent kernel and its
last-layer restriction.  Gradient kernels factor as a sum over layers of
(augmented-input dot) * (Jacobian-block Frobenius dot), which equals the
Frobenius inner product of the stacked parameter Jacobians.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DimensionMismatch, SnapshotMismatch
from .proxy import ProxyNetwork, trace_batch
from .validation import check_indices, check_matrix, check_vector

KERNEL_KINDS = ("linear", "rbf", "last", "ntk")

# long spellings accepted from configs and constructors
_KIND_ALIASES = {"laplace-rbf": "rbf", "last-layer": "last"}


def canonical_kind(kind):
    """Map a kind name, long spellings included, to its canonical form."""
    out = _KIND_ALIASES.get(kind, kind)
    if out not in KERNEL_KINDS:
        raise ValueError("unknown kernel kind %r" % (kind,))
    return out


@dataclass(frozen=True)
class KernelSpec:
    """Which kernel to evaluate and with what knobs.

    Parameters
    ----------
    kind: str
        'linear', 'rbf', 'last' or 'ntk' (long forms 'laplace-rbf' and
        'last-layer' are accepted and canonicalized).
    rbf_sigma: float
        RBF width, used only by the rbf kind.
    normalize: bool
        Rescale the Gram matrix to unit diagonal.
    proxy: ProxyNetwork, optional
        Frozen snapshot; required by the gradient kinds, forbidden
        otherwise.  A live network is snapshotted defensively.
    """

    kind: str
    rbf_sigma: float = 1.0
    normalize: bool = False
    proxy: ProxyNetwork = None

    def __post_init__(self):
        kind = canonical_kind(self.kind)
        object.__setattr__(self, "kind", kind)
        if self.rbf_sigma <= 0.0:
            raise ValueError("rbf_sigma must be positive, got %r"
                             % (self.rbf_sigma,))
        needs_proxy = kind in ("last", "ntk")
        if needs_proxy and self.proxy is None:
            raise ValueError("kernel kind %r requires a proxy network" % (kind,))
        if not needs_proxy and self.proxy is not None:
            raise ValueError("kernel kind %r does not take a proxy" % (kind,))
        if self.proxy is not None and not self.proxy.frozen:
            object.__setattr__(self, "proxy", self.proxy.snapshot())


@dataclass(frozen=True)
class GramMatrix:
    """Kernel matrix over an ordered index subset."""

    indices: tuple
    K: np.ndarray


def kernel_linear(mi, mj):
    """Dot product of two equal-length feature vectors."""
    mi = check_vector(mi, "mi")
    mj = check_vector(mj, "mj", length=mi.shape[0])
    return float(mi @ mj)


def kernel_rbf(mi, mj, sigma):
    """exp(-||mi - mj||_2 / sigma); 1 exactly when mi equals mj."""
    if sigma <= 0.0:
        raise ValueError("sigma must be positive, got %r" % (sigma,))
    mi = check_vector(mi, "mi")
    mj = check_vector(mj, "mj", length=mi.shape[0])
    return float(np.exp(-np.linalg.norm(mi - mj) / sigma))


def _check_traces(trace_i, trace_j):
    if trace_i.token != trace_j.token:
        raise SnapshotMismatch(
            "traces come from different parameter versions: %r vs %r"
            % (trace_i.token, trace_j.token)
        )


def kernel_ntk(trace_i, trace_j):
    """Layerwise tangent kernel between two trace records.

    Equals the Frobenius inner product of the two stacked parameter
    Jacobians; verified against that brute force in tests.
    """
    _check_traces(trace_i, trace_j)
    total = 0.0
    for ai, aj, gi, gj in zip(trace_i.aug_inputs, trace_j.aug_inputs,
                              trace_i.jac_blocks, trace_j.jac_blocks):
        total += float(ai @ aj) * float(np.sum(gi * gj))
    return total


def kernel_last(trace_i, trace_j):
    """Final-layer term of the tangent kernel (last-layer gradients only)."""
    _check_traces(trace_i, trace_j)
    ai, aj = trace_i.aug_inputs[-1], trace_j.aug_inputs[-1]
    gi, gj = trace_i.jac_blocks[-1], trace_j.jac_blocks[-1]
    return float(ai @ aj) * float(np.sum(gi * gj))


def _normalize_gram(k):
    # unit diagonal; rows whose diagonal is (numerically) zero lose their
    # off-diagonal mass instead of dividing by zero
    d = np.diag(k).copy()
    dead = d <= 0.0
    scale = np.sqrt(np.where(dead, 1.0, d))
    out = k / np.outer(scale, scale)
    if dead.any():
        out[dead, :] = 0.0
        out[:, dead] = 0.0
    np.fill_diagonal(out, 1.0)
    return out


def gram(spec, features, indices):
    """Assemble the kernel matrix over the given sample indices.

    Gradient kernels run one batched forward/backward for the whole
    subset and reduce per layer with two rank-n products, so assembly
    costs O(n) network evaluations rather than O(n^2).
    """
    features = check_matrix(features, "features")
    idx = check_indices(indices, features.shape[1], "indices")
    x = features[:, idx]
    n = x.shape[1]
    if spec.kind == "linear":
        k = x.T @ x
    elif spec.kind == "rbf":
        k = np.exp(-cdist(x.T, x.T) / spec.rbf_sigma)
    else:
        net = spec.proxy
        if x.shape[0] != net.input_dim:
            raise DimensionMismatch(
                "feature rows %d != proxy input dim %d"
                % (x.shape[0], net.input_dim)
            )
        traces = trace_batch(net, x)
        layers = range(net.depth - 1, net.depth) if spec.kind == "last" \
            else range(net.depth)
        k = np.zeros((n, n))
        for l in layers:
            m_l = np.stack([t.aug_inputs[l] for t in traces])
            j_l = np.stack([t.jac_blocks[l].ravel() for t in traces])
            k += (m_l @ m_l.T) * (j_l @ j_l.T)
    k = 0.5 * (k + k.T)
    if spec.normalize:
        k = _normalize_gram(k)
    return GramMatrix(tuple(int(i) for i in idx), k)
