"""scikit-learn style estimator wrappers.

The functional core works on column-major d x N feature matrices; these
wrappers present the usual (n_samples, n_features) interface, carry
their hyperparameters through get_params/set_params so they clone and
grid-search cleanly, and expose fitted state as trailing-underscore
attributes.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .acquisition import (
    AcquisitionConfig,
    PoolState,
    select_coreset,
    select_entropy,
    select_kecor,
    select_random,
)
from .kernels import KernelSpec, canonical_kind
from .proxy import ProxyNetwork, init_proxy, predict, train_mse


def _features_t(X):
    """(n_samples, n_features) -> column-major (d, N)."""
    X = check_array(X, dtype=np.float64)
    return np.asfortranarray(X.T)


class ProxyRegressor(RegressorMixin, BaseEstimator):
    """Small fully connected network trained by full-batch gradient descent.

    Hidden layers are width-rescaled with a beta-weighted bias so the
    network's gradient features are well scaled; its snapshot feeds the
    gradient kernels.

    Parameters
    ----------
    hidden_widths: tuple of int
        Hidden layer widths; the output layer width comes from y.
    beta: float
        Bias weight in each layer's affine map.
    activation: str
        'relu' or 'identity', applied to all layers but the last.
    epochs, lr: training schedule for full-batch gradient descent.
    seed: int
        Seed for the standard normal weight initialization.
    """

    def __init__(self, hidden_widths=(256, 256), beta=0.1, activation="relu",
                 epochs=10, lr=0.05, seed=0):
        self.hidden_widths = hidden_widths
        self.beta = beta
        self.activation = activation
        self.epochs = epochs
        self.lr = lr
        self.seed = seed

    def fit(self, X, y):
        features = _features_t(X)
        y = np.asarray(y, dtype=np.float64)
        self._y_was_1d = y.ndim == 1
        targets = np.asfortranarray(y.reshape(len(y), -1).T)
        self.n_features_in_ = features.shape[0]
        self.network_ = init_proxy(features.shape[0], self.hidden_widths,
                                   targets.shape[0], beta=self.beta,
                                   activation=self.activation, seed=self.seed)
        self.loss_curve_ = train_mse(self.network_, features, targets,
                                     epochs=self.epochs, lr=self.lr)
        return self

    def predict(self, X):
        check_is_fitted(self, "network_")
        out = predict(self.network_, _features_t(X)).T
        return out[:, 0] if self._y_was_1d else out

    def snapshot(self):
        """Frozen copy of the fitted network, for gradient kernels."""
        check_is_fitted(self, "network_")
        return self.network_.snapshot()


class _BaseSelector(TransformerMixin, BaseEstimator):
    """Shared selector plumbing: pool construction and transform."""

    def _pool(self, n, labeled):
        labeled = () if labeled is None else tuple(int(i) for i in labeled)
        unlabeled = tuple(sorted(set(range(n)) - set(labeled)))
        return PoolState(labeled, unlabeled)

    def _finish(self, result, n):
        self.n_features_in_ = self._d
        self.chosen_ = result.chosen
        self.gains_ = result.gains
        self.objective_ = result.objective
        self.entropy_term_ = result.entropy_term
        return self

    def transform(self, X):
        check_is_fitted(self, "chosen_")
        X = check_array(X, dtype=np.float64)
        return X[list(self.chosen_)]


class KernelCodingRateSelector(_BaseSelector):
    """Greedy batch selection maximizing kernel coding rate plus entropy.

    Parameters
    ----------
    batch_size: int
        Samples to pick per fit call.
    kernel: str
        'linear', 'rbf', 'last' or 'ntk'.
    rbf_sigma: float
        RBF width (rbf kernel only).
    normalize: bool
        Rescale the Gram matrix to unit diagonal.
    sigma_ent: float
        Weight of the mean-entropy term; logits required when positive.
    epsilon: float
        Distortion parameter of the coding-rate coefficient.
    proxy: ProxyRegressor or ProxyNetwork, optional
        Source of gradient features for the 'ntk'/'last' kinds.
    seed: int
        Recorded for interface parity; selection itself is deterministic.
    """

    def __init__(self, batch_size=10, kernel="linear", rbf_sigma=1.0,
                 normalize=False, sigma_ent=0.1, epsilon=0.5, proxy=None,
                 seed=0):
        self.batch_size = batch_size
        self.kernel = kernel
        self.rbf_sigma = rbf_sigma
        self.normalize = normalize
        self.sigma_ent = sigma_ent
        self.epsilon = epsilon
        self.proxy = proxy
        self.seed = seed

    def _spec(self):
        kind = canonical_kind(self.kernel)
        proxy = None
        if kind in ("ntk", "last"):
            if self.proxy is None:
                raise ValueError("kernel %r needs the proxy parameter" % kind)
            if isinstance(self.proxy, ProxyNetwork):
                proxy = self.proxy
            elif hasattr(self.proxy, "snapshot"):
                proxy = self.proxy.snapshot()
            else:
                raise TypeError("proxy must be a ProxyNetwork or expose "
                                "snapshot()")
        return KernelSpec(kind, rbf_sigma=self.rbf_sigma,
                          normalize=self.normalize, proxy=proxy)

    def fit(self, X, y=None, logits=None, labeled=None):
        features = _features_t(X)
        self._d = features.shape[0]
        if logits is not None:
            logits = check_array(logits, dtype=np.float64).T
        cfg = AcquisitionConfig(batch_size=self.batch_size,
                                kernel=self._spec(),
                                sigma_ent=self.sigma_ent,
                                epsilon=self.epsilon, seed=self.seed)
        pool = self._pool(features.shape[1], labeled)
        result = select_kecor(features, logits, pool, cfg)
        return self._finish(result, features.shape[1])


class RandomSelector(_BaseSelector):
    """Uniform batch selection without replacement, seeded."""

    def __init__(self, batch_size=10, seed=0):
        self.batch_size = batch_size
        self.seed = seed

    def fit(self, X, y=None, logits=None, labeled=None):
        features = _features_t(X)
        self._d = features.shape[0]
        pool = self._pool(features.shape[1], labeled)
        result = select_random(pool, self.batch_size, seed=self.seed)
        return self._finish(result, features.shape[1])


class EntropySelector(_BaseSelector):
    """Top-batch_size samples by softmax entropy of their logits."""

    def __init__(self, batch_size=10):
        self.batch_size = batch_size

    def fit(self, X, y=None, logits=None, labeled=None):
        if logits is None:
            raise ValueError("EntropySelector requires logits")
        features = _features_t(X)
        self._d = features.shape[0]
        logits = check_array(logits, dtype=np.float64).T
        pool = self._pool(features.shape[1], labeled)
        result = select_entropy(logits, pool, self.batch_size)
        return self._finish(result, features.shape[1])


class CoresetSelector(_BaseSelector):
    """Farthest-first traversal against labeled plus picked centers."""

    def __init__(self, batch_size=10):
        self.batch_size = batch_size

    def fit(self, X, y=None, logits=None, labeled=None):
        features = _features_t(X)
        self._d = features.shape[0]
        pool = self._pool(features.shape[1], labeled)
        result = select_coreset(features, pool, self.batch_size)
        return self._finish(result, features.shape[1])
