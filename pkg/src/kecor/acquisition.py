"""Batch selection strategies over an unlabeled pool.

The headline selector greedily grows a batch that maximizes the kernel
coding rate plus an entropy regularizer; each greedy step scores every
remaining candidate through one batched triangular solve against the
current Cholesky factor, so a round costs one Gram assembly and O(n)
factor extensions.  Random, max-entropy and farthest-first baselines
share the same result record.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .coding_rate import (
    CodingRateParams,
    empty_factor,
    grow_factor,
    kernel_coding_rate,
    marginal_gain_batch,
)
from .errors import DimensionMismatch, InsufficientPool
from .kernels import KernelSpec, gram
from .validation import check_matrix

STRATEGIES = ("kecor", "random", "entropy", "coreset")


@dataclass(frozen=True)
class AcquisitionConfig:
    """Knobs for one selection round.

    batch_size is the n in the coding-rate coefficient n/(eps^2 d); it is
    frozen for the whole round so step gains stay comparable.
    """

    batch_size: int
    kernel: KernelSpec
    sigma_ent: float = 0.1
    epsilon: float = 0.5
    tie_break: str = "lowest-index"
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.sigma_ent < 0.0:
            raise ValueError("sigma_ent must be nonnegative")
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        if self.tie_break != "lowest-index":
            raise ValueError("unsupported tie_break %r" % (self.tie_break,))


@dataclass(frozen=True)
class PoolState:
    """Disjoint labeled/unlabeled index sets plus annotation accounting."""

    labeled: tuple
    unlabeled: tuple
    annotation_cost: np.ndarray = None
    spent_budget: float = 0.0

    def __post_init__(self):
        lab = tuple(int(i) for i in self.labeled)
        unl = tuple(int(i) for i in self.unlabeled)
        if set(lab) & set(unl):
            raise ValueError("labeled and unlabeled sets overlap")
        if len(set(lab)) != len(lab) or len(set(unl)) != len(unl):
            raise ValueError("pool index sets contain duplicates")
        object.__setattr__(self, "labeled", lab)
        object.__setattr__(self, "unlabeled", unl)


@dataclass(frozen=True)
class SelectionResult:
    """Picked indices in pick order plus per-step score increments.

    objective and entropy_term are filled by the coding-rate selector
    only; baselines report None.  Baseline gains hold strategy-specific
    diagnostics: per-pick entropy for the entropy strategy, nearest
    center distance at pick time for coreset (0.0 for a first pick made
    with no centers), empty for random.
    """

    chosen: tuple
    gains: tuple
    objective: float = None
    entropy_term: float = None


def _entropy_of(column):
    # log-sum-exp with the dot product taken on the raw logits; this
    # grouping returns exactly 0.0 for strongly one-hot columns
    m = float(np.max(column))
    shifted = np.exp(column - m)
    lse = m + np.log(float(np.sum(shifted)))
    p = shifted / float(np.sum(shifted))
    return max(lse - float(p @ column), 0.0)


def mean_entropy(logits, idx):
    """Softmax entropy of one sample's logits.

    logits may be C x N (one vector per sample) or C x V x N (V vectors
    per sample, e.g. several boxes); the multi-vector form averages the
    per-vector entropies.
    """
    logits = np.asarray(logits, dtype=np.float64)
    if not np.all(np.isfinite(logits)):
        raise ValueError("logits must be finite")
    if logits.ndim == 2:
        return _entropy_of(logits[:, idx])
    if logits.ndim == 3:
        cols = logits[:, :, idx]
        return float(np.mean([_entropy_of(cols[:, v])
                              for v in range(cols.shape[1])]))
    raise ValueError("logits must be 2-D or 3-D, got %d-D" % logits.ndim)


def _sorted_pool(pool, n):
    unl = np.array(sorted(pool.unlabeled), dtype=np.intp)
    if n > unl.size:
        raise InsufficientPool(
            "insufficient pool: requested %d samples but only %d are unlabeled"
            % (n, unl.size)
        )
    if n < 1:
        raise ValueError("batch size must be at least 1")
    return unl


def select_kecor(features, logits, pool, cfg):
    """Greedy entropy-regularized coding-rate maximization.

    Each step adds the unlabeled sample with the largest
    marginal coding-rate gain plus sigma_ent * entropy / n, ties broken
    by lowest pool index.  The reported objective is recomputed from
    scratch on the chosen set, so the per-step gains telescope to it.
    """
    features = check_matrix(features, "features")
    if logits is not None:
        width = np.asarray(logits).shape[-1]
        if width != features.shape[1]:
            raise DimensionMismatch(
                "logits cover %d samples but features hold %d"
                % (width, features.shape[1])
            )
    unl = _sorted_pool(pool, cfg.batch_size)
    n = cfg.batch_size
    if logits is None:
        if cfg.sigma_ent > 0.0:
            raise ValueError("sigma_ent > 0 requires logits")
        entropies = np.zeros(unl.size)
    else:
        entropies = np.array([mean_entropy(logits, int(i)) for i in unl])
    params = CodingRateParams(epsilon=cfg.epsilon,
                              feature_dim=features.shape[0], coeff_n=n)
    c = params.coefficient
    k = gram(cfg.kernel, features, unl).K
    credit = cfg.sigma_ent * entropies / n

    active = np.ones(unl.size, dtype=bool)
    picked = []
    step_gains = []
    factor = empty_factor()
    for _ in range(n):
        cand = np.flatnonzero(active)
        gains = marginal_gain_batch(factor, k[np.ix_(picked, cand)],
                                    k[cand, cand], c)
        scores = gains + credit[cand]
        best_pos = int(np.argmax(scores))  # first max = lowest index
        best = int(cand[best_pos])
        factor = grow_factor(factor, k[picked, best], k[best, best], c)
        picked.append(best)
        active[best] = False
        step_gains.append(float(scores[best_pos]))

    ent_term = float(cfg.sigma_ent * np.mean(entropies[picked]))
    objective = kernel_coding_rate(k[np.ix_(picked, picked)], params) + ent_term
    return SelectionResult(
        chosen=tuple(int(unl[p]) for p in picked),
        gains=tuple(step_gains),
        objective=float(objective),
        entropy_term=ent_term,
    )


def select_random(pool, n, seed):
    """Uniform sample without replacement, deterministic per seed."""
    unl = _sorted_pool(pool, n)
    rng = np.random.default_rng(seed)
    chosen = rng.choice(unl, size=n, replace=False)
    return SelectionResult(chosen=tuple(int(i) for i in chosen), gains=())


def select_entropy(logits, pool, n):
    """Top-n samples by softmax entropy, ties broken by lowest index."""
    unl = _sorted_pool(pool, n)
    ent = np.array([mean_entropy(logits, int(i)) for i in unl])
    order = np.argsort(-ent, kind="stable")[:n]
    return SelectionResult(
        chosen=tuple(int(unl[p]) for p in order),
        gains=tuple(float(ent[p]) for p in order),
    )


def select_coreset(features, pool, n, seed=0):
    """Farthest-first traversal against labeled plus already-picked points.

    Each step adds the unlabeled point with the largest Euclidean
    distance to its nearest center.  With no labeled centers the first
    pick is the lowest unlabeled index; the seed parameter is reserved
    and currently unused.
    """
    del seed
    features = check_matrix(features, "features")
    unl = _sorted_pool(pool, n)
    pts = features[:, unl].T
    if pool.labeled:
        centers = features[:, np.array(sorted(pool.labeled), dtype=np.intp)].T
        dist = cdist(pts, centers).min(axis=1)
        no_centers = False
    else:
        dist = np.full(unl.size, np.inf)
        no_centers = True
    active = np.ones(unl.size, dtype=bool)
    picked = []
    gains = []
    for step in range(n):
        cand = np.flatnonzero(active)
        best = cand[int(np.argmax(dist[cand]))]
        gains.append(0.0 if step == 0 and no_centers else float(dist[best]))
        picked.append(int(best))
        active[best] = False
        dist = np.minimum(dist, cdist(pts, pts[best:best + 1]).ravel())
    return SelectionResult(
        chosen=tuple(int(unl[p]) for p in picked),
        gains=tuple(gains),
    )
