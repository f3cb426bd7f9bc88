"""Active-learning loop on synthetic regression/classification tasks.

A task draws a Gaussian-mixture pool with geometrically skewed class
weights, regression targets from a fixed random two-layer oracle net
plus noise, per-sample annotation costs (box counts), and a disjoint
test split.  The loop alternates select / move / cold-start retrain and
reports budget-versus-quality rows; with fixed seeds two runs emit
byte-identical CSV reports.
"""

from __future__ import annotations

import io
import time
from dataclasses import dataclass

import numpy as np

from .acquisition import (
    STRATEGIES,
    AcquisitionConfig,
    PoolState,
    select_coreset,
    select_entropy,
    select_kecor,
    select_random,
)
from .errors import ConfigInvalid
from .kernels import KERNEL_KINDS, KernelSpec
from .proxy import init_proxy, predict, train_mse

REPORT_HEADER = "round,labeled,boxes,mse,accuracy,seconds"


@dataclass(frozen=True)
class SyntheticTask:
    """Materialized pool, targets, costs, and test split."""

    seed: int
    feature_dim: int
    pool_size: int
    classes: int
    target_dim: int
    features: np.ndarray
    targets: np.ndarray
    labels: np.ndarray
    box_counts: np.ndarray
    test_features: np.ndarray
    test_targets: np.ndarray
    test_labels: np.ndarray


def make_task(seed, pool_size=400, feature_dim=16, classes=4, target_dim=4,
              separation=3.0, noise=0.05, box_rate=5.0, test_fraction=0.25,
              oracle_width=32):
    """Generate a synthetic task, fully determined by the seed.

    Class weights fall off geometrically (w_i proportional to 2^-i), so
    later classes are rare; the test split consists of extra draws from
    the same mixture and never overlaps the pool.
    """
    if pool_size < 2 or classes < 2:
        raise ConfigInvalid("pool_size must be >= 2 and classes >= 2")
    rng = np.random.default_rng(seed)
    weights = 0.5 ** np.arange(classes)
    weights /= weights.sum()
    means = rng.standard_normal((classes, feature_dim)) * separation
    test_size = int(round(pool_size * test_fraction))
    total = pool_size + test_size
    labels = rng.choice(classes, size=total, p=weights)
    features = means[labels].T + rng.standard_normal((feature_dim, total))
    oracle = init_proxy(feature_dim, [oracle_width], target_dim, beta=1.0,
                        activation="relu", seed=int(rng.integers(2 ** 31)))
    targets = predict(oracle, features) \
        + noise * rng.standard_normal((target_dim, total))
    box_counts = 1 + rng.poisson(box_rate, size=pool_size)
    return SyntheticTask(
        seed=int(seed), feature_dim=feature_dim, pool_size=pool_size,
        classes=classes, target_dim=target_dim,
        features=np.asfortranarray(features[:, :pool_size]),
        targets=np.asfortranarray(targets[:, :pool_size]),
        labels=labels[:pool_size],
        box_counts=box_counts,
        test_features=np.asfortranarray(features[:, pool_size:]),
        test_targets=np.asfortranarray(targets[:, pool_size:]),
        test_labels=labels[pool_size:],
    )


@dataclass(frozen=True)
class RoundReport:
    """One budget-versus-quality row."""

    round: int
    labeled: int
    boxes: int
    mse: float
    accuracy: float
    seconds: float


@dataclass(frozen=True)
class LoopConfig:
    """Loop sizes, strategy, and training budgets.

    Gradient kernels bind to each round's frozen proxy snapshot, so the
    kernel is stored as plain fields and the per-round acquisition
    config is materialized inside the loop.
    """

    m: int
    n: int
    rounds: int
    budget: int = None
    strategy: str = "kecor"
    kernel_kind: str = "ntk"
    rbf_sigma: float = 1.0
    normalize: bool = False
    sigma_ent: float = 0.1
    epsilon: float = 0.5
    proxy_widths: tuple = (256, 256)
    beta: float = 0.1
    activation: str = "relu"
    proxy_epochs: int = 10
    proxy_lr: float = 0.05
    classifier_epochs: int = 200
    classifier_lr: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.m < 1 or self.n < 1 or self.rounds < 0:
            raise ConfigInvalid("m, n must be >= 1 and rounds >= 0")
        if self.strategy not in STRATEGIES:
            raise ConfigInvalid("unknown strategy %r" % (self.strategy,))
        if self.kernel_kind not in KERNEL_KINDS:
            raise ConfigInvalid("unknown kernel kind %r" % (self.kernel_kind,))
        if self.budget is None:
            object.__setattr__(self, "budget", self.rounds * self.n)
        if self.budget < 0:
            raise ConfigInvalid("budget must be nonnegative")


class SoftmaxClassifier:
    """Linear softmax head trained by full-batch gradient descent.

    Zero-initialized, so fitting is deterministic without a seed.
    """

    def __init__(self, feature_dim, classes):
        self.weight = np.zeros((classes, feature_dim))
        self.bias = np.zeros(classes)

    def logits(self, x):
        return self.weight @ x + self.bias[:, None]

    def fit(self, x, labels, epochs, lr):
        n = x.shape[1]
        onehot = np.zeros((self.bias.size, n))
        onehot[labels, np.arange(n)] = 1.0
        for _ in range(int(epochs)):
            z = self.logits(x)
            z -= z.max(axis=0, keepdims=True)
            p = np.exp(z)
            p /= p.sum(axis=0, keepdims=True)
            g = (p - onehot) / n
            self.weight -= lr * (g @ x.T)
            self.bias -= lr * g.sum(axis=1)
        return self

    def predict(self, x):
        return np.argmax(self.logits(x), axis=0)


def evaluate(proxy, classifier, task):
    """Test MSE of the proxy and argmax accuracy of the classifier."""
    resid = predict(proxy, task.test_features) - task.test_targets
    mse = float(np.mean(resid * resid))
    acc = float(np.mean(classifier.predict(task.test_features)
                        == task.test_labels))
    return mse, acc


def _train_models(task, cfg, labeled, round_index):
    # cold start every round: fresh init keyed by (task, loop, round)
    proxy = init_proxy(task.feature_dim, cfg.proxy_widths, task.target_dim,
                       beta=cfg.beta, activation=cfg.activation,
                       seed=(task.seed, cfg.seed, round_index))
    lab = np.asarray(labeled, dtype=np.intp)
    train_mse(proxy, task.features[:, lab], task.targets[:, lab],
              epochs=cfg.proxy_epochs, lr=cfg.proxy_lr)
    clf = SoftmaxClassifier(task.feature_dim, task.classes)
    clf.fit(task.features[:, lab], task.labels[lab],
            epochs=cfg.classifier_epochs, lr=cfg.classifier_lr)
    return proxy, clf


def _select(task, cfg, proxy, clf, pool, batch, round_index):
    if cfg.strategy == "kecor":
        needs_proxy = cfg.kernel_kind in ("ntk", "last")
        spec = KernelSpec(cfg.kernel_kind, rbf_sigma=cfg.rbf_sigma,
                          normalize=cfg.normalize,
                          proxy=proxy.snapshot() if needs_proxy else None)
        acq = AcquisitionConfig(batch_size=batch, kernel=spec,
                                sigma_ent=cfg.sigma_ent, epsilon=cfg.epsilon,
                                seed=cfg.seed)
        return select_kecor(task.features, clf.logits(task.features), pool, acq)
    if cfg.strategy == "random":
        return select_random(pool, batch,
                             seed=(task.seed, cfg.seed, round_index))
    if cfg.strategy == "entropy":
        return select_entropy(clf.logits(task.features), pool, batch)
    return select_coreset(task.features, pool, batch)


def run_loop(task, cfg, return_state=False):
    """Pretrain, then R rounds of select / move / retrain / evaluate.

    Returns rounds + 1 reports; index 0 is the pretrained baseline.
    With return_state the final labeled index list is returned as a
    second value so audits can recount costs independently.  Fully
    deterministic per (task.seed, cfg.seed); the wall-clock seconds
    field is the only nondeterministic value and is zeroed by the CSV
    writer unless timing output is requested.
    """
    if cfg.m + cfg.rounds * cfg.n > task.pool_size:
        raise ConfigInvalid(
            "m + rounds*n = %d exceeds pool size %d"
            % (cfg.m + cfg.rounds * cfg.n, task.pool_size)
        )
    init_rng = np.random.default_rng((task.seed, cfg.seed))
    labeled = sorted(int(i) for i in
                     init_rng.choice(task.pool_size, size=cfg.m, replace=False))
    unlabeled = sorted(set(range(task.pool_size)) - set(labeled))

    proxy, clf = _train_models(task, cfg, labeled, 0)
    mse, acc = evaluate(proxy, clf, task)
    reports = [RoundReport(0, len(labeled), 0, mse, acc, 0.0)]

    spent_boxes = 0
    selected_total = 0
    for r in range(1, cfg.rounds + 1):
        batch = min(cfg.n, cfg.budget - selected_total)
        seconds = 0.0
        if batch > 0:
            pool = PoolState(tuple(labeled), tuple(unlabeled))
            start = time.perf_counter()
            result = _select(task, cfg, proxy, clf, pool, batch, r)
            seconds = time.perf_counter() - start
            chosen = set(result.chosen)
            labeled = sorted(set(labeled) | chosen)
            unlabeled = sorted(set(unlabeled) - chosen)
            spent_boxes += int(task.box_counts[list(chosen)].sum())
            selected_total += len(chosen)
        proxy, clf = _train_models(task, cfg, labeled, r)
        mse, acc = evaluate(proxy, clf, task)
        reports.append(RoundReport(r, len(labeled), spent_boxes, mse, acc,
                                   seconds))
    if return_state:
        return reports, labeled
    return reports


def write_report(reports, fh, timing=False):
    """CSV rows, floats at 9 significant digits.

    Wall-clock seconds break byte-reproducibility, so they are written
    as 0 unless timing is requested.
    """
    fh.write(REPORT_HEADER + "\n")
    for rep in reports:
        seconds = rep.seconds if timing else 0.0
        fh.write("%d,%d,%d,%.9g,%.9g,%.9g\n"
                 % (rep.round, rep.labeled, rep.boxes, rep.mse, rep.accuracy,
                    seconds))


def report_csv(reports, timing=False):
    """The report as one CSV string."""
    buf = io.StringIO()
    write_report(reports, buf, timing=timing)
    return buf.getvalue()
