"""Command-line interface.

Subcommands cover the full external surface: batch selection, the
simulation harness, Gram-matrix and coding-rate evaluation, proxy
training, default-config inspection, and CSV import.  stdout carries
only machine-parseable results (JSON lines, CSV, or a bare number);
logging goes to stderr.  Exit codes: 0 success, 2 configuration error,
3 data or numerical error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import __version__
from .acquisition import (
    AcquisitionConfig,
    PoolState,
    select_coreset,
    select_entropy,
    select_kecor,
    select_random,
)
from .coding_rate import CodingRateParams, kernel_coding_rate
from .config import load_config, resolve_config
from .errors import (
    ConfigInvalid,
    DimensionMismatch,
    KecorError,
    TensorFileError,
)
from .kernels import KernelSpec, canonical_kind, gram
from .proxy import init_proxy, train_mse
from .simulate import LoopConfig, make_task, run_loop, write_report
from .tensorfile import (
    load_checkpoint,
    read_tensor,
    save_checkpoint,
    write_tensor,
)
from .validation import check_indices, check_matrix

log = logging.getLogger("kecor")


def _require_path(cfg, key):
    path = cfg["paths"].get(key)
    if not path:
        raise ConfigInvalid("paths.%s is required for this command" % key)
    return path


def _read_matrix(cfg, key):
    path = _require_path(cfg, key)
    try:
        arr = read_tensor(path)
    except OSError as err:
        raise TensorFileError("cannot read %s: %s" % (path, err)) from err
    if arr.ndim != 2:
        raise DimensionMismatch(
            "paths.%s must hold a rank-2 tensor, got rank %d" % (key, arr.ndim)
        )
    try:
        return check_matrix(arr, key)
    except ValueError as err:
        raise KecorError(str(err)) from err


def _read_labeled(cfg, n):
    """Optional text file of 0-based indices, one per line."""
    path = cfg["paths"].get("labeled_indices")
    if not path:
        return ()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise TensorFileError("cannot read %s: %s" % (path, err)) from err
    idx = []
    for lineno, line in enumerate(text.splitlines(), 1):
        word = line.strip()
        if not word or word.startswith("#"):
            continue
        try:
            idx.append(int(word))
        except ValueError:
            raise KecorError(
                "%s line %d: %r is not an index" % (path, lineno, word)
            ) from None
    try:
        return tuple(int(i) for i in check_indices(idx, n, "labeled indices"))
    except ValueError as err:
        raise KecorError(str(err)) from err


def _parse_indices(text, n):
    try:
        idx = [int(w) for w in text.split(",") if w.strip()]
    except ValueError as err:
        raise ConfigInvalid("--indices must be comma-separated integers") from err
    if not idx:
        raise ConfigInvalid("--indices needs at least one index")
    try:
        return [int(i) for i in check_indices(idx, n, "--indices")]
    except ValueError as err:
        raise ConfigInvalid(str(err)) from err


def _kernel_spec(cfg):
    kcfg = cfg["kernel"]
    kind = canonical_kind(kcfg["kind"])
    proxy = None
    if kind in ("ntk", "last"):
        path = _require_path(cfg, "proxy_checkpoint")
        try:
            proxy = load_checkpoint(path)
        except OSError as err:
            raise TensorFileError("cannot read %s: %s" % (path, err)) from err
    return KernelSpec(kind, rbf_sigma=kcfg["rbf_sigma"],
                      normalize=kcfg["normalize"], proxy=proxy)


def _emit(payload):
    print(json.dumps(payload, sort_keys=True))


def _cmd_select(args):
    cfg = load_config(args.config, profile=args.profile)
    features = _read_matrix(cfg, "features")
    n_pool = features.shape[1]
    labeled = _read_labeled(cfg, n_pool)
    pool = PoolState(labeled, tuple(sorted(set(range(n_pool)) - set(labeled))))
    log.info("pool of %d samples, %d labeled", n_pool, len(labeled))

    logits = None
    if cfg["paths"].get("logits"):
        logits = _read_matrix(cfg, "logits")
        if logits.shape[1] != n_pool:
            raise DimensionMismatch(
                "logits cover %d samples but features hold %d"
                % (logits.shape[1], n_pool)
            )

    strategy = cfg["strategy"]
    batch = cfg["batch_size"]
    if strategy == "kecor":
        if logits is None and cfg["sigma_ent"] > 0.0:
            raise ConfigInvalid("paths.logits is required when sigma_ent > 0")
        acq = AcquisitionConfig(batch_size=batch, kernel=_kernel_spec(cfg),
                                sigma_ent=cfg["sigma_ent"],
                                epsilon=cfg["epsilon"], seed=cfg["seed"])
        result = select_kecor(features, logits, pool, acq)
    elif strategy == "random":
        result = select_random(pool, batch, seed=cfg["seed"])
    elif strategy == "entropy":
        if logits is None:
            raise ConfigInvalid("paths.logits is required for entropy")
        result = select_entropy(logits, pool, batch)
    else:
        result = select_coreset(features, pool, batch)

    out = _require_path(cfg, "output")
    with open(out, "w", encoding="utf-8") as fh:
        for i in result.chosen:
            fh.write("%d\n" % i)
    log.info("wrote %d indices to %s", len(result.chosen), out)
    _emit({
        "objective": result.objective,
        "entropy_term": result.entropy_term,
        "gains": [float(g) for g in result.gains],
    })
    return 0


def _cmd_simulate(args):
    cfg = load_config(args.config, profile=args.profile)
    sim = cfg["simulate"]
    task = make_task(
        cfg["seed"],
        pool_size=sim["pool_size"], feature_dim=sim["feature_dim"],
        classes=sim["classes"], target_dim=sim["target_dim"],
        separation=sim["separation"], noise=sim["noise"],
        box_rate=sim["box_rate"], test_fraction=sim["test_fraction"],
        oracle_width=sim["oracle_width"],
    )
    loop = LoopConfig(
        m=sim["initial_labeled"], n=cfg["batch_size"], rounds=sim["rounds"],
        budget=sim.get("budget"), strategy=cfg["strategy"],
        kernel_kind=canonical_kind(cfg["kernel"]["kind"]),
        rbf_sigma=cfg["kernel"]["rbf_sigma"],
        normalize=cfg["kernel"]["normalize"],
        sigma_ent=cfg["sigma_ent"], epsilon=cfg["epsilon"],
        proxy_widths=tuple(cfg["proxy"]["layers"]), beta=cfg["proxy"]["beta"],
        activation=cfg["proxy"]["activation"],
        proxy_epochs=cfg["proxy"]["epochs"], proxy_lr=cfg["proxy"]["lr"],
        classifier_epochs=sim["classifier_epochs"],
        classifier_lr=sim["classifier_lr"], seed=cfg["seed"],
    )
    reports = run_loop(task, loop)
    report_path = cfg["paths"].get("report")
    if report_path:
        with open(report_path, "w", encoding="utf-8") as fh:
            write_report(reports, fh, timing=cfg["timing"])
        _emit({
            "report": report_path,
            "rounds": len(reports) - 1,
            "final_mse": reports[-1].mse,
            "final_accuracy": reports[-1].accuracy,
        })
    else:
        write_report(reports, sys.stdout, timing=cfg["timing"])
    return 0


def _cmd_kernel(args):
    cfg = load_config(args.config, profile=args.profile)
    features = _read_matrix(cfg, "features")
    indices = _parse_indices(args.indices, features.shape[1])
    result = gram(_kernel_spec(cfg), features, indices)
    out = _require_path(cfg, "output")
    write_tensor(out, result.K)
    _emit({"path": out, "n": len(indices)})
    return 0


def _cmd_coding_rate(args):
    cfg = load_config(args.config, profile=args.profile)
    features = _read_matrix(cfg, "features")
    indices = _parse_indices(args.indices, features.shape[1])
    result = gram(_kernel_spec(cfg), features, indices)
    params = CodingRateParams(epsilon=cfg["epsilon"],
                              feature_dim=features.shape[0],
                              coeff_n=len(indices))
    print("%.12g" % kernel_coding_rate(result, params))
    return 0


def _cmd_proxy_train(args):
    cfg = load_config(args.config, profile=args.profile)
    features = _read_matrix(cfg, "features")
    targets = _read_matrix(cfg, "targets")
    if targets.shape[1] != features.shape[1]:
        raise DimensionMismatch(
            "targets cover %d samples but features hold %d"
            % (targets.shape[1], features.shape[1])
        )
    labeled = _read_labeled(cfg, features.shape[1])
    if labeled:
        cols = np.asarray(labeled, dtype=np.intp)
        features = features[:, cols]
        targets = targets[:, cols]
    pcfg = cfg["proxy"]
    net = init_proxy(features.shape[0], pcfg["layers"], targets.shape[0],
                     beta=pcfg["beta"], activation=pcfg["activation"],
                     seed=cfg["seed"])
    curve = train_mse(net, features, targets,
                      epochs=pcfg["epochs"], lr=pcfg["lr"])
    out = _require_path(cfg, "proxy_checkpoint")
    save_checkpoint(out, net)
    _emit({
        "checkpoint": out,
        "epochs": len(curve),
        "final_loss": curve[-1] if curve else None,
        "samples": int(features.shape[1]),
    })
    return 0


def _cmd_defaults(args):
    if args.config:
        cfg = load_config(args.config, profile=args.profile)
    else:
        cfg = resolve_config(profile=args.profile)
    print(json.dumps(cfg, indent=2, sort_keys=True))
    return 0


def _cmd_from_csv(args):
    try:
        data = np.loadtxt(args.input, delimiter=",", ndmin=2)
    except OSError as err:
        raise TensorFileError("cannot read %s: %s" % (args.input, err)) from err
    except ValueError as err:
        raise KecorError("cannot parse %s: %s" % (args.input, err)) from err
    if args.transpose:
        data = data.T
    write_tensor(args.output, data)
    _emit({"path": args.output, "shape": list(data.shape)})
    return 0


def _add_config_options(sub, required=True):
    sub.add_argument("--config", required=required,
                     help="path to a JSON run configuration")
    sub.add_argument("--profile", default="generic",
                     help="named hyperparameter profile (default: generic)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="kecor",
        description="Batch selection by entropy-regularized coding-rate "
                    "maximization.",
    )
    parser.add_argument("--verbose", "-v", action="store_true",
                        help="log progress to stderr")
    parser.add_argument("--version", action="version",
                        version="%(prog)s " + __version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select", help="pick a batch from the unlabeled pool")
    _add_config_options(p)
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("simulate", help="run the synthetic labeling loop")
    _add_config_options(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("kernel", help="write the Gram matrix of a subset")
    _add_config_options(p)
    p.add_argument("--indices", required=True,
                   help="comma-separated 0-based sample indices")
    p.set_defaults(func=_cmd_kernel)

    p = sub.add_parser("coding-rate",
                       help="print the coding rate of a subset")
    _add_config_options(p)
    p.add_argument("--indices", required=True,
                   help="comma-separated 0-based sample indices")
    p.set_defaults(func=_cmd_coding_rate)

    p = sub.add_parser("proxy-train",
                       help="train the proxy network and checkpoint it")
    _add_config_options(p)
    p.set_defaults(func=_cmd_proxy_train)

    p = sub.add_parser("defaults", help="print the resolved configuration")
    _add_config_options(p, required=False)
    p.set_defaults(func=_cmd_defaults)

    p = sub.add_parser("from-csv",
                       help="convert a numeric CSV file to the tensor format")
    p.add_argument("input", help="CSV file, one row per line")
    p.add_argument("output", help="destination tensor file")
    p.add_argument("--transpose", action="store_true",
                   help="store the transposed matrix")
    p.set_defaults(func=_cmd_from_csv)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(message)s",
                        level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except KecorError as err:
        print("%s: %s" % (err.code, err), file=sys.stderr)
        return err.exit_code


if __name__ == "__main__":
    sys.exit(main())
