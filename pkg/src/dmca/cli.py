"""
Command-line front end.

    dmca synth    --seed 42 --out ds.json
    dmca features --dataset ds.json --modality vision --out X.dmat
    dmca fit      --dataset ds.json --dim 16 --seed 7 --out model.dmca
    dmca project  --model model.dmca --dataset ds.json --modality tactile --out Z.dmat
    dmca eval     --dataset ds.json --mode cross --train-modality vision --test-modality tactile --out r.json
    dmca sweep    --dataset ds.json --dims 2,4,8,16,32 --test-modality tactile --out r.json

Exit codes: 0 success, 1 domain error, 2 usage error.
"""

import argparse
import json
import os
import sys
import tempfile

from . import dataset as dsmod
from . import features, mca
from .errors import DmcaError
from .evalharness import ClassifierConfig, run_protocol

_MODE_ALIASES = {"uni": "unimodal", "unimodal": "unimodal", "cross": "crossmodal",
                 "crossmodal": "crossmodal", "shared": "shared"}


def write_atomic(path, data):
    """Write bytes via a temporary file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _size(text):
    parts = text.lower().replace("x", ",").split(",")
    try:
        vals = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or W,H, got {text!r}") from None
    if len(vals) == 1:
        vals *= 2
    if len(vals) != 2 or min(vals) < 1:
        raise argparse.ArgumentTypeError(f"expected N or W,H, got {text!r}")
    return tuple(vals)


def _int_list(text):
    try:
        vals = [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _add_extractor(p):
    g = p.add_argument_group("feature extraction")
    g.add_argument("--extractor", choices=features.EXTRACTOR_KINDS, default="flatten")
    g.add_argument("--proj-dim", type=int, default=64, help="randproj output dimension")
    g.add_argument("--proj-seed", type=int, default=0, help="randproj matrix seed")
    g.add_argument("--resize", type=_size, default=None, help="resize images first, e.g. 256")
    g.add_argument("--crop", type=_size, default=None, help="center crop after resize, e.g. 227")


def _extractor(args):
    return features.FeatureExtractor(args.extractor, args.proj_seed, args.proj_dim, args.resize, args.crop)


def _add_dmca(p, seed_default=0):
    g = p.add_argument_group("weakly-paired MCA")
    g.add_argument("--seed", type=int, default=seed_default, help="initial pairing seed")
    g.add_argument("--max-iters", type=int, default=50)
    g.add_argument("--tol", type=float, default=1e-7)
    g.add_argument("--n-init", type=int, default=1)
    g.add_argument("--init", choices=("random", "identity"), default="random")
    g.add_argument("--allow-unmatched", action="store_true")
    g.add_argument("--standardize", action="store_true")


def _dmca_config(args):
    return mca.DmcaConfig(args.max_iters, args.tol, args.seed, args.init,
                          args.allow_unmatched, args.standardize, args.n_init)


def _add_split(p, seed_default=None):
    g = p.add_argument_group("train/test split")
    g.add_argument("--split-seed", type=int, default=seed_default)
    g.add_argument("--train-fraction", type=float, default=0.9)
    g.add_argument("--cap-per-cell", type=int, default=None)


def _split(args):
    return dsmod.SplitSpec(args.train_fraction, args.split_seed, args.cap_per_cell)


def _add_classifier(p):
    g = p.add_argument_group("classifier")
    g.add_argument("--classifier", choices=("knn", "centroid"), default="knn")
    g.add_argument("-k", "--k", type=int, default=1)


def build_parser():
    parser = argparse.ArgumentParser(prog="dmca", description=__doc__.split("\n\n")[0].strip())
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic weakly-paired dataset")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--per-class", type=int, default=30)
    p.add_argument("--latent", type=int, default=8)
    p.add_argument("--vision-dim", type=int, default=32)
    p.add_argument("--tactile-dim", type=int, default=32)
    p.add_argument("--nuisance", type=int, default=24)
    p.add_argument("--noise", type=float, default=0.3)
    p.add_argument("--spread", type=float, default=0.5, help="within-class latent std")
    p.add_argument("--mix", action="store_true")
    p.add_argument("--shared-generator", action="store_true")
    p.add_argument("--truth-out", default=None, help="write ground-truth pairs as JSON")
    p.add_argument("--out", required=True)

    p = sub.add_parser("features", help="extract one modality into a feature matrix file")
    p.add_argument("--dataset", required=True)
    p.add_argument("--modality", choices=dsmod.MODALITIES, required=True)
    _add_extractor(p)
    p.add_argument("--format", choices=("dmat", "csv"), default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("fit", help="fit a weakly-paired MCA model")
    p.add_argument("--dataset", required=True)
    p.add_argument("--dim", type=int, default=30)
    _add_dmca(p)
    _add_extractor(p)
    _add_split(p)
    p.add_argument("--pairing-out", default=None, help="write the recovered pairing as JSON")
    p.add_argument("--out", required=True)

    p = sub.add_parser("project", help="map one modality into the shared space")
    p.add_argument("--model", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--dataset")
    src.add_argument("--features", help="precomputed DMAT/CSV feature matrix")
    p.add_argument("--modality", choices=dsmod.MODALITIES, required=True)
    _add_extractor(p)
    p.add_argument("--format", choices=("dmat", "csv"), default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval", help="run one evaluation protocol")
    p.add_argument("--dataset", required=True)
    p.add_argument("--mode", choices=sorted(_MODE_ALIASES), required=True)
    p.add_argument("--train-modality", choices=dsmod.MODALITIES, default="vision")
    p.add_argument("--test-modality", choices=dsmod.MODALITIES, default="tactile")
    p.add_argument("--dim", type=int, default=16, help="shared-space dimension (shared mode)")
    p.add_argument("--train-on", choices=("both", "vision", "tactile"), default="both")
    p.add_argument("--whiten", action="store_true")
    _add_dmca(p)
    _add_extractor(p)
    _add_split(p, seed_default=0)
    _add_classifier(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("sweep", help="shared-space accuracy against dimension")
    p.add_argument("--dataset", required=True)
    p.add_argument("--dims", type=_int_list, default=[2, 4, 8, 16, 32])
    p.add_argument("--test-modality", choices=dsmod.MODALITIES, default="tactile")
    p.add_argument("--train-on", choices=("both", "vision", "tactile"), default="both")
    p.add_argument("--whiten", action="store_true")
    _add_dmca(p)
    _add_extractor(p)
    _add_split(p, seed_default=0)
    _add_classifier(p)
    p.add_argument("--out", required=True)
    return parser


def _pairing_json(pairing):
    return json.dumps({"n": pairing.n, "n_prime": pairing.n_prime,
                       "pairs": [list(p) for p in sorted(pairing.as_set())]}) + "\n"


def cmd_synth(args):
    cfg = dsmod.SynthConfig(args.classes, args.per_class, args.latent, args.vision_dim,
                            args.tactile_dim, args.nuisance, args.noise, args.seed,
                            args.mix, args.shared_generator, args.spread)
    ds, truth = dsmod.synth_generate(cfg)
    write_atomic(args.out, (dsmod.dumps_manifest(ds) + "\n").encode())
    if args.truth_out:
        write_atomic(args.truth_out, (json.dumps({"pairs": [list(p) for p in truth]}) + "\n").encode())


def cmd_features(args):
    ds = dsmod.load_manifest(args.dataset)
    m = ds.feature_matrix(args.modality, _extractor(args))
    fmt = args.format or ("csv" if args.out.lower().endswith(".csv") else "dmat")
    write_atomic(args.out, features.feature_matrix_bytes(m, fmt))


def fit_dataset(ds, dim, config, extractor=None, split=None):
    """Library entry point behind ``dmca fit``."""
    if split is not None:
        ds, _ = dsmod.split_train_test(ds, split)
    hv = ds.feature_matrix("vision", extractor)
    ht = ds.feature_matrix("tactile", extractor)
    return mca.dmca_fit(hv, ht, ds.labels("vision"), ds.labels("tactile"), dim, config)


def cmd_fit(args):
    ds = dsmod.load_manifest(args.dataset)
    split = _split(args) if args.split_seed is not None else None
    proj, pairing, _ = fit_dataset(ds, args.dim, _dmca_config(args), _extractor(args), split)
    write_atomic(args.out, mca.dump_model(proj))
    if args.pairing_out:
        write_atomic(args.pairing_out, _pairing_json(pairing).encode())


def cmd_project(args):
    proj = mca.load_model(args.model)
    if args.dataset:
        m = dsmod.load_manifest(args.dataset).feature_matrix(args.modality, _extractor(args))
    else:
        m = features.load_feature_matrix(args.features)
    z = mca.project_modality(proj, m, args.modality)
    fmt = args.format or ("csv" if args.out.lower().endswith(".csv") else "dmat")
    write_atomic(args.out, features.feature_matrix_bytes(z, fmt))


def _run_eval(args, mode, dims):
    ds = dsmod.load_manifest(args.dataset)
    report = run_protocol(
        ds,
        mode,
        _split(args),
        train_modality=getattr(args, "train_modality", "vision"),
        test_modality=args.test_modality,
        dims=dims,
        extractor=_extractor(args),
        dmca=_dmca_config(args),
        classifier=ClassifierConfig(args.classifier, args.k),
        train_on=args.train_on,
        whiten=args.whiten,
    )
    write_atomic(args.out, report.to_json().encode())


def cmd_eval(args):
    _run_eval(args, _MODE_ALIASES[args.mode], [args.dim])


def cmd_sweep(args):
    _run_eval(args, "shared", args.dims)


COMMANDS = {"synth": cmd_synth, "features": cmd_features, "fit": cmd_fit,
            "project": cmd_project, "eval": cmd_eval, "sweep": cmd_sweep}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        COMMANDS[args.command](args)
    except DmcaError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


dispatch = main

if __name__ == "__main__":
    sys.exit(main())
