import argparse
import json
import logging
import sys

from .diffusion import generate_pruned_tree
from .diffusion import word_to_str
from .exceptions import Error
from .experiments import run_sourceloc_experiment
from .experiments import run_wireless_experiment
from .input import load_multigraph
from .mgnn import TrainConfig
from .mgnn import build_model
from .mgnn import evaluate
from .mgnn import load_model
from .mgnn import save_model
from .mgnn import train
from .mgnn import write_trace
from .pipelines import Pipeline
from .pipelines import read_config
from .pipelines.config import parse_assignment
from .spectral import joint_block_diagonalize

logger = logging.getLogger(__name__)

TRAIN_DEFAULTS = {
    "variant": "mgnn",
    "widths": [16],
    "depth": 2,
    "epsilon": float("inf"),
    "epochs": 10,
    "batch_size": 32,
    "lr": 1e-3,
    "seed": 0,
}


def _params(args, defaults=None):
    params = dict(defaults or {})
    if args.config:
        params.update(read_config(args.config))
    for item in args.set or []:
        key, value = parse_assignment(item)
        params[key] = value
    for key in ("seed", "output", "dataset_out"):
        value = getattr(args, key, None)
        if value is not None:
            params[key] = value
    return params


def cmd_tree(args):
    mg = load_multigraph(args.multigraph, args.normalization)
    tree = generate_pruned_tree(mg, args.epsilon, args.depth)
    # one word per line, then a JSON summary line
    lines = [word_to_str(w) for w in tree.words]
    summary = {
        "m": tree.m,
        "depth": tree.depth,
        "epsilon": str(tree.epsilon),
        "pruned": sorted(list(p) for p in tree.pruned),
        "level_counts": tree.level_counts(),
    }
    lines.append(json.dumps(summary))
    _write("\n".join(lines), args.output)


def cmd_spectral(args):
    mg = load_multigraph(args.multigraph, args.normalization)
    jbd = joint_block_diagonalize(
        mg, tol=args.tol, symmetrize=args.symmetrize, seed=args.seed or 0
    )
    content = {
        "partition": list(jbd.partition),
        "n_blocks": jbd.n_blocks,
        "max_block_size": jbd.max_block_size,
        "reconstruction_errors": jbd.reconstruction_errors,
    }
    _emit(content, args.output)


def _emit(content, output):
    _write(json.dumps(content, indent=2), output)


def _write(text, output):
    if output:
        with open(output, "w") as f:
            f.write(text + "\n")
    else:
        print(text)


def _fit_step(params):
    mg = params["multigraph"]
    tree = generate_pruned_tree(mg, params["epsilon"], int(params["depth"]))
    widths = params["widths"]
    if not isinstance(widths, list):
        widths = [widths]
    model = build_model(
        tree,
        widths,
        variant=params["variant"],
        n_outputs=int(params["y"].max()) + 1,
        n_nodes=mg.n_nodes,
        seed=int(params["seed"]),
    )
    cfg = TrainConfig(
        loss="cross_entropy",
        lr=params["lr"],
        epochs=int(params["epochs"]),
        batch_size=int(params["batch_size"]),
        seed=int(params["seed"]),
    )
    params["model"], params["losses"] = train(
        model, mg, (params["X"], params["y"]), cfg
    )


def _save_step(params):
    save_model(params["model"], params["model_out"])
    if params.get("trace_out"):
        write_trace(params["losses"], params["trace_out"])
    logger.info("model written to %s", params["model_out"])


def cmd_train(args):
    params = _params(args, TRAIN_DEFAULTS)
    params.update(
        multigraph_path=args.multigraph,
        dataset_path=args.dataset,
        normalization=args.normalization,
        model_out=args.model_out,
        trace_out=args.trace_out,
    )
    Pipeline(steps=[_fit_step, _save_step], params=params).process()
    print(f"final training loss {params['losses'][-1]:.6f}")


def cmd_eval(args):
    params = {
        "multigraph_path": args.multigraph,
        "dataset_path": args.dataset,
        "normalization": args.normalization,
    }
    Pipeline(params=params).process()
    model = load_model(args.model)
    accuracy = evaluate(model, params["multigraph"], params["X"], params["y"])
    print(f"accuracy {accuracy:.4f}")


def cmd_wireless(args):
    report = run_wireless_experiment(_params(args))
    print(report["metrics"].to_string(index=False))


def cmd_sourceloc(args):
    report = run_sourceloc_experiment(_params(args))
    print(json.dumps(report["summary"], indent=2, sort_keys=True))


def _experiment_flags(parser):
    parser.add_argument("--config", help="key=value or JSON config file")
    parser.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="override a config entry (repeatable)",
    )
    parser.add_argument("--seed", type=int)
    parser.add_argument("--output", help="directory for result files")


def _multigraph_flags(parser):
    parser.add_argument(
        "--multigraph",
        "--input",
        dest="multigraph",
        required=True,
        help="edge-list file",
    )
    parser.add_argument(
        "--normalization", choices=("none", "spectral"), default="spectral"
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="msp", description="Multigraph signal processing toolkit"
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tree", help="generate a pruned diffusion tree")
    _multigraph_flags(p)
    p.add_argument("--epsilon", type=float, default=float("inf"))
    p.add_argument(
        "--prune",
        dest="epsilon",
        nargs="?",
        type=float,
        const=1e-8,
        default=argparse.SUPPRESS,
        help="prune with the given cutoff (1e-8 when omitted)",
    )
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--output")
    p.set_defaults(func=cmd_tree)

    p = sub.add_parser("spectral", help="joint block diagonalization")
    _multigraph_flags(p)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--symmetrize", action="store_true")
    p.add_argument("--seed", type=int)
    p.add_argument("--output")
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("train", help="train a model on a labelled dataset")
    _multigraph_flags(p)
    _experiment_flags(p)
    p.add_argument("--dataset", required=True, help="label,v0,... CSV")
    p.add_argument("--model-out", required=True)
    p.add_argument("--trace-out")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="accuracy of a saved model")
    _multigraph_flags(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("wireless", help="multi-band power allocation")
    _experiment_flags(p)
    p.set_defaults(func=cmd_wireless)

    p = sub.add_parser("sourceloc", help="synthetic source localization")
    _experiment_flags(p)
    p.add_argument("--dataset-out", help="directory for generated data")
    p.set_defaults(func=cmd_sourceloc)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    try:
        args.func(args)
    except (Error, FileNotFoundError, ValueError, TypeError) as e:
        print(f"msp: error: {e}", file=sys.stderr)
        return 1
    return 0
