"""Command-line interface: gen, embed, dist, cluster, viz, classify, bench.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
Every output file carries a provenance header (command line, config hash,
seed) and no timestamps, so reruns with identical arguments are
byte-identical.  Option precedence: flags > --config file > defaults.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from graphemb import io as gio
from graphemb.analysis import (hierarchical_cluster, mds_layout, nmi,
                               similarity_from_distance,
                               spectral_clustering)
from graphemb.classify import cross_validate
from graphemb.dae import DaeConfig, train
from graphemb.distances import (METRICS, graph_distance, normalize, pairwise)
from graphemb.embedding import (embed_collection,
                                pairwise_embedding_distances)
from graphemb.errors import DataError, NumericalError
from graphemb.graphs import LAYOUTS, vector_length

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3

GRAPH_METRIC_CHOICES = tuple(m for m in METRICS if m != "embedding")

# category palette for label coloring; cycles when labels outnumber it
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    """One resolved command invocation."""

    command: str
    out_dir: str
    seed: int
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        os.makedirs(self.out_dir, exist_ok=True)
        if not os.access(self.out_dir, os.W_OK):
            raise UsageError(f"output directory {self.out_dir!r} is not "
                             f"writable")


def _coerce(text: str):
    low = text.strip().lower()
    if low == "true":
        return True
    if low == "false":
        return False
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text.strip()


def _read_config_file(path) -> dict:
    cfg = {}
    for ln, raw in enumerate(gio._read_lines(path), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}: line {ln}: expected 'key = value'")
        key, _, value = line.partition("=")
        cfg[key.strip().replace("-", "_")] = _coerce(value)
    return cfg


def _resolve(args, defaults: dict) -> dict:
    """flags > config file > defaults, keyed by flag name."""
    file_cfg = {}
    if getattr(args, "config", None):
        file_cfg = _read_config_file(args.config)
    out = {}
    for key, default in defaults.items():
        flag = getattr(args, key, None)
        if flag is not None:
            out[key] = flag
        elif key in file_cfg:
            out[key] = file_cfg[key]
        else:
            out[key] = default
    return out


def _config_hash(command: str, resolved: dict) -> str:
    body = command + "|" + repr(sorted(resolved.items()))
    return hashlib.sha256(body.encode()).hexdigest()[:12]


def _provenance(argv: list[str], command: str, resolved: dict,
                seed) -> list[str]:
    return [f"command = graphemb {' '.join(argv)}",
            f"config_hash = {_config_hash(command, resolved)}",
            f"seed = {seed}"]


def _fmt(x: float) -> str:
    return repr(float(x))


# ------------------------------------------------------------------- gen

def cmd_gen(args, argv) -> int:
    try:
        manifest = gio.load_manifest(args.spec)
    except DataError as exc:
        raise UsageError(f"invalid generator spec: {exc}") from exc
    resolved = {"spec": args.spec}
    rc = RunConfig("gen", args.out, 0, resolved)
    prov = _provenance(argv, "gen", resolved, 0)
    col = gio.build_collection(manifest)

    graphs_dir = os.path.join(rc.out_dir, "graphs")
    os.makedirs(graphs_dir, exist_ok=True)
    width = max(4, len(str(len(col) - 1)))
    rel_paths = []
    for i, g in enumerate(col.graphs):
        rel = os.path.join("graphs", f"g{i:0{width}d}.txt")
        gio.save_edge_list(g, os.path.join(rc.out_dir, rel),
                           extra_header=prov)
        rel_paths.append(rel)
    gio.save_labels(col.universe, os.path.join(rc.out_dir, "universe.txt"),
                    extra_header=prov)
    if col.labels is not None:
        gio.save_labels(col.labels, os.path.join(rc.out_dir, "labels.txt"),
                        extra_header=prov)
    members = tuple(
        gio.ManifestMember("file", path=rel,
                           label=None if col.labels is None
                           else str(col.labels[i]))
        for i, rel in enumerate(rel_paths))
    out_manifest = gio.DatasetManifest(
        name=manifest.name, universe=col.universe, members=members,
        r=manifest.r, layout=manifest.layout, base_dir=rc.out_dir)
    gio.save_manifest(out_manifest, os.path.join(rc.out_dir, "manifest.txt"),
                      extra_header=prov, universe_ref="universe.txt")
    print(f"wrote {len(col)} graphs to {rc.out_dir}")
    return EXIT_OK


# ------------------------------------------------------------------ embed

DAE_DEFAULTS = {"hidden_dim": 128, "activation": "sigmoid",
                "noise_rate": 0.05, "learning_rate": 0.01, "batch_size": 32,
                "epochs": 200, "seed": 0, "dtype": "float32",
                "tie_weights": False}


def _add_dae_flags(p) -> None:
    p.add_argument("--r", type=int, default=None,
                   help="adjacency power (default: manifest value)")
    p.add_argument("--layout", choices=LAYOUTS, default=None)
    p.add_argument("--hidden-dim", dest="hidden_dim", type=int, default=None)
    p.add_argument("--activation", default=None)
    p.add_argument("--noise-rate", dest="noise_rate", type=float,
                   default=None)
    p.add_argument("--learning-rate", dest="learning_rate", type=float,
                   default=None)
    p.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--dtype", choices=("float32", "float64"), default=None)
    p.add_argument("--tie-weights", dest="tie_weights",
                   action=argparse.BooleanOptionalAction, default=None)


def _dae_setup(args, manifest):
    defaults = dict(DAE_DEFAULTS)
    defaults["r"] = manifest.r
    defaults["layout"] = manifest.layout
    resolved = _resolve(args, defaults)
    col = gio.build_collection(manifest)
    input_dim = vector_length(col.n_nodes, resolved["layout"])
    if resolved["hidden_dim"] >= input_dim:
        raise UsageError(f"hidden_dim {resolved['hidden_dim']} must be "
                         f"smaller than input_dim {input_dim}")
    cfg = DaeConfig(input_dim=input_dim, hidden_dim=resolved["hidden_dim"],
                    activation=resolved["activation"],
                    noise_rate=resolved["noise_rate"],
                    learning_rate=resolved["learning_rate"],
                    batch_size=resolved["batch_size"],
                    epochs=resolved["epochs"], seed=resolved["seed"],
                    tie_weights=resolved["tie_weights"],
                    dtype=resolved["dtype"])
    return resolved, col, cfg


def cmd_embed(args, argv) -> int:
    manifest = gio.load_manifest(args.manifest)
    resolved, col, cfg = _dae_setup(args, manifest)
    rc = RunConfig("embed", args.out, resolved["seed"], resolved)
    prov = _provenance(argv, "embed", resolved, resolved["seed"])

    model, losses = train(col, r=resolved["r"], layout=resolved["layout"],
                          cfg=cfg)
    em = embed_collection(model, col)

    gio.save_model(model, os.path.join(rc.out_dir, "model.npz"),
                   extra_meta={"command": prov[0].split(" = ", 1)[1],
                               "config_hash": prov[1].split(" = ", 1)[1],
                               "seed": str(resolved["seed"])})
    gio.save_embedding_csv(em, os.path.join(rc.out_dir, "embeddings.csv"),
                           extra_header=prov)
    loss_lines = ["# graphemb loss-curve v1"]
    loss_lines += [f"# {h}" for h in prov]
    loss_lines.append("epoch,loss")
    loss_lines += [f"{i},{_fmt(x)}" for i, x in enumerate(losses)]
    gio._write_text(os.path.join(rc.out_dir, "loss.csv"),
                    "\n".join(loss_lines) + "\n")
    final = float(losses[-1]) if len(losses) else float("nan")
    print(f"trained {cfg.epochs} epochs, final loss {final:.6g}; "
          f"artifacts in {rc.out_dir}")
    return EXIT_OK


# ------------------------------------------------------------------- dist

def cmd_dist(args, argv) -> int:
    resolved = _resolve(args, {"metric": None, "threads": None})
    metric = resolved["metric"]
    if metric is None:
        raise UsageError("--metric is required")
    if metric not in METRICS:
        raise UsageError(f"unknown metric {metric!r}; choose from "
                         f"{', '.join(METRICS)}")
    rc = RunConfig("dist", args.out, 0, resolved)
    prov = _provenance(argv, "dist", resolved, 0)
    if metric == "embedding":
        if not args.embeddings:
            raise UsageError("metric=embedding requires --embeddings")
        em = gio.load_embedding_csv(args.embeddings)
        dm = pairwise_embedding_distances(em)
    else:
        if not args.manifest:
            raise UsageError(f"metric={metric} requires --manifest")
        col = gio.build_collection(gio.load_manifest(args.manifest))
        dm = pairwise(col, metric, threads=resolved["threads"])
    dm = normalize(dm)
    out_path = os.path.join(rc.out_dir, "distances.csv")
    gio.save_distance_csv(dm, out_path, extra_header=prov)
    print(f"wrote {dm.values.shape[0]}x{dm.values.shape[1]} "
          f"{metric} distance matrix to {out_path}")
    return EXIT_OK


# ----------------------------------------------------------------- cluster

def cmd_cluster(args, argv) -> int:
    resolved = _resolve(args, {"k": None, "hierarchical": False,
                               "linkage": "average", "seed": 0})
    rc = RunConfig("cluster", args.out, resolved["seed"], resolved)
    prov = _provenance(argv, "cluster", resolved, resolved["seed"])
    dm = gio.load_distance_csv(args.distances)
    labels = gio.load_labels(args.labels) if args.labels else None
    if labels is not None and len(labels) != dm.values.shape[0]:
        raise DataError(f"{len(labels)} labels for "
                        f"{dm.values.shape[0]} items")

    if resolved["hierarchical"]:
        dend = hierarchical_cluster(dm, linkage=resolved["linkage"])
        newick = gio.dendrogram_to_newick(dend, dm.row_ids())
        gio._write_text(os.path.join(rc.out_dir, "dendrogram.newick"),
                        newick + "\n")
        gio.save_merge_table(dend, os.path.join(rc.out_dir, "merges.csv"),
                             extra_header=prov)
        print(f"wrote dendrogram ({len(dend.merges)} merges) to "
              f"{rc.out_dir}")
        return EXIT_OK

    k = resolved["k"]
    if k is None:
        if labels is None:
            raise UsageError("--k is required when no labels are given")
        k = len(set(labels))
    assign = spectral_clustering(similarity_from_distance(dm), int(k),
                                 seed=resolved["seed"])
    header = list(prov)
    score = None
    if labels is not None:
        score = nmi(labels, assign.labels)
        header.append(f"nmi = {_fmt(score)}")
    lines = [f"# {h}" for h in header]
    lines.append("id,cluster")
    lines += [f"{gid},{c}" for gid, c in zip(dm.row_ids(), assign.labels)]
    gio._write_text(os.path.join(rc.out_dir, "assignment.csv"),
                    "\n".join(lines) + "\n")
    if score is not None:
        print(f"nmi = {_fmt(score)}")
    print(f"wrote {k}-cluster assignment to {rc.out_dir}")
    return EXIT_OK


# -------------------------------------------------------------------- viz

def _svg_scatter(coords: np.ndarray, colors: list[str],
                 comments: list[str]) -> str:
    w, h, margin, radius = 640, 480, 40.0, 4.0
    x, y = coords[:, 0], coords[:, 1]
    spans = []
    for v in (x, y):
        lo, hi = float(v.min()), float(v.max())
        if hi - lo < 1e-12:
            lo, hi = lo - 1.0, hi + 1.0
        spans.append((lo, hi))
    (x0, x1), (y0, y1) = spans
    sx = (w - 2 * margin) / (x1 - x0)
    sy = (h - 2 * margin) / (y1 - y0)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" '
           f'height="{h}" viewBox="0 0 {w} {h}">']
    out += [f"<!-- {c} -->" for c in comments]
    out.append(f'<rect width="{w}" height="{h}" fill="white"/>')
    for i in range(coords.shape[0]):
        cx = margin + (float(x[i]) - x0) * sx
        cy = h - margin - (float(y[i]) - y0) * sy
        out.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{radius}" '
                   f'fill="{colors[i]}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cmd_viz(args, argv) -> int:
    resolved = _resolve(args, {"dim": 2})
    rc = RunConfig("viz", args.out, 0, resolved)
    prov = _provenance(argv, "viz", resolved, 0)
    dm = gio.load_distance_csv(args.distances)
    labels = gio.load_labels(args.labels) if args.labels else None
    m = dm.values.shape[0]
    if labels is not None and len(labels) != m:
        raise DataError(f"{len(labels)} labels for {m} items")
    dim = int(resolved["dim"])
    coords = mds_layout(dm, out_dim=dim)

    lines = [gio.FORMAT_COORDS]
    lines += [f"# {h}" for h in prov]
    lines.append("id," + ",".join(f"x{j}" for j in range(dim)))
    for i, gid in enumerate(dm.row_ids()):
        lines.append(gid + "," + ",".join(_fmt(v) for v in coords[i]))
    gio._write_text(os.path.join(rc.out_dir, "coords.csv"),
                    "\n".join(lines) + "\n")

    if labels is None:
        colors = [PALETTE[0]] * m
    else:
        order: dict = {}
        for lab in labels:
            order.setdefault(lab, len(order))
        colors = [PALETTE[order[lab] % len(PALETTE)] for lab in labels]
    svg = _svg_scatter(coords[:, :2] if dim >= 2
                       else np.column_stack([coords[:, 0],
                                             np.zeros(m)]),
                       colors, prov)
    gio._write_text(os.path.join(rc.out_dir, "scatter.svg"), svg)
    print(f"wrote coords.csv and scatter.svg ({m} points) to {rc.out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------- classify

def cmd_classify(args, argv) -> int:
    resolved = _resolve(args, {"folds": 10, "repeats": 10, "seed": 0})
    rc = RunConfig("classify", args.out, resolved["seed"], resolved)
    prov = _provenance(argv, "classify", resolved, resolved["seed"])
    labels = gio.load_labels(args.labels)
    if args.distances:
        data = gio.load_distance_csv(args.distances)
    else:
        data = gio.load_embedding_csv(args.embeddings)
    result = cross_validate(data, labels, folds=int(resolved["folds"]),
                            repeats=int(resolved["repeats"]),
                            seed=int(resolved["seed"]))
    lines = [f"# {h}" for h in prov]
    lines.append(f"# accuracy = {_fmt(result.mean_accuracy)} ± "
                 f"{_fmt(result.std_accuracy)}")
    lines.append("repeat,accuracy")
    lines += [f"{i},{_fmt(a)}"
              for i, a in enumerate(result.repeat_accuracies)]
    gio._write_text(os.path.join(rc.out_dir, "report.csv"),
                    "\n".join(lines) + "\n")
    print(f"accuracy = {result.mean_accuracy:.4f} ± {result.std_accuracy:.4f} "
          f"({resolved['repeats']} repeats, {resolved['folds']}-fold)")
    return EXIT_OK


# ------------------------------------------------------------------- bench

def cmd_bench(args, argv) -> int:
    defaults = {"metrics": list(METRICS), "max_pairs": None,
                "threads": None}
    defaults.update(DAE_DEFAULTS)
    defaults["r"] = None
    defaults["layout"] = None
    resolved = _resolve(args, defaults)
    rc = RunConfig("bench", args.out, resolved["seed"], resolved)
    prov = _provenance(argv, "bench", resolved, resolved["seed"])
    manifest = gio.load_manifest(args.manifest)
    col = gio.build_collection(manifest)
    m = len(col)
    all_pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
    budget = resolved["max_pairs"]
    pairs = all_pairs if budget is None else all_pairs[:int(budget)]

    metrics = resolved["metrics"]
    if isinstance(metrics, str):
        metrics = metrics.split()
    rows: list[tuple[str, int, float]] = []
    for metric in metrics:
        if metric not in METRICS:
            raise UsageError(f"unknown metric {metric!r}")
        if metric == "embedding":
            dres, col2, cfg = _dae_setup(args, manifest)
            t0 = time.perf_counter()
            model, _ = train(col2, r=dres["r"], layout=dres["layout"],
                             cfg=cfg)
            t_train = time.perf_counter() - t0
            t0 = time.perf_counter()
            em = embed_collection(model, col2)
            pairwise_embedding_distances(em)
            t_pair = time.perf_counter() - t0
            n_all = len(all_pairs)
            rows.append(("embedding_train", 0, t_train))
            rows.append(("embedding_pairwise", n_all, t_pair))
            rows.append(("embedding_total", n_all, t_train + t_pair))
        else:
            t0 = time.perf_counter()
            for i, j in pairs:
                graph_distance(col[i], col[j], metric)
            rows.append((metric, len(pairs), time.perf_counter() - t0))

    lines = [f"# {h}" for h in prov]
    lines.append("metric,pairs,seconds")
    lines += [f"{name},{cnt},{_fmt(sec)}" for name, cnt, sec in rows]
    gio._write_text(os.path.join(rc.out_dir, "bench.csv"),
                    "\n".join(lines) + "\n")
    width = max(len(r[0]) for r in rows)
    print(f"{'metric'.ljust(width)}  {'pairs':>8}  seconds")
    for name, cnt, sec in rows:
        print(f"{name.ljust(width)}  {cnt:>8}  {sec:.3f}")
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> _Parser:
    p = _Parser(prog="graphemb",
                description="Graph collection embeddings, distances, "
                            "clustering, classification, and plots.")
    sub = p.add_subparsers(dest="command", required=True,
                           parser_class=_Parser)

    g = sub.add_parser("gen", help="materialize a generator manifest")
    g.add_argument("--spec", required=True,
                   help="generator manifest file")
    g.add_argument("--out", required=True)
    g.add_argument("--config", default=None)
    g.set_defaults(func=cmd_gen)

    e = sub.add_parser("embed", help="train the autoencoder and embed")
    e.add_argument("--manifest", required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--config", default=None)
    _add_dae_flags(e)
    e.set_defaults(func=cmd_embed)

    d = sub.add_parser("dist", help="pairwise distance matrix")
    d.add_argument("--manifest", default=None)
    d.add_argument("--embeddings", default=None,
                   help="embeddings CSV (for metric=embedding)")
    d.add_argument("--metric", default=None,
                   help=f"one of {', '.join(METRICS)}")
    d.add_argument("--threads", type=int, default=None)
    d.add_argument("--out", required=True)
    d.add_argument("--config", default=None)
    d.set_defaults(func=cmd_dist)

    c = sub.add_parser("cluster", help="cluster a distance matrix")
    c.add_argument("--distances", required=True)
    group = c.add_mutually_exclusive_group()
    group.add_argument("--k", type=int, default=None)
    group.add_argument("--hierarchical", action="store_true", default=None)
    c.add_argument("--linkage", choices=("average", "single", "complete"),
                   default=None)
    c.add_argument("--labels", default=None)
    c.add_argument("--seed", type=int, default=None)
    c.add_argument("--out", required=True)
    c.add_argument("--config", default=None)
    c.set_defaults(func=cmd_cluster)

    v = sub.add_parser("viz", help="MDS coordinates and SVG scatter")
    v.add_argument("--distances", required=True)
    v.add_argument("--labels", default=None)
    v.add_argument("--dim", type=int, default=None)
    v.add_argument("--out", required=True)
    v.add_argument("--config", default=None)
    v.set_defaults(func=cmd_viz)

    cl = sub.add_parser("classify", help="SVM cross-validation report")
    src = cl.add_mutually_exclusive_group(required=True)
    src.add_argument("--distances", default=None)
    src.add_argument("--embeddings", default=None)
    cl.add_argument("--labels", required=True)
    cl.add_argument("--folds", type=int, default=None)
    cl.add_argument("--repeats", type=int, default=None)
    cl.add_argument("--seed", type=int, default=None)
    cl.add_argument("--out", required=True)
    cl.add_argument("--config", default=None)
    cl.set_defaults(func=cmd_classify)

    b = sub.add_parser("bench", help="wall-clock table per metric")
    b.add_argument("--manifest", required=True)
    b.add_argument("--metrics", nargs="+", default=None)
    b.add_argument("--max-pairs", dest="max_pairs", type=int, default=None)
    b.add_argument("--threads", type=int, default=None)
    b.add_argument("--out", required=True)
    b.add_argument("--config", default=None)
    _add_dae_flags(b)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args, argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
