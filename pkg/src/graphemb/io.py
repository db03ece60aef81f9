"""File formats: edge lists, contact streams, multilayer containers,
distance/embedding CSVs, model containers, dataset manifests.

All text is UTF-8 with LF newlines and repr-precision floats, so every
save/load pair round-trips bitwise and repeated runs produce byte-identical
files.  Loaders reject structurally invalid input instead of repairing it;
the one documented exception is the duplicate-edge-sum rule.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from graphemb.dae import DaeConfig, DaeModel
from graphemb.distances import DistanceMatrix
from graphemb.embedding import EmbeddingMatrix
from graphemb.errors import DataError
from graphemb.generators import GENERATOR_KINDS, GeneratorSpec, generate
from graphemb.graphs import (LAYOUT_UPPER, LAYOUTS, Graph,
                             GraphCollection, default_node_ids)

FORMAT_DIST = "# graphemb distance-matrix v1"
FORMAT_EMBED = "# graphemb embedding-matrix v1"
FORMAT_COORDS = "# graphemb coords v1"
MODEL_FORMAT_VERSION = 1


def _fmt(x: float) -> str:
    """Shortest decimal that round-trips to the same float64."""
    return repr(float(x))


def _check_token(value: str, what: str) -> str:
    value = str(value)
    if value == "" or any(c in value for c in ",\n\r\t "):
        raise DataError(f"{what} {value!r} contains whitespace or commas")
    return value


def _read_lines(path) -> list[str]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read().split("\n")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def _write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# ---------------------------------------------------------------- edge lists

def load_edge_list(path, universe) -> Graph:
    """Whitespace-separated lines "u v [w]" over a fixed node universe.

    Missing weight means 1; duplicate lines sum.  Blank lines and lines
    starting with '#' are skipped.  Unknown ids and malformed lines raise
    with the offending line number.  An empty file is the empty graph.
    """
    ids = tuple(str(x) for x in universe)
    index = {u: i for i, u in enumerate(ids)}
    if len(index) != len(ids):
        raise DataError("universe contains duplicate node ids")
    edges = []
    for ln, raw in enumerate(_read_lines(path), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise DataError(f"{path}: line {ln}: expected 'u v [w]', got "
                            f"{raw!r}")
        u, v = parts[0], parts[1]
        if u not in index:
            raise DataError(f"{path}: line {ln}: unknown node id {u!r}")
        if v not in index:
            raise DataError(f"{path}: line {ln}: unknown node id {v!r}")
        if u == v:
            raise DataError(f"{path}: line {ln}: self-loop on {u!r}")
        w = 1.0
        if len(parts) == 3:
            try:
                w = float(parts[2])
            except ValueError:
                raise DataError(f"{path}: line {ln}: bad weight "
                                f"{parts[2]!r}") from None
            if not math.isfinite(w):
                raise DataError(f"{path}: line {ln}: non-finite weight")
        edges.append((index[u], index[v], w))
    return Graph.from_edges(ids, edges)


def save_edge_list(graph: Graph, path, extra_header=()) -> None:
    for u in graph.node_ids:
        _check_token(u, "node id")
    lines = [f"# {h}" for h in extra_header]
    lines.extend(f"{graph.node_ids[i]} {graph.node_ids[j]} {_fmt(w)}"
                 for i, j, w in graph.edges())
    _write_text(path, "\n".join(lines) + ("\n" if lines else ""))


# ------------------------------------------------------------ contact streams

@dataclass(frozen=True)
class ContactStream:
    """Timestamped pairwise contact events over a fixed node universe."""

    events: tuple[tuple[int, str, str], ...]
    universe: tuple[str, ...]

    def __post_init__(self):
        ids = tuple(str(x) for x in self.universe)
        known = set(ids)
        if len(known) != len(ids):
            raise DataError("universe contains duplicate node ids")
        evs = []
        for t, u, v in self.events:
            t = int(t)
            u, v = str(u), str(v)
            if t < 0:
                raise DataError(f"negative timestamp {t}")
            if u == v:
                raise DataError(f"self-contact on {u!r} at t={t}")
            if u not in known or v not in known:
                raise DataError(f"event ({t}, {u!r}, {v!r}) references an "
                                f"unknown node")
            evs.append((t, u, v))
        object.__setattr__(self, "events", tuple(evs))
        object.__setattr__(self, "universe", ids)


def load_contact_stream(path, universe) -> ContactStream:
    """Lines "t u v" (integer seconds first); same comment/blank rules as
    edge lists."""
    ids = tuple(str(x) for x in universe)
    events = []
    for ln, raw in enumerate(_read_lines(path), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise DataError(f"{path}: line {ln}: expected 't u v', got "
                            f"{raw!r}")
        try:
            t = int(parts[0])
        except ValueError:
            raise DataError(f"{path}: line {ln}: bad timestamp "
                            f"{parts[0]!r}") from None
        events.append((t, parts[1], parts[2]))
    try:
        return ContactStream(tuple(events), ids)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from exc


def aggregate_snapshots(cs: ContactStream, tau: int) -> GraphCollection:
    """Window the stream into ⌈t_max/τ⌉ snapshots; snapshot k collects the
    events with t in ((k-1)τ, kτ] and weights each edge by its event count.

    Events at t=0 belong to window 1.  Empty windows yield empty graphs; an
    empty stream yields one empty snapshot.
    """
    if int(tau) != tau or tau < 1:
        raise DataError(f"tau must be an integer >= 1, got {tau!r}")
    tau = int(tau)
    t_max = max((t for t, _, _ in cs.events), default=0)
    n_windows = max(1, math.ceil(t_max / tau))
    index = {u: i for i, u in enumerate(cs.universe)}
    n = len(cs.universe)
    mats = np.zeros((n_windows, n, n))
    for t, u, v in cs.events:
        k = max(1, math.ceil(t / tau))
        i, j = index[u], index[v]
        mats[k - 1, i, j] += 1.0
        mats[k - 1, j, i] += 1.0
    graphs = tuple(Graph(mats[k], cs.universe) for k in range(n_windows))
    names = tuple(f"w{k + 1}" for k in range(n_windows))
    return GraphCollection(graphs, names=names)


# --------------------------------------------------------------- multilayer

def load_multilayer(path) -> GraphCollection:
    """Sectioned container: a NODES block (one id per line) then one
    "LAYER <name>" block per layer with edge lines "u v [w]".  Layer names
    become both collection names and labels."""
    lines = _read_lines(path)
    universe: list[str] = []
    layers: list[tuple[str, list]] = []
    section = None
    current_name = None
    index: dict[str, int] = {}
    for ln, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line == "NODES":
            if universe:
                raise DataError(f"{path}: line {ln}: repeated NODES section")
            section = "nodes"
            continue
        if line.startswith("LAYER"):
            parts = line.split(maxsplit=1)
            if len(parts) != 2 or not parts[1].strip():
                raise DataError(f"{path}: line {ln}: LAYER needs a name")
            if not universe:
                raise DataError(f"{path}: line {ln}: LAYER before NODES")
            current_name = parts[1].strip()
            layers.append((current_name, []))
            index = {u: i for i, u in enumerate(universe)}
            section = "layer"
            continue
        if section == "nodes":
            if len(line.split()) != 1:
                raise DataError(f"{path}: line {ln}: one node id per line")
            universe.append(line)
            continue
        if section == "layer":
            parts = line.split()
            if len(parts) not in (2, 3):
                raise DataError(f"{path}: line {ln}: expected 'u v [w]'")
            u, v = parts[0], parts[1]
            for x in (u, v):
                if x not in index:
                    raise DataError(f"{path}: line {ln}: layer "
                                    f"{current_name!r} references unknown "
                                    f"node {x!r}")
            if u == v:
                raise DataError(f"{path}: line {ln}: self-loop in layer "
                                f"{current_name!r}")
            w = 1.0
            if len(parts) == 3:
                try:
                    w = float(parts[2])
                except ValueError:
                    raise DataError(f"{path}: line {ln}: bad weight "
                                    f"{parts[2]!r}") from None
            layers[-1][1].append((index[u], index[v], w))
            continue
        raise DataError(f"{path}: line {ln}: content before NODES section")
    if not universe:
        raise DataError(f"{path}: no NODES section")
    if not layers:
        raise DataError(f"{path}: no LAYER sections")
    if len(set(name for name, _ in layers)) != len(layers):
        raise DataError(f"{path}: duplicate layer names")
    ids = tuple(universe)
    graphs = tuple(Graph.from_edges(ids, edges) for _, edges in layers)
    names = tuple(name for name, _ in layers)
    return GraphCollection(graphs, labels=names, names=names)


def save_multilayer(collection: GraphCollection, path) -> None:
    for u in collection.universe:
        _check_token(u, "node id")
    out = ["NODES"]
    out.extend(collection.universe)
    for name, g in zip(collection.graph_names(), collection.graphs):
        out.append(f"LAYER {name}")
        out.extend(f"{g.node_ids[i]} {g.node_ids[j]} {_fmt(w)}"
                   for i, j, w in g.edges())
    _write_text(path, "\n".join(out) + "\n")


# ------------------------------------------------------------- matrix CSVs

def _parse_meta(lines: list[str], magic: str, path) -> tuple[dict, int]:
    if not lines or lines[0].strip() != magic:
        raise DataError(f"{path}: not a {magic[2:]} file")
    meta: dict[str, str] = {}
    i = 1
    while i < len(lines) and lines[i].startswith("#"):
        body = lines[i][1:].strip()
        if "=" in body:
            key, _, value = body.partition("=")
            meta.setdefault(key.strip(), value.strip())
        i += 1
    return meta, i


def _header_block(magic: str, meta: dict, extra_header=()) -> list[str]:
    out = [magic]
    for key, value in meta.items():
        out.append(f"# {key} = {value}")
    for line in extra_header:
        out.append(f"# {line}")
    return out


def save_distance_csv(dm: DistanceMatrix, path, extra_header=()) -> None:
    ids = dm.row_ids()
    for x in ids:
        _check_token(x, "row id")
    out = _header_block(FORMAT_DIST,
                        {"metric": dm.metric,
                         "normalized": "true" if dm.normalized else "false"},
                        extra_header)
    out.append("id," + ",".join(ids))
    for i, rid in enumerate(ids):
        out.append(rid + "," + ",".join(_fmt(x) for x in dm.values[i]))
    _write_text(path, "\n".join(out) + "\n")


def load_distance_csv(path) -> DistanceMatrix:
    lines = [ln for ln in _read_lines(path) if ln.strip() != ""]
    meta, start = _parse_meta(lines, FORMAT_DIST, path)
    if "metric" not in meta or "normalized" not in meta:
        raise DataError(f"{path}: missing metric/normalized metadata")
    rows = lines[start:]
    if not rows:
        raise DataError(f"{path}: no data rows")
    header = rows[0].split(",")
    if header[0] != "id":
        raise DataError(f"{path}: header must start with 'id'")
    ids = tuple(header[1:])
    m = len(ids)
    values = np.zeros((m, m))
    if len(rows) - 1 != m:
        raise DataError(f"{path}: {len(rows) - 1} rows for {m} ids")
    for i, row in enumerate(rows[1:]):
        parts = row.split(",")
        if len(parts) != m + 1:
            raise DataError(f"{path}: row {i} has {len(parts) - 1} values, "
                            f"expected {m}")
        if parts[0] != ids[i]:
            raise DataError(f"{path}: row id {parts[0]!r} does not match "
                            f"header id {ids[i]!r}")
        try:
            values[i] = [float(x) for x in parts[1:]]
        except ValueError as exc:
            raise DataError(f"{path}: row {i}: {exc}") from None
    return DistanceMatrix(values, metric=meta["metric"],
                          normalized=meta["normalized"] == "true", ids=ids)


def save_embedding_csv(em: EmbeddingMatrix, path, extra_header=()) -> None:
    for x in em.ids:
        _check_token(x, "row id")
    d = em.values.shape[1]
    out = _header_block(FORMAT_EMBED,
                        {"fingerprint": em.model_fingerprint},
                        extra_header)
    out.append("id," + ",".join(f"c{j}" for j in range(d)))
    for i, rid in enumerate(em.ids):
        out.append(rid + "," + ",".join(_fmt(x) for x in em.values[i]))
    _write_text(path, "\n".join(out) + "\n")


def load_embedding_csv(path) -> EmbeddingMatrix:
    lines = [ln for ln in _read_lines(path) if ln.strip() != ""]
    meta, start = _parse_meta(lines, FORMAT_EMBED, path)
    rows = lines[start:]
    if not rows:
        raise DataError(f"{path}: no data rows")
    header = rows[0].split(",")
    if header[0] != "id":
        raise DataError(f"{path}: header must start with 'id'")
    d = len(header) - 1
    ids = []
    values = []
    for i, row in enumerate(rows[1:]):
        parts = row.split(",")
        if len(parts) != d + 1:
            raise DataError(f"{path}: row {i} has {len(parts) - 1} values, "
                            f"expected {d}")
        ids.append(parts[0])
        try:
            values.append([float(x) for x in parts[1:]])
        except ValueError as exc:
            raise DataError(f"{path}: row {i}: {exc}") from None
    return EmbeddingMatrix(np.array(values, dtype=np.float64).reshape(
        len(ids), d), tuple(ids), meta.get("fingerprint", ""))


# ------------------------------------------------------------ model container

def save_model(model: DaeModel, path, extra_meta: dict | None = None) -> None:
    """NPZ container holding every weight plus the preprocessing recipe
    (scale, power r, layout) so inference can rebuild its inputs.

    ``extra_meta`` string pairs are stored under ``meta_`` keys (provenance);
    load_model ignores them.
    """
    meta = {f"meta_{k}": np.str_(str(v))
            for k, v in (extra_meta or {}).items()}
    cfg = model.config
    np.savez(path,
             **meta,
             format_version=np.int64(MODEL_FORMAT_VERSION),
             w_enc=np.asarray(model.w_enc),
             b_enc=np.asarray(model.b_enc),
             w_dec=np.asarray(model.w_dec),
             b_dec=np.asarray(model.b_dec),
             input_dim=np.int64(cfg.input_dim),
             hidden_dim=np.int64(cfg.hidden_dim),
             activation=np.str_(cfg.activation),
             noise_rate=np.float64(cfg.noise_rate),
             learning_rate=np.float64(cfg.learning_rate),
             batch_size=np.int64(cfg.batch_size),
             epochs=np.int64(cfg.epochs),
             seed=np.int64(cfg.seed),
             tie_weights=np.bool_(cfg.tie_weights),
             dtype=np.str_(cfg.dtype),
             preprocess_scale=np.float64(model.preprocess_scale),
             power_r=np.int64(model.power_r),
             layout=np.str_(model.layout))


def load_model(path) -> DaeModel:
    try:
        with np.load(path, allow_pickle=False) as z:
            data = {k: z[k] for k in z.files}
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read model container {path}: {exc}") from exc
    version = int(data.get("format_version", -1))
    if version != MODEL_FORMAT_VERSION:
        raise DataError(f"{path}: unsupported model format version "
                        f"{version}")
    required = ("w_enc", "b_enc", "w_dec", "b_dec", "input_dim",
                "hidden_dim", "activation", "preprocess_scale", "power_r",
                "layout", "seed")
    missing = [k for k in required if k not in data]
    if missing:
        raise DataError(f"{path}: missing keys {missing}")
    cfg = DaeConfig(input_dim=int(data["input_dim"]),
                    hidden_dim=int(data["hidden_dim"]),
                    activation=str(data["activation"]),
                    noise_rate=float(data["noise_rate"]),
                    learning_rate=float(data["learning_rate"]),
                    batch_size=int(data["batch_size"]),
                    epochs=int(data["epochs"]),
                    seed=int(data["seed"]),
                    tie_weights=bool(data["tie_weights"]),
                    dtype=str(data["dtype"]))
    try:
        return DaeModel(w_enc=data["w_enc"], b_enc=data["b_enc"],
                        w_dec=data["w_dec"], b_dec=data["b_dec"], config=cfg,
                        preprocess_scale=float(data["preprocess_scale"]),
                        power_r=int(data["power_r"]),
                        layout=str(data["layout"]))
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from exc


# ------------------------------------------------------------------ manifests

@dataclass(frozen=True)
class ManifestMember:
    """One collection member: an edge-list file or a generator spec."""

    mode: str                      # "file" or "gen"
    path: str | None = None
    spec: GeneratorSpec | None = None
    label: str | None = None

    def __post_init__(self):
        if self.mode not in ("file", "gen"):
            raise DataError(f"member mode must be file or gen, got "
                            f"{self.mode!r}")
        if self.mode == "file" and not self.path:
            raise DataError("file member needs a path")
        if self.mode == "gen" and self.spec is None:
            raise DataError("gen member needs a generator spec")


@dataclass(frozen=True)
class DatasetManifest:
    """A named collection recipe: universe, members, preprocessing params."""

    name: str
    universe: tuple[str, ...]
    members: tuple[ManifestMember, ...]
    r: int = 3
    layout: str = LAYOUT_UPPER
    base_dir: str = "."

    def __post_init__(self):
        if not self.members:
            raise DataError("manifest has no members")
        if self.layout not in LAYOUTS:
            raise DataError(f"unknown layout {self.layout!r}")
        if not isinstance(self.r, int) or self.r < 1:
            raise DataError(f"r must be a positive int, got {self.r!r}")
        labeled = [m.label is not None for m in self.members]
        if any(labeled) and not all(labeled):
            raise DataError("labels must be given for all members or none")
        object.__setattr__(self, "members", tuple(self.members))
        object.__setattr__(self, "universe",
                           tuple(str(x) for x in self.universe))


def _parse_value(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def _parse_change_points(text: str) -> tuple:
    cps = []
    for chunk in text.split(","):
        parts = chunk.split(":")
        if len(parts) != 3:
            raise DataError(f"bad change point {chunk!r}, expected "
                            f"t:p_add:p_del")
        cps.append((int(parts[0]), float(parts[1]), float(parts[2])))
    return tuple(cps)


def load_manifest(path) -> DatasetManifest:
    """Flat "key = value" pairs plus "member ..." table lines.

    Keys: name, universe (an integer node count for auto ids, or a path to
    a one-id-per-line file), r, layout.  Members:
      member file <path> [label=<str>]
      member gen <kind> key=value ... [count=N] [seed=S] [label=<str>]
    Relative paths resolve against the manifest's directory and must exist.
    """
    base_dir = os.path.dirname(os.path.abspath(path))
    kv: dict[str, str] = {}
    member_lines: list[tuple[int, str]] = []
    for ln, raw in enumerate(_read_lines(path), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("member "):
            member_lines.append((ln, line))
            continue
        if "=" not in line:
            raise DataError(f"{path}: line {ln}: expected 'key = value' or "
                            f"'member ...'")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key in kv:
            raise DataError(f"{path}: line {ln}: duplicate key {key!r}")
        kv[key] = value
    if "name" not in kv:
        raise DataError(f"{path}: missing 'name'")
    if "universe" not in kv:
        raise DataError(f"{path}: missing 'universe'")
    uni_text = kv.pop("universe")
    try:
        universe = default_node_ids(int(uni_text))
    except ValueError:
        uni_path = os.path.join(base_dir, uni_text)
        if not os.path.exists(uni_path):
            raise DataError(f"{path}: universe file {uni_text!r} does not "
                            f"exist") from None
        universe = tuple(ln.strip() for ln in _read_lines(uni_path)
                         if ln.strip() and not ln.strip().startswith("#"))
    name = kv.pop("name")
    r = kv.pop("r", "3")
    layout = kv.pop("layout", LAYOUT_UPPER)
    if kv:
        raise DataError(f"{path}: unknown keys {sorted(kv)}")
    try:
        r_int = int(r)
    except ValueError:
        raise DataError(f"{path}: r must be an integer, got {r!r}") from None

    members = []
    for ln, line in member_lines:
        parts = line.split()
        if len(parts) < 3:
            raise DataError(f"{path}: line {ln}: incomplete member line")
        mode = parts[1]
        if mode == "file":
            label = None
            rest = parts[3:]
            for tok in rest:
                if tok.startswith("label="):
                    label = tok[len("label="):]
                else:
                    raise DataError(f"{path}: line {ln}: unexpected token "
                                    f"{tok!r}")
            fpath = parts[2]
            if not os.path.exists(os.path.join(base_dir, fpath)):
                raise DataError(f"{path}: line {ln}: member file "
                                f"{fpath!r} does not exist")
            members.append(ManifestMember("file", path=fpath, label=label))
        elif mode == "gen":
            kind = parts[2]
            if kind not in GENERATOR_KINDS:
                raise DataError(f"{path}: line {ln}: unknown generator "
                                f"{kind!r}")
            params: dict = {}
            label = None
            count = 1
            seed = 0
            for tok in parts[3:]:
                if "=" not in tok:
                    raise DataError(f"{path}: line {ln}: expected key=value,"
                                    f" got {tok!r}")
                key, _, value = tok.partition("=")
                if key == "label":
                    label = value
                elif key == "count":
                    count = int(value)
                elif key == "seed":
                    seed = int(value)
                elif key == "change_points":
                    params[key] = _parse_change_points(value)
                else:
                    params[key] = _parse_value(value)
            spec = GeneratorSpec(kind=kind, n=len(universe), params=params,
                                 seed=seed, count=count)
            members.append(ManifestMember("gen", spec=spec, label=label))
        else:
            raise DataError(f"{path}: line {ln}: member mode must be file "
                            f"or gen, got {mode!r}")
    try:
        return DatasetManifest(name=name, universe=universe,
                               members=tuple(members), r=r_int,
                               layout=layout, base_dir=base_dir)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from exc


def save_manifest(manifest: DatasetManifest, path, extra_header=(),
                  universe_ref: str | None = None) -> None:
    out = [f"# {h}" for h in extra_header]
    out += [f"name = {manifest.name}",
           f"universe = {universe_ref if universe_ref else len(manifest.universe)}",
           f"r = {manifest.r}",
           f"layout = {manifest.layout}"]
    for m in manifest.members:
        if m.mode == "file":
            line = f"member file {m.path}"
        else:
            spec = m.spec
            toks = [f"member gen {spec.kind}"]
            for key, value in sorted(spec.params.items()):
                if key == "change_points":
                    body = ",".join(f"{t}:{pa}:{pd}" for t, pa, pd in value)
                    toks.append(f"change_points={body}")
                else:
                    toks.append(f"{key}={value}")
            toks.append(f"seed={spec.seed}")
            toks.append(f"count={spec.count}")
            line = " ".join(toks)
        if m.label is not None:
            line += f" label={_check_token(m.label, 'label')}"
        out.append(line)
    _write_text(path, "\n".join(out) + "\n")


def build_collection(manifest: DatasetManifest) -> GraphCollection:
    """Materialize a manifest: load file members, run generator members,
    rebase every graph onto the manifest universe, and attach labels when
    every member carries one."""
    graphs: list[Graph] = []
    labels: list = []
    n = len(manifest.universe)
    for m in manifest.members:
        if m.mode == "file":
            g = load_edge_list(os.path.join(manifest.base_dir, m.path),
                               manifest.universe)
            new = [g]
            graphs.extend(new)
            labels.extend([m.label] * len(new))
        else:
            if m.spec.n != n:
                raise DataError(f"generator n={m.spec.n} does not match "
                                f"universe size {n}")
            col = generate(m.spec)
            new = [Graph(g.adjacency, manifest.universe) for g in col.graphs]
            graphs.extend(new)
            if m.label is not None:
                labels.extend([m.label] * len(new))
            elif col.labels is not None:
                # dynamic sequences label snapshots by regime segment
                labels.extend(str(x) for x in col.labels)
            else:
                labels.extend([None] * len(new))
    use_labels = all(x is not None for x in labels)
    return GraphCollection(tuple(graphs),
                           labels=tuple(labels) if use_labels else None)


# --------------------------------------------------------------- labels files

def load_labels(path) -> tuple[str, ...]:
    """One label per line; blanks and '#' comments skipped."""
    out = [ln.strip() for ln in _read_lines(path)
           if ln.strip() and not ln.strip().startswith("#")]
    if not out:
        raise DataError(f"{path}: no labels")
    return tuple(out)


def save_labels(labels, path, extra_header=()) -> None:
    out = [f"# {h}" for h in extra_header]
    out.extend(str(x) for x in labels)
    _write_text(path, "\n".join(out) + "\n")


# ---------------------------------------------------------- dendrogram export

def dendrogram_to_newick(dend, names) -> str:
    """Ultrametric Newick string: leaves at height 0, branch length =
    parent merge height - child height."""
    names = tuple(str(x) for x in names)
    m = len(names)
    if len(dend.merges) != m - 1:
        raise DataError(f"{len(dend.merges)} merges for {m} leaves")
    height = {i: 0.0 for i in range(m)}
    text = {i: names[i] for i in range(m)}
    for t, (a, b, h, new_id) in enumerate(dend.merges):
        la = h - height[a]
        lb = h - height[b]
        text[new_id] = f"({text[a]}:{_fmt(la)},{text[b]}:{_fmt(lb)})"
        height[new_id] = h
    root = dend.merges[-1][3] if dend.merges else 0
    return text[root] + ";"


def save_merge_table(dend, path, extra_header=()) -> None:
    out = [f"# {line}" for line in extra_header]
    out.append("step,left,right,height,new_id")
    for t, (a, b, h, new_id) in enumerate(dend.merges):
        out.append(f"{t},{a},{b},{_fmt(h)},{new_id}")
    _write_text(path, "\n".join(out) + "\n")
