"""Apply a trained encoder to collections and build embedding distance
matrices with the precomputed-inner-product formulation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from graphemb.dae import DaeModel, encode
from graphemb.distances import DistanceMatrix
from graphemb.errors import DataError, NumericalError
from graphemb.graphs import (GraphCollection, adjacency_power, vector_length,
                             vectorize)

RADICAND_FLOOR = -1e-9


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Encoder outputs for a collection: one row per graph, tagged with a
    fingerprint of the model that produced them."""

    values: np.ndarray
    ids: tuple[str, ...]
    model_fingerprint: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise DataError(f"embedding matrix must be 2-D, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise DataError("embedding matrix has non-finite entries")
        ids = tuple(str(x) for x in self.ids)
        if len(ids) != v.shape[0]:
            raise DataError(f"{len(ids)} ids for {v.shape[0]} rows")
        if len(set(ids)) != len(ids):
            raise DataError("embedding ids are not unique")
        v = np.array(v, copy=True)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "ids", ids)

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


def embed_collection(model: DaeModel, collection: GraphCollection,
                     extend: EmbeddingMatrix | None = None
                     ) -> EmbeddingMatrix:
    """Encode every graph: row i = encode(model, vec(A_i^r)) using the
    model's stored r and layout; no corruption at inference.

    ``extend`` appends the new rows to an existing EmbeddingMatrix, which
    must carry the same model fingerprint (mixing encoders is rejected).
    """
    D = vector_length(collection.n_nodes, model.layout)
    if D != model.config.input_dim:
        raise DataError(
            f"collection vectorizes to length {D} but the model expects "
            f"{model.config.input_dim}")
    rows = [encode(model, vectorize(adjacency_power(g, model.power_r),
                                    model.layout, power=model.power_r))
            for g in collection]
    fp = model.fingerprint()
    names = collection.graph_names()
    if extend is not None:
        if extend.model_fingerprint != fp:
            raise DataError("embedding fingerprint does not match the model "
                            "(refusing to extend across different encoders)")
        rows = list(extend.values) + rows
        names = extend.ids + names
    return EmbeddingMatrix(np.stack(rows), names, fp)


def embedding_distance(e1, e2) -> float:
    """Euclidean distance between two embedding rows."""
    e1 = np.asarray(e1, dtype=np.float64)
    e2 = np.asarray(e2, dtype=np.float64)
    if e1.shape != e2.shape:
        raise DataError(f"dimension mismatch: {e1.shape} vs {e2.shape}")
    return float(np.linalg.norm(e1 - e2))


def pairwise_embedding_distances(em: EmbeddingMatrix) -> DistanceMatrix:
    """All-pairs Euclidean distances via
    d(x, y) = sqrt(<x,x> - 2<x,y> + <y,y>) with precomputed squared norms.

    Cancellation can push near-zero radicands slightly negative, by an
    amount proportional to the squared norms involved; those are clamped
    to 0.  Anything below that roundoff band signals numerical corruption
    and raises.
    """
    X = em.values
    sq = (X * X).sum(axis=1)
    rad = sq[:, None] - 2.0 * (X @ X.T) + sq[None, :]
    low = float(rad.min())
    floor = RADICAND_FLOOR * max(1.0, float(sq.max()) if sq.size else 1.0)
    if low < floor:
        raise NumericalError(
            f"squared-distance radicand {low:.3e} below {floor:.3e}")
    values = np.sqrt(np.maximum(rad, 0.0))
    values = (values + values.T) / 2.0
    np.fill_diagonal(values, 0.0)
    return DistanceMatrix(values, "embedding", ids=em.ids)
