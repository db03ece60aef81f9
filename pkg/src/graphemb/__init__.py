"""graphemb: Euclidean embeddings for collections of graphs on a shared
node set, next to classical graph distances, clustering, classification and
visualization tools."""

__version__ = "0.1.0"

from graphemb.errors import DataError, GraphembError, NumericalError
from graphemb.graphs import Graph, GraphCollection, GraphVector

__all__ = [
    "__version__",
    "DataError",
    "GraphembError",
    "NumericalError",
    "Graph",
    "GraphCollection",
    "GraphVector",
]
