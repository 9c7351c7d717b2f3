"""Static node embeddings: CSV loading with a spectral fallback"""
import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd
from scipy.linalg import eigh

from tensor import Tensor
from utils.errors import ConfigError, DataFormatError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def read_adjacency(path: PathLike, num_nodes: int) -> np.ndarray:
    """
    Read an edge list CSV of "u,v[,w]" lines with 0-based node ids

    Returns:
        Array of shape [E, 3] holding (u, v, weight); weight defaults to 1
    """
    frame = pd.read_csv(path, header=None, comment="#")
    if frame.shape[1] not in (2, 3):
        raise DataFormatError(f"{path}: expected 2 or 3 columns per edge, found {frame.shape[1]}")
    edges = frame.to_numpy(dtype=np.float64)
    if edges.shape[1] == 2:
        edges = np.column_stack([edges, np.ones(len(edges))])
    ids = edges[:, :2]
    if len(edges) and (ids.min() < 0 or ids.max() >= num_nodes or np.any(ids != np.floor(ids))):
        raise DataFormatError(f"{path}: node ids must be integers in [0, {num_nodes})")
    return edges


def normalized_laplacian(edges: np.ndarray, num_nodes: int) -> np.ndarray:
    """I - D^-1/2 A D^-1/2 of the symmetrized graph; isolated nodes keep a unit diagonal."""
    adjacency = np.zeros((num_nodes, num_nodes))
    for u, v, w in edges:
        u, v = int(u), int(v)
        if u == v:
            continue
        adjacency[u, v] = adjacency[v, u] = max(adjacency[u, v], w)
    degree = adjacency.sum(axis=1)
    inv_sqrt = np.where(degree > 0, 1.0 / np.sqrt(np.where(degree > 0, degree, 1.0)), 0.0)
    return np.eye(num_nodes) - inv_sqrt[:, None] * adjacency * inv_sqrt[None, :]


def spectral_embedding(edges: np.ndarray, num_nodes: int, dim: int) -> np.ndarray:
    """
    Eigenvectors of the normalized Laplacian for the dim smallest nontrivial eigenvalues

    The first eigenvector (smallest eigenvalue) is dropped as trivial. Each
    column is sign-fixed so its first nonzero entry is positive.

    Returns:
        Array of shape [num_nodes, dim]; columns beyond the available
        eigenvectors are zero
    """
    _, vectors = eigh(normalized_laplacian(edges, num_nodes))
    picked = vectors[:, 1:1 + dim]
    for col in range(picked.shape[1]):
        nonzero = np.flatnonzero(np.abs(picked[:, col]) > 1e-12)
        if nonzero.size and picked[nonzero[0], col] < 0:
            picked[:, col] = -picked[:, col]
    if picked.shape[1] < dim:
        logger.warning(f"Graph with {num_nodes} nodes has only {picked.shape[1]} nontrivial eigenvectors; "
                       f"padding to {dim} columns with zeros")
        picked = np.hstack([picked, np.zeros((num_nodes, dim - picked.shape[1]))])
    return picked


def load_static_embeddings(path: Optional[PathLike], num_nodes: int, dim: int,
                           adjacency_path: Optional[PathLike] = None) -> Tensor:
    """
    Load the frozen static spatial embedding

    Args:
        path: CSV with num_nodes rows of dim comma-separated values; may be None or absent
        num_nodes: N
        dim: d
        adjacency_path: Edge list used for the spectral fallback when path is unavailable

    Returns:
        Tensor [N, d] without gradient

    Raises:
        DataFormatError: row/column count mismatch
        ConfigError: neither an embedding file nor an adjacency file is available
    """
    if path is not None and Path(path).exists():
        values = pd.read_csv(path, header=None).to_numpy(dtype=np.float64)
        if values.shape != (num_nodes, dim):
            raise DataFormatError(f"{path}: expected {num_nodes} rows x {dim} columns, found "
                                  f"{values.shape[0]} x {values.shape[1]}")
        logger.info(f"Static embeddings loaded from {path}")
        return Tensor(values, name="static")

    if adjacency_path is not None and Path(adjacency_path).exists():
        edges = read_adjacency(adjacency_path, num_nodes)
        logger.info(f"Static embeddings computed from the Laplacian of {adjacency_path} ({len(edges)} edges)")
        return Tensor(spectral_embedding(edges, num_nodes, dim), name="static")

    raise ConfigError(f"No static embedding file ({path}) and no adjacency file ({adjacency_path}) available")
