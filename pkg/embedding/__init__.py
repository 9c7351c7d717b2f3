"""Embedding package for the data embedding layer"""
from .static import load_static_embeddings, read_adjacency, normalized_laplacian, spectral_embedding
from .layers import SpatialEmbedding, TemporalEmbedding, DataEmbedding, TimestampError

__all__ = [
    'load_static_embeddings', 'read_adjacency', 'normalized_laplacian', 'spectral_embedding',
    'SpatialEmbedding', 'TemporalEmbedding', 'DataEmbedding', 'TimestampError',
]
