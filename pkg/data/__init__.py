"""Dataset ingest, splitting, windowing and synthetic data"""
from .dataset import (TrafficDataset, ingest, write_hstd1, write_csv, aggregate, write_region_labels,
                      read_region_labels, write_adjacency)
from .splits import Normalizer, Split, SplitData, split_and_normalize, split_sizes
from .windows import SampleBatch, WindowSet, windows
from .synth import synth, region_graph

__all__ = [
    'TrafficDataset', 'ingest', 'write_hstd1', 'write_csv', 'aggregate', 'write_region_labels',
    'read_region_labels', 'write_adjacency',
    'Normalizer', 'Split', 'SplitData', 'split_and_normalize', 'split_sizes',
    'SampleBatch', 'WindowSet', 'windows',
    'synth', 'region_graph',
]
