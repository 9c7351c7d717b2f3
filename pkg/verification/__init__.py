"""Verification package for model correctness checks and the scaling benchmark"""
from .verifier import ModelVerifier
from .benchmark import BenchResult, scaling_benchmark, time_forward_backward, loglog_slope

__all__ = ['ModelVerifier', 'BenchResult', 'scaling_benchmark', 'time_forward_backward', 'loglog_slope']
