"""Streaming detectors with metered state, graph oracles and vertex-arrival reductions."""

from .graphs import (Graph, VertexArrivalAdapter, VertexArrivalEvent, adjacency_from_events,
                     densest_at_most_beta, densest_at_most_beta_exact, max_biclique_exact,
                     peeling_densest, sampled_densest, vertex_arrival_adapter)
from .reductions import (biclique_witness, density_witness, null_biclique_threshold,
                         reduction_to_density, reduction_to_max_biclique)
from .scan import ScanParams, SubsetScan, block_max_alternating, block_max_exact, scan_params
from .state import HEADER_BITS, Decision, DetectorState, Field, Quantizer, Verdict, bits_for
from .streaming import (BlockSquare, ConstantDetector, CoordinateSum, EdgeCounter,
                        PartitionWeight, StreamingDetector, precision_bits, run_detector)


def edge_count_detector(m, n, q, k):
    return EdgeCounter(m, n, q, k)


def partition_weight_detector(t, q, C, nm, k=0, m=None, width=None):
    return PartitionWeight(t, q, C, nm, k, m=m, width=width)


def coordinate_sum_detector(d, n, q, ell, alpha):
    return CoordinateSum(d, n, q, ell, alpha)


def block_square_detector(d, ell, alpha, n):
    return BlockSquare(d, ell, alpha, n)


def subset_scan_detector(n, d, ell, alpha, q, delta=0.1, **kw):
    return SubsetScan(n, d, ell, alpha, q, delta, **kw)
