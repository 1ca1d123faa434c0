from .laws import BernoulliBlock, GaussianBlock, PcaBlock
from .problem import (Arm, Kind, Padding, PlantedInstance, ProblemSpec, Row, RowMode,
                      pad_dimension)
from .streams import StreamSource, apply_monotone_adversary, consistent_permute, make_stream
from .truncation import (N_MAX, TruncatedSampler, TruncationSpec, TruncKind,
                         in_truncation_set, sample_truncated)
