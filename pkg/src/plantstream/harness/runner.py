"""Seeded multi-pass experiment runner with memory metering."""

import dataclasses
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import _rng
from ..detectors import (BlockSquare, ConstantDetector, CoordinateSum, Decision, EdgeCounter,
                         PartitionWeight, StreamingDetector, SubsetScan, Verdict)
from ..distributions import Arm, Kind, ProblemSpec, apply_monotone_adversary, make_stream
from ..distributions.problem import BOOLEAN_KINDS
from ..errors import IncompatibleDetector, InvalidParams, PlantStreamError, TrialFailure
from .stats import wilson_interval

CONFIDENCE = 0.99
INF = "inf"


# detectors -----------------------------------------------------------------

class OracleDetector(StreamingDetector):
    """Reads the revealed instance; a sanity baseline with perfect accuracy."""

    tag = 6
    name = "oracle"

    def __init__(self, instance):
        super().__init__()
        self.planted = instance is not None and instance.arm is Arm.Planted

    def update(self, start, rows):
        self.row_index = start + len(rows)

    def verdict(self):
        d = Decision.Planted if self.planted else Decision.Null
        return Verdict(d, float(self.planted), 0.5)


ALL = frozenset(Kind)


def _edge_count(spec, p, inst):
    return EdgeCounter(spec.rows, spec.width, p.get("q", spec.noise_q), p.get("k", spec.k),
                       recount=p.get("recount", False))


def _partition_weight(spec, p, inst):
    return PartitionWeight(p.get("t", spec.t), p.get("q", spec.noise_q),
                           p.get("C", spec.C), p.get("nm", spec.nm),
                           p.get("k", spec.k), m=spec.rows, width=spec.width)


def _coordinate_sum(spec, p, inst):
    return CoordinateSum(spec.width, spec.rows, p.get("q", spec.q), p.get("ell", spec.ell),
                         p.get("alpha", spec.alpha))


def _block_square(spec, p, inst):
    return BlockSquare(spec.width, p.get("ell", spec.ell), p.get("alpha", spec.alpha),
                       spec.rows)


def _subset_scan(spec, p, inst):
    return SubsetScan(spec.rows, spec.width, p.get("ell", spec.ell), p.get("alpha", spec.alpha),
                      p.get("q", spec.q), p.get("delta", 0.1), mode=p.get("mode", "auto"),
                      seed=p.get("seed", 0), restarts=p.get("restarts", 32))


def _constant(spec, p, inst):
    return ConstantDetector(p.get("decision", "Null"))


def _oracle(spec, p, inst):
    return OracleDetector(inst)


# name -> (factory(spec, params, instance), compatible kinds)
DETECTORS = {
    "edge_count": (_edge_count, frozenset(BOOLEAN_KINDS)),
    "partition_weight": (_partition_weight, frozenset(k for k in BOOLEAN_KINDS if k.partitioned)),
    "coordinate_sum": (_coordinate_sum, frozenset({Kind.SparseMean, Kind.PartitionSparseMean})),
    "block_square": (_block_square, frozenset({Kind.SparsePCA, Kind.BlockSparsePCA, Kind.PartitionPCA})),
    "subset_scan": (_subset_scan, frozenset({Kind.SparseMean, Kind.PartitionSparseMean})),
    "constant": (_constant, ALL),
    "oracle": (_oracle, ALL),
}


def build_detector(name, spec, params=None, instance=None):
    if name not in DETECTORS:
        raise InvalidParams("detector", f"unknown detector {name!r}; choose from {sorted(DETECTORS)}")
    factory, kinds = DETECTORS[name]
    if spec.kind not in kinds:
        raise IncompatibleDetector(f"detector {name} does not apply to {spec.kind.name}")
    return factory(spec, dict(params or {}), instance)


# reports -------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    problem: ProblemSpec
    detector: str = "edge_count"
    detector_params: dict = field(default_factory=dict)
    trials: int = 200
    passes: int = 1
    seed: int = 0
    out: str = ""
    reveal: bool = False
    stratified: bool = True
    workers: int = 1
    adversary_k_prime: int = -1  # negative: no adversary

    def validate(self):
        if self.trials < 1:
            raise InvalidParams("trials", "need at least one trial")
        if self.passes < 1:
            raise InvalidParams("passes", "need at least one pass")
        if self.workers < 1:
            raise InvalidParams("workers", "need at least one worker")
        self.problem.validate()
        build_detector(self.detector, self.problem, self.detector_params)


@dataclass
class MemoryReport:
    max_state_bits: int
    per_pass: list
    checkpoints: int = 0

    def to_dict(self):
        return dataclasses.asdict(self)


@dataclass
class AdvantageReport:
    acc_null: float
    acc_planted: float
    advantage: float
    wilson_ci_99: tuple
    trials: int
    n_null: int
    n_planted: int

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["wilson_ci_99"] = list(self.wilson_ci_99)
        return d


def multi_pass_run(detector, source, p, trace=None):
    """Feed every row of ``source`` to ``detector`` ``p`` times; state carries over between passes.

    The state is serialized at the start of each pass and after every consumed
    block. ``trace`` (a list) collects the encoded states when given.
    """
    if p < 1:
        raise InvalidParams("passes", "need at least one pass")
    per_pass = []
    checkpoints = 0
    for ell in range(p):
        source.rewind()
        detector.begin_pass(ell)
        states = [detector.state()]
        for start, rows in source.iter_chunks():
            detector.update(start, rows)
            states.append(detector.state())
        detector.end_pass()
        sizes = [s.bit_size() for s in states]
        if trace is not None:
            trace.extend(s.encode() for s in states)
        checkpoints += len(states)
        per_pass.append(max(sizes))
    return detector.verdict(), MemoryReport(max(per_pass), per_pass, checkpoints)


def arm_schedule(trials, seed, stratified=True):
    """Arm of every trial: an exact half/half shuffle, or independent fair coins."""
    rng = _rng.generator(seed, _rng.ARMS)
    if stratified:
        arms = np.array([i % 2 for i in range(trials)])
        return rng.permutation(arms).tolist()
    return rng.integers(0, 2, size=trials).tolist()


def _one_trial(cfg, i, arm):
    seed = _rng.derive_seed(cfg.seed, _rng.TRIAL, i)
    try:
        src, inst = make_stream(cfg.problem, Arm(arm), seed)
        if cfg.adversary_k_prime >= 0:
            src = apply_monotone_adversary(src, inst, cfg.adversary_k_prime)
        det = build_detector(cfg.detector, cfg.problem, cfg.detector_params, inst)
        verdict, mem = multi_pass_run(det, src, cfg.passes)
    except PlantStreamError as e:
        raise TrialFailure(f"trial {i} (seed {seed}) failed: {type(e).__name__}: {e}") from e
    return verdict.decision.value == arm, mem


def run_trials(cfg, trial_indices=None):
    """Run every trial of ``cfg`` and aggregate both arms; any trial error aborts the set."""
    cfg.validate()
    arms = arm_schedule(cfg.trials, cfg.seed, cfg.stratified)
    order = list(range(cfg.trials)) if trial_indices is None else list(trial_indices)
    if sorted(order) != list(range(cfg.trials)):
        raise InvalidParams("trial_indices", "must be a permutation of the trial range")
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as ex:
            results = list(ex.map(_one_trial, [cfg] * len(order), order, [arms[i] for i in order]))
    else:
        results = [_one_trial(cfg, i, arms[i]) for i in order]
    by_index = dict(zip(order, results))
    # ordered fold by trial index
    correct = [0, 0]
    counts = [0, 0]
    peak = []
    for i in range(cfg.trials):
        ok, mem = by_index[i]
        counts[arms[i]] += 1
        correct[arms[i]] += int(ok)
        peak.append(mem.per_pass)
    acc = [correct[a] / counts[a] if counts[a] else 0.0 for a in (0, 1)]
    adv = (acc[0] + acc[1]) / 2
    lo, hi = wilson_interval(correct[0] + correct[1], cfg.trials, CONFIDENCE)
    adv_report = AdvantageReport(acc[0], acc[1], adv, (lo, hi), cfg.trials, counts[0], counts[1])
    per_pass = [max(p[ell] for p in peak) for ell in range(cfg.passes)]
    mem = MemoryReport(max(per_pass), per_pass, sum(by_index[i][1].checkpoints for i in by_index))
    return adv_report, mem


def compare_to_bound(memory_report, prediction):
    """Measured bits next to the calculator's prediction; informational only."""
    measured = memory_report.max_state_bits
    pred = prediction.value_bits
    ratio = INF if pred == 0 else measured / pred
    if isinstance(ratio, float) and not math.isfinite(ratio):
        ratio = INF
    return {"measured_bits": measured, "predicted_bits": pred, "ratio": ratio,
            "formula": prediction.formula.name, "inputs": dict(prediction.inputs)}


def comparison_to_json(record):
    return json.dumps(record, sort_keys=True)
