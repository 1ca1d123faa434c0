import csv
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import wilson_mp
from plantstream.detectors import Decision, EdgeCounter, Field, StreamingDetector, Verdict
from plantstream.distributions import ProblemSpec, make_stream
from plantstream.divergence import bound_prediction
from plantstream.errors import IncompatibleDetector, InvalidParams
from plantstream.harness import (ExperimentConfig, MemoryReport, arm_schedule, build_detector,
                                 compare_to_bound, dump_config, multi_pass_run, parse_config,
                                 run_trials, wilson_interval)
from plantstream.harness.cli import TRIALS_COLUMNS, main
from plantstream.harness.runner import comparison_to_json

SMALL = ProblemSpec("Biclique", n=64, m=64, k=24)


def cfg(**kw):
    base = dict(problem=SMALL, detector="edge_count", trials=20, seed=5)
    base.update(kw)
    return ExperimentConfig(**base)


# run_trials ---------------------------------------------------------------

@pytest.mark.parametrize("trials", [2, 10, 31])
def test_constant_detector_is_coin(trials):
    adv, _ = run_trials(cfg(detector="constant", trials=trials))
    if trials % 2 == 0:
        assert adv.advantage == 0.5
    assert adv.acc_null == 1.0 and adv.acc_planted == 0.0


def test_oracle_detector_is_perfect():
    adv, _ = run_trials(cfg(detector="oracle"))
    assert adv.advantage == 1.0
    lo, hi = adv.wilson_ci_99
    assert lo <= adv.advantage <= hi == 1.0


def test_reports_are_deterministic():
    a = run_trials(cfg())
    b = run_trials(cfg())
    assert json.dumps(a[0].to_dict()) == json.dumps(b[0].to_dict())
    assert a[1] == b[1]


def test_trial_order_does_not_matter():
    c = cfg(trials=12)
    base = run_trials(c)
    order = np.random.default_rng(1).permutation(12).tolist()
    assert run_trials(c, trial_indices=order) == base
    with pytest.raises(InvalidParams):
        run_trials(c, trial_indices=[0, 0, 1])


def test_workers_match_serial():
    assert run_trials(cfg(trials=8, workers=2)) == run_trials(cfg(trials=8))


@pytest.mark.parametrize("T", [10, 101, 400])
def test_arm_balance(T):
    assert sum(arm_schedule(T, 3)) == T // 2
    drawn = sum(arm_schedule(T, 3, stratified=False))
    assert abs(drawn - T / 2) <= 3 * math.sqrt(T)


def test_memory_report_covers_every_checkpoint():
    adv, mem = run_trials(cfg(passes=2))
    assert len(mem.per_pass) == 2 and mem.max_state_bits == max(mem.per_pass)
    assert mem.max_state_bits == 64 + math.ceil(math.log2(64 * 64 + 1))


def test_incompatible_and_unknown_detector():
    with pytest.raises(IncompatibleDetector):
        build_detector("block_square", SMALL)
    with pytest.raises(InvalidParams):
        build_detector("nope", SMALL)
    with pytest.raises(InvalidParams):
        cfg(trials=0).validate()


# multi-pass ---------------------------------------------------------------

def test_single_pass_matches_plain_run():
    src, _ = make_stream(SMALL, "Planted", 2)
    t1, t2 = [], []
    v1, m1 = multi_pass_run(EdgeCounter(64, 64, 0.5, 24), src, 1, trace=t1)
    det = EdgeCounter(64, 64, 0.5, 24)
    src.rewind()
    det.begin_pass(0)
    t2.append(det.state().encode())
    for start, rows in src.iter_chunks():
        det.update(start, rows)
        t2.append(det.state().encode())
    assert t1 == t2 and v1 == det.verdict()


class MeanThenVariance(StreamingDetector):
    """Pass 0 sums the entries, pass 1 sums squared deviations from the mean."""

    name = "mean_var"

    def __init__(self):
        super().__init__()
        self.total = 0.0
        self.count = 0
        self.sq = 0.0
        self.seen = {0: [], 1: []}

    def update(self, start, rows):
        self.seen[self.pass_index].append(np.array(rows))
        if self.pass_index == 0:
            self.total += float(rows.sum())
            self.count += rows.size
        else:
            self.sq += float(((rows - self.total / self.count) ** 2).sum())
        self.row_index = start + len(rows)

    def fields(self):
        return (Field("count", self.count, 32),)

    def verdict(self):
        return Verdict(Decision.Null, self.sq / self.count, 0.0)


def test_two_pass_detector_sees_identical_rows():
    src, _ = make_stream(ProblemSpec("SparseMean", n=200, d=30, ell=3), "Planted", 4)
    det = MeanThenVariance()
    v, mem = multi_pass_run(det, src, 2)
    a, b = np.concatenate(det.seen[0]), np.concatenate(det.seen[1])
    assert np.array_equal(a, b)
    assert v.statistic == pytest.approx(a.var())
    assert len(mem.per_pass) == 2


def test_doubling_passes_keeps_verdict():
    for seed in range(4):
        src, _ = make_stream(SMALL, "Planted" if seed % 2 else "Null", seed)
        v1, _ = multi_pass_run(EdgeCounter(64, 64, 0.5, 24), src, 1)
        v2, _ = multi_pass_run(EdgeCounter(64, 64, 0.5, 24), src, 2)
        v4, _ = multi_pass_run(EdgeCounter(64, 64, 0.5, 24, recount=True), src, 4)
        assert v1 == v2 == v4


# bound comparison -----------------------------------------------------------

def test_compare_to_bound_reports_ratio():
    mem = MemoryReport(85, [85])
    pred = bound_prediction("BicliqueMain", n=1024, m=1024, q=0.5, p=1, k=128)
    rec = compare_to_bound(mem, pred)
    assert rec["ratio"] == pytest.approx(85 / pred.value_bits)
    assert json.loads(comparison_to_json(rec)) == json.loads(json.dumps(rec))


def test_compare_to_bound_zero_prediction():
    class Zero:
        formula = type("F", (), {"name": "MicBudget"})
        value_bits = 0
        inputs = {}
    rec = compare_to_bound(MemoryReport(10, [10]), Zero())
    assert rec["ratio"] == "inf"
    assert json.loads(comparison_to_json(rec))["ratio"] == "inf"


# wilson ---------------------------------------------------------------------

def test_wilson_endpoints():
    assert wilson_interval(0, 37)[0] == 0
    assert wilson_interval(37, 37)[1] == 1


def test_wilson_matches_independent_formula():
    lo, hi = wilson_interval(50, 100, 0.99)
    rlo, rhi = wilson_mp(50, 100, 0.99)
    assert abs(lo - rlo) < 1e-9 and abs(hi - rhi) < 1e-9


@given(n=st.integers(1, 500), frac=st.floats(0, 1), conf=st.sampled_from([0.9, 0.95, 0.99]))
def test_wilson_contains_estimate(n, frac, conf):
    s = round(frac * n)
    lo, hi = wilson_interval(s, n, conf)
    assert 0 <= lo <= s / n <= hi <= 1
    rlo, rhi = wilson_mp(s, n, conf)
    assert abs(lo - max(0.0, rlo)) < 1e-9 and abs(hi - min(1.0, rhi)) < 1e-9


def test_wilson_rejects_bad_counts():
    with pytest.raises(InvalidParams):
        wilson_interval(5, 3)


# config files ---------------------------------------------------------------

def test_config_round_trip_example():
    text = """
    # a comment
    kind = Biclique
    n = 1024
    m = 1024
    k = 128
    detector = edge_count
    trials = 200
    seed = 7
    detector.recount = true
    """
    c = parse_config(text)
    assert c.problem.k == 128 and c.detector_params == {"recount": True}
    assert parse_config(dump_config(c)) == c


@settings(max_examples=40, deadline=None)
@given(k=st.integers(1, 16), trials=st.integers(1, 1000), passes=st.integers(1, 5),
       seed=st.integers(0, 2 ** 63 - 1), reveal=st.booleans(), q=st.sampled_from([0.25, 0.5]))
def test_config_round_trip_property(k, trials, passes, seed, reveal, q):
    c = parse_config("", {"kind": "Biclique", "n": 32, "m": 20, "k": k, "q": q, "trials": trials,
                          "passes": passes, "seed": seed, "reveal": reveal,
                          "detector.k": k})
    assert parse_config(dump_config(c)) == c


@pytest.mark.parametrize("text", ["kind = Biclique\nn = 4\nm = 4\nk = 1\ncolour = red\n",
                                  "kind = Biclique\nn = 4\nn = 5\n",
                                  "n = 4\n",
                                  "kind = Biclique\nnonsense line\n"])
def test_config_errors(text):
    with pytest.raises(InvalidParams):
        parse_config(text)


# CLI -----------------------------------------------------------------------

def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_cli_trials_csv(tmp_path):
    conf = _write(tmp_path, "e.cfg", "kind = Biclique\nn = 64\nm = 64\nk = 24\ndetector = oracle\n")
    out = str(tmp_path / "r.csv")
    assert main(["trials", "--config", conf, "--trials", "6", "--format", "csv", "--out", out]) == 0
    rows = list(csv.DictReader(open(out)))
    assert tuple(rows[0]) == TRIALS_COLUMNS and float(rows[0]["advantage"]) == 1.0


def test_cli_invalid_params_exit_2(tmp_path, capsys):
    conf = _write(tmp_path, "e.cfg", "kind = Biclique\nn = 64\nm = 64\nk = 0\n")
    assert main(["trials", "--config", conf]) == 2
    assert main(["trials", "--set", "kind=Biclique", "--set", "n=8", "--set", "m=8",
                 "--set", "k=2", "--set", "detector=block_square"]) == 2
    assert main(["bound", "--formula", "BicliqueMain", "--set", "n=4"]) == 2
    assert "error" in capsys.readouterr().err


def test_cli_trial_failure_exit_3(tmp_path):
    # the monotone adversary does not apply to Gaussian streams
    conf = _write(tmp_path, "e.cfg", "kind = SparseMean\nn = 10\nd = 8\nell = 2\n"
                  "detector = constant\nadversary_k_prime = 0\n")
    assert main(["trials", "--config", conf, "--trials", "2"]) == 3


@pytest.mark.parametrize("reveal", [False, True])
def test_cli_gen_then_detect(tmp_path, capsys, reveal):
    stream = str(tmp_path / "s.pst")
    args = ["gen", "--set", "kind=Biclique", "--set", "n=32", "--set", "m=32", "--set", "k=8",
            "--seed", "3", "--arm", "Planted", "--out", stream]
    assert main(args + (["--reveal"] if reveal else [])) == 0
    capsys.readouterr()
    assert main(["detect", stream, "--detector", "oracle"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["decision"] == ("Planted" if reveal else "Null")
    assert main(["detect", stream, "--detector", "edge_count", "--passes", "2"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["passes"] == 2 and rec["max_state_bits"] == 64 + 11


def test_cli_divergence_and_bound(capsys):
    assert main(["divergence", "kl-scan", "--n", "16", "64"]) == 0
    recs = json.loads(capsys.readouterr().out)
    assert len(recs) == 2 and recs[0]["kl_bits"] > recs[1]["kl_bits"]
    assert main(["divergence", "ratio-max", "--set", "t=12", "--set", "k=2", "--set", "q=0.5",
                 "--set", "window=[0,12]"]) == 0
    assert json.loads(capsys.readouterr().out)[0]["max_ratio"] == pytest.approx(4.0)
    assert main(["bound", "--formula", "PatternPlanted", "--set", "n=100", "--set", "p=1",
                 "--set", "k=10"]) == 0
    assert json.loads(capsys.readouterr().out)[0]["value_bits"] == pytest.approx(10.0)


def test_cli_report_merges(tmp_path):
    a = _write(tmp_path, "a.csv", "x,y\n1,2\n")
    b = _write(tmp_path, "b.csv", "x,y\n3,4\n")
    c = _write(tmp_path, "c.csv", "x,z\n3,4\n")
    out = str(tmp_path / "m.csv")
    assert main(["report", a, b, "--out", out]) == 0
    assert [r["x"] for r in csv.DictReader(open(out))] == ["1", "3"]
    assert main(["report", a, c]) == 2
