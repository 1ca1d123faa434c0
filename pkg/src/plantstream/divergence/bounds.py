"""Lower-bound expressions as plain calculators (hidden constants set to 1)."""

import enum
import math
from dataclasses import dataclass, field

from ..errors import InvalidParams


class Formula(enum.Enum):
    GeneralFramework = 1
    BicliqueMain = 2
    PatternPlanted = 3
    MicBudget = 4


_INPUTS = {
    Formula.GeneralFramework: ("n", "d", "p", "c", "k", "t"),
    Formula.BicliqueMain: ("n", "m", "q", "p", "k"),
    Formula.PatternPlanted: ("n", "p", "k"),
    Formula.MicBudget: ("p", "s", "n"),
}


@dataclass
class BoundPrediction:
    formula: Formula
    value_bits: float
    inputs: dict = field(default_factory=dict)

    def to_dict(self):
        return {"formula": self.formula.name, "value_bits": self.value_bits, "inputs": dict(self.inputs)}


def bound_prediction(formula, log_base=2.0, **inputs):
    """Evaluate one memory bound; values are orders of magnitude only."""
    if isinstance(formula, str):
        formula = Formula[formula]
    need = _INPUTS[formula]
    missing = [k for k in need if k not in inputs]
    if missing:
        raise InvalidParams(missing[0], f"{formula.name} needs {', '.join(need)}")
    v = {k: inputs[k] for k in need}
    for k, x in v.items():
        if not x > 0:
            raise InvalidParams(k, "must be positive")
    if formula is Formula.GeneralFramework:
        val = v["n"] * v["d"] / (v["p"] * v["c"] * v["k"] ** 2 * v["t"])
    elif formula is Formula.BicliqueMain:
        nm = v["n"] * v["m"]
        val = nm * v["q"] / (v["p"] * v["k"] ** 4 * (math.log(nm) / math.log(log_base)))
    elif formula is Formula.PatternPlanted:
        val = v["n"] ** 2 / (v["p"] * v["k"] ** 3)
    else:
        val = 2 * v["p"] * v["s"] * v["n"]
    if formula is Formula.BicliqueMain:
        v["log_base"] = log_base
    return BoundPrediction(formula, val, v)
