"""Small statistics helpers shared across modules."""

import math

from scipy.stats import norm

from .errors import InvalidParams


def wilson_interval(successes, trials, confidence=0.99):
    """Wilson score interval for a binomial proportion."""
    if trials < 1 or not 0 <= successes <= trials:
        raise InvalidParams("successes", "need 0 <= successes <= trials and trials >= 1")
    z = norm.ppf(0.5 + confidence / 2)
    p = successes / trials
    z2n = z * z / trials
    centre = (p + z2n / 2) / (1 + z2n)
    half = z / (1 + z2n) * math.sqrt(p * (1 - p) / trials + z2n / (4 * trials))
    lo = max(0.0, centre - half)
    hi = min(1.0, centre + half)
    if successes == 0:
        lo = 0.0
    if successes == trials:
        hi = 1.0
    return float(lo), float(hi)
