from .binomial import (EdgeworthApprox, binomial_pmf, central_tail_split,
                       discretized_gaussian_pmf, edgeworth, edgeworth_binomial_approx,
                       edgeworth_max_error, edgeworth_poly, kl_binomial_gaussian,
                       kl_binomial_gaussian_scan)
from .bounds import BoundPrediction, Formula, bound_prediction
from .pmf import Pmf, divergences
from .ratios import (DensityRatioReport, biclique_ratio_max, gaussian_mixture_ratio,
                     pca_density, pca_mixture_ratio)
from .tails import TailEstimate, trunc_tail_prob
