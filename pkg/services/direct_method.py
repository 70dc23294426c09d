# services/direct_method.py
"""Direct-method engine.

Given b_k with |b_{k+1} - c b_k| <= alpha_k and sum c^{-k-1} alpha_k < inf,
c^{-k} b_k converges to some b with |b - b_0| <= beta = sum c^{-k-1} alpha_k.
"""

import math
from typing import Callable, Optional

from models.control_spec import DirectMethodConfig
from models.results import DirectMethodResult
from utils.errors import ConfigurationError, ContractViolationError
from utils.logger import get_logger

log = get_logger("direct_method")

SequenceProvider = Callable[[int], float]

# rounding allowance when checking |b_{k+1} - c b_k| <= alpha_k
CONTRACT_RTOL = 1e-13


def _weight(c: float, k: int, alpha_k: float) -> float:
    return c ** (-k - 1) * alpha_k


def _remaining_tail(next_weight: float, last_weight: float, tail_ratio: Optional[float]) -> float:
    """Bound (or estimate, without a ratio) for sum_{j >= k} c^{-j-1} alpha_j."""
    if next_weight == 0.0:
        return 0.0
    if tail_ratio is not None:
        return next_weight / (1.0 - tail_ratio)
    observed = next_weight / last_weight if last_weight > 0.0 else math.inf
    if observed >= 1.0:
        return math.inf
    return next_weight / (1.0 - observed)


def direct_method(
    b: SequenceProvider,
    c: float,
    alpha: SequenceProvider,
    cfg: DirectMethodConfig,
) -> DirectMethodResult:
    """Iterate c^{-k} b_k until the remaining tail drops below cfg.tol."""
    if c <= 0.0:
        raise ConfigurationError("c must be positive")
    if not math.isclose(cfg.c, c, rel_tol=1e-15):
        raise ConfigurationError(f"config was built for c={cfg.c}, called with c={c}")

    b_prev = float(b(0))
    first = b_prev
    trace = [(0, first)]
    beta = 0.0
    tail = math.inf
    all_zero = True
    certified = False
    iterations = 0

    alpha_k = float(alpha(0))
    for k in range(cfg.k_max):
        if alpha_k < 0.0 or math.isnan(alpha_k):
            raise ConfigurationError(f"alpha_{k} = {alpha_k} must be a nonnegative number")
        all_zero = all_zero and alpha_k == 0.0

        b_next = float(b(k + 1))
        gap = abs(b_next - c * b_prev)
        allowance = CONTRACT_RTOL * max(abs(b_next), abs(c * b_prev))
        if gap > alpha_k + allowance:
            raise ContractViolationError(
                f"|b_{k + 1} - c b_{k}| = {gap:.17g} exceeds alpha_{k} = {alpha_k:.17g}"
            )

        weight = _weight(c, k, alpha_k)
        beta += weight
        trace.append((k + 1, c ** (-(k + 1)) * b_next))
        iterations = k + 1
        b_prev = b_next

        alpha_k = float(alpha(k + 1))
        tail = _remaining_tail(_weight(c, k + 1, alpha_k), weight, cfg.tail_ratio)
        if tail < cfg.tol:
            certified = cfg.tail_ratio is not None or (all_zero and alpha_k == 0.0)
            break

    limit = trace[-1][1]
    if tail >= cfg.tol:
        log.warning(
            "⚠️ direct method stopped at k_max=%d with remaining tail %.3g >= tol %.3g; result not certified",
            cfg.k_max,
            tail,
            cfg.tol,
        )
    log.debug("direct method: limit %.17g after %d steps, beta %.3g", limit, iterations, beta + tail)

    return DirectMethodResult(
        limit=limit,
        beta=beta + tail,
        iterations=iterations,
        certified=certified,
        tail_bound=tail,
        first_term=first,
        trace=trace,
    )
