"""Lazily sampled Brownian motion and the exact law of a bridge maximum.

A :class:`BrownianPath` materializes a standard Brownian motion W on [0, 1]
on demand. W(0) = 0 is known for free; the first query past the known range
draws a Gaussian increment; any interior query draws from the Brownian
bridge conditional law given its two stored neighbours. Conditioning is
exact, so the joint law of the revealed values does not depend on the
order of queries, and stored values never change once drawn.

The second half of the module implements the classical law of the maximum
of a Brownian bridge on [a, b] with endpoint values (wa, wb):

    P(sup_{[a,b]} W > x | W(a)=wa, W(b)=wb) = exp(-2 (x - wa)(x - wb) / (b - a))

valid for x >= max(wa, wb), both as an exceedance probability and as an
exact inverse-CDF sampler. Combining one such draw per cell of a partition
yields exact conditional samples of the global maximum given any finite
evaluation set, which is what the verification harnesses rely on.
"""

from __future__ import annotations

import math
from bisect import bisect_left

import numpy as np

from .rng import RandomSource

__all__ = [
    "BrownianPath",
    "bridge_max_exceed_prob",
    "bridge_max_from_uniform",
    "bridge_max_from_uniforms",
    "bridge_max_sample",
    "new_path",
]


class BrownianPath:
    """One Brownian realization on [0, 1], revealed lazily and consistently.

    Holds the sorted set of evaluated times with their values, plus the
    :class:`RandomSource` that produced them. Re-querying a stored time
    returns the stored value and consumes no randomness. The source is
    exposed as ``rng`` so a harness can continue the same stream for
    auxiliary draws after a run (for instance conditional maximum
    sampling over the final evaluation set).
    """

    __slots__ = ("rng", "_times", "_values", "_known")

    def __init__(self, rng: RandomSource) -> None:
        self.rng = rng
        self._times: list[float] = [0.0]
        self._values: list[float] = [0.0]
        self._known: dict[float, float] = {0.0: 0.0}

    def __repr__(self) -> str:
        return f"BrownianPath(seed={self.seed}, value_count={self.value_count})"

    @property
    def seed(self) -> int:
        return self.rng.seed

    @property
    def value_count(self) -> int:
        """Number of stored (t, W(t)) pairs, including W(0) = 0."""
        return len(self._times)

    def evaluations(self) -> list[tuple[float, float]]:
        """All stored evaluations as (t, W(t)) pairs in increasing t."""
        return list(zip(self._times, self._values))

    def evaluate(self, t: float) -> float:
        """Return W(t), drawing it from the exact conditional law if new.

        A fresh time strictly between stored neighbours a < t < b with
        values wa, wb draws Gaussian with mean wa + (t-a)/(b-a)*(wb-wa)
        and variance (t-a)(b-t)/(b-a), the bridge law. A time beyond the
        largest stored point s draws Gaussian with mean W(s) and variance
        t - s. Exactly one Gaussian is consumed per fresh time, none for
        a repeat query.
        """
        t = float(t)
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"t must lie in [0, 1], got {t}")
        stored = self._known.get(t)
        if stored is not None:
            return stored
        i = bisect_left(self._times, t)
        if i == len(self._times):
            s = self._times[-1]
            mean = self._values[-1]
            var = t - s
        else:
            a, b = self._times[i - 1], self._times[i]
            wa, wb = self._values[i - 1], self._values[i]
            mean = wa + (t - a) / (b - a) * (wb - wa)
            var = (t - a) * (b - t) / (b - a)
        w = mean + math.sqrt(var) * self.rng.normal()
        self._times.insert(i, t)
        self._values.insert(i, w)
        self._known[t] = w
        return w


def new_path(seed: int) -> BrownianPath:
    """Fresh path holding only W(0) = 0, with its own seeded source."""
    return BrownianPath(RandomSource(seed))


def _check_interval(a: float, b: float) -> None:
    if not b > a:
        raise ValueError(f"need a < b, got a={a}, b={b}")


def bridge_max_exceed_prob(a: float, b: float, wa: float, wb: float, x: float) -> float:
    """P(sup of W over [a, b] exceeds x), given W(a)=wa and W(b)=wb.

    Returns exp(-2 (x - wa)(x - wb) / (b - a)). The closed form only holds
    for x at or above both endpoint values; below them the probability is
    not given by this expression, so such x is rejected.
    """
    _check_interval(a, b)
    if x < max(wa, wb):
        raise ValueError(
            f"x must be >= max(wa, wb) = {max(wa, wb)}, got {x}: "
            "the exceedance law is invalid below the endpoints"
        )
    return math.exp(-2.0 * (x - wa) * (x - wb) / (b - a))


def bridge_max_from_uniform(u: float, a: float, b: float, wa: float, wb: float) -> float:
    """Invert the bridge-maximum exceedance law at level u in (0, 1].

    With m = (wa+wb)/2 and d = (wa-wb)/2, the unique x >= max(wa, wb)
    whose exceedance probability equals u is

        x = m + sqrt(d**2 - (b - a) * ln(u) / 2).

    u = 1 returns max(wa, wb) exactly; for other u the result is clamped
    so it never falls below the endpoints when the last bit rounds down.
    """
    _check_interval(a, b)
    if not 0.0 < u <= 1.0:
        raise ValueError(f"u must lie in (0, 1], got {u}")
    hi = wa if wa >= wb else wb
    if u == 1.0:
        return hi
    m = 0.5 * (wa + wb)
    d = 0.5 * (wa - wb)
    c = -0.5 * (b - a) * math.log(u)
    x = m + math.sqrt(d * d + c)
    return x if x > hi else hi


def bridge_max_sample(rng: RandomSource, a: float, b: float, wa: float, wb: float) -> float:
    """Exact draw of sup of W over [a, b] given the endpoint values.

    Consumes exactly one (0, 1] uniform from ``rng`` and feeds it to
    :func:`bridge_max_from_uniform`. The result is always >= max(wa, wb)
    and is distributed as the maximum of the bridge.
    """
    _check_interval(a, b)
    return bridge_max_from_uniform(rng.uniform_open(), a, b, wa, wb)


def bridge_max_from_uniforms(
    u: np.ndarray, lengths: np.ndarray, left: np.ndarray, right: np.ndarray
) -> np.ndarray:
    """Vectorized bridge-maximum inversion over stacked cells.

    ``left``, ``right``, ``lengths`` describe one cell per trailing-axis
    position; ``u`` holds exceedance levels in (0, 1] and may carry extra
    leading axes (one row per independent sample of every cell). Results
    are clamped to the cell endpoint maxima. Elementwise numpy log/sqrt
    may round differently from the scalar math library, so bit-equality
    with :func:`bridge_max_from_uniform` is not promised, only agreement
    to ordinary floating-point accuracy.
    """
    m = 0.5 * (left + right)
    d = 0.5 * (left - right)
    x = m + np.sqrt(d * d - 0.5 * lengths * np.log(u))
    return np.maximum(x, np.maximum(left, right))
