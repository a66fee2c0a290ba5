"""Optimistic interval splitting to locate the maximum of a Brownian path.

The optimizer maintains a partition of [0, 1] into dyadic intervals. Each
interval carries an optimistic upper bound on the maximum of W over it:
the better endpoint value plus a confidence width eta(epsilon, length)
chosen so that, with high probability, every dyadic interval respects its
bound simultaneously. The loop repeatedly selects the interval with the
highest bound; if that interval's width term is already <= epsilon it
stops, otherwise it evaluates W at the interval midpoint and replaces the
interval with its two halves. The returned estimate is the best evaluated
point, with t = 0 (where W is 0 by definition) included as a free candidate.

Evaluation cost is self-limiting: no interval at depth >= h_max(epsilon)
is ever split, so a run performs at most 2**(h_max+1) evaluations.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction

from .brownian import BrownianPath, new_path

__all__ = [
    "MAX_DEPTH",
    "DyadicInterval",
    "RunResult",
    "compute_h_max",
    "eta",
    "run_oob",
    "run_oob_on_path",
    "ucb",
]

# Dyadic times k * 2**-h are exact doubles far beyond this depth; the cap
# exists to turn a runaway scan into a loud error instead of a hang.
MAX_DEPTH = 60


def eta(epsilon: float, delta: float) -> float:
    """Confidence width sqrt((5*delta/2) * ln(2/(epsilon*delta))).

    Defined only for positive arguments with epsilon*delta <= 1/2 (at
    equality the log argument is 4, still positive, so the boundary is
    allowed).
    """
    if epsilon <= 0.0 or delta <= 0.0:
        raise ValueError(f"epsilon and delta must be positive, got {epsilon}, {delta}")
    prod = epsilon * delta
    if prod > 0.5:
        raise ValueError(f"need epsilon*delta <= 1/2, got {prod}")
    return math.sqrt(2.5 * delta * math.log(2.0 / prod))


def ucb(wa: float, wb: float, epsilon: float, h: int) -> float:
    """Optimistic bound for a depth-h dyadic interval with endpoint values wa, wb."""
    return max(wa, wb) + eta(epsilon, 2.0 ** -h)


def compute_h_max(epsilon: float) -> int:
    """Smallest depth h with eta(epsilon, 2**-h) <= epsilon.

    Scans linearly from h = 0 rather than bisecting: eta is not assumed
    monotone in the depth. Requires 0 < epsilon < 1/2, which makes
    epsilon * 2**-h <= 1/2 valid at every depth.
    """
    if not 0.0 < epsilon < 0.5:
        raise ValueError(f"epsilon must satisfy 0 < epsilon < 1/2, got {epsilon}")
    for h in range(MAX_DEPTH + 1):
        if eta(epsilon, 2.0 ** -h) <= epsilon:
            return h
    raise RuntimeError(f"no depth h <= {MAX_DEPTH} has eta(epsilon, 2**-h) <= epsilon")


@dataclass(frozen=True)
class DyadicInterval:
    """Interval [k/2**h, (k+1)/2**h] with endpoint values and cached bound.

    ``eta_value`` is the run's confidence width at this depth and
    ``b_value = max(wa, wb) + eta_value``. Both are fixed at construction;
    the optimizer never updates an interval in place, it only replaces an
    interval by its two children.
    """

    h: int
    k: int
    wa: float
    wb: float
    eta_value: float
    b_value: float

    def __post_init__(self) -> None:
        if self.h < 0 or not 0 <= self.k < (1 << self.h):
            raise ValueError(f"invalid dyadic index (h={self.h}, k={self.k})")

    @classmethod
    def build(cls, h: int, k: int, wa: float, wb: float, width: float) -> "DyadicInterval":
        return cls(h=h, k=k, wa=wa, wb=wb, eta_value=width, b_value=max(wa, wb) + width)

    @property
    def a(self) -> float:
        return math.ldexp(self.k, -self.h)

    @property
    def b(self) -> float:
        return math.ldexp(self.k + 1, -self.h)

    @property
    def midpoint(self) -> float:
        return math.ldexp(2 * self.k + 1, -(self.h + 1))


@dataclass(frozen=True)
class RunResult:
    """Outcome of one optimizer run.

    ``trace`` lists every W evaluation as (t, W(t)) in evaluation order,
    starting with t = 1; ``n_evals`` is its length. ``t_hat`` maximizes W
    over the evaluated points together with the free candidate t = 0, so
    ``m_hat >= 0`` always. The uniform-grid baseline reuses this container
    with sentinel values ``epsilon = nan`` and ``h_max = -1`` since neither
    notion applies to it.
    """

    epsilon: float
    t_hat: float
    m_hat: float
    n_evals: int
    h_max: int
    trace: tuple[tuple[float, float], ...]
    seed: int


def run_oob(epsilon: float, seed: int, *, debug_checks: bool = False) -> RunResult:
    """Run the optimizer on a fresh path built from ``seed``.

    Requires 0 < epsilon < 1/2. Identical (epsilon, seed) always produce
    bit-identical results: the only randomness is the path's own stream,
    consumed one Gaussian per evaluation in a deterministic order.
    """
    if not 0.0 < epsilon < 0.5:
        raise ValueError(f"epsilon must satisfy 0 < epsilon < 1/2, got {epsilon}")
    return run_oob_on_path(epsilon, new_path(seed), debug_checks=debug_checks)


def run_oob_on_path(
    epsilon: float, path: BrownianPath, *, debug_checks: bool = False
) -> RunResult:
    """Same loop as :func:`run_oob` on a caller-provided path.

    The path is mutated: every queried point is stored in it. Queries are
    t = 1 first, then midpoints of whichever intervals get split, so a
    fresh path yields exactly the :func:`run_oob` result for its seed. A
    path that already holds evaluations simply turns those queries into
    lookups; the conditional law of everything drawn afterwards is
    unchanged.

    Selection uses a max-heap on b_value with ties broken toward smaller
    depth, then smaller index, making the whole trajectory deterministic.
    The loop stops when the selected (highest-b) interval has
    eta_value <= epsilon; other intervals are not consulted for stopping.
    With ``debug_checks`` every iteration re-verifies the selection against
    a full scan and checks that the interval set partitions [0, 1].
    """
    if not 0.0 < epsilon < 0.5:
        raise ValueError(f"epsilon must satisfy 0 < epsilon < 1/2, got {epsilon}")
    h_max = compute_h_max(epsilon)
    cap = 1 << (h_max + 1)

    trace: list[tuple[float, float]] = []

    def query(t: float) -> float:
        w = path.evaluate(t)
        trace.append((t, w))
        return w

    w0 = path.evaluate(0.0)  # stored at construction, never a draw
    w1 = query(1.0)

    eta_at: dict[int, float] = {0: eta(epsilon, 1.0)}
    root = DyadicInterval.build(0, 0, w0, w1, eta_at[0])
    # Heap entries (-b_value, h, k, interval): heapq pops the smallest
    # tuple, i.e. highest bound, then smallest depth, then smallest index.
    # (h, k) is unique, so the interval itself is never compared.
    heap: list[tuple[float, int, int, DyadicInterval]] = [
        (-root.b_value, root.h, root.k, root)
    ]

    while True:
        if debug_checks:
            _check_state(heap)
        top = heap[0][3]
        if top.eta_value <= epsilon:
            break
        heapq.heappop(heap)
        if top.h >= MAX_DEPTH:
            raise RuntimeError(f"split would exceed depth cap {MAX_DEPTH}")
        child_h = top.h + 1
        width = eta_at.get(child_h)
        if width is None:
            width = eta_at[child_h] = eta(epsilon, 2.0 ** -child_h)
        wm = query(top.midpoint)
        left = DyadicInterval.build(child_h, 2 * top.k, top.wa, wm, width)
        right = DyadicInterval.build(child_h, 2 * top.k + 1, wm, top.wb, width)
        heapq.heappush(heap, (-left.b_value, left.h, left.k, left))
        heapq.heappush(heap, (-right.b_value, right.h, right.k, right))
        if len(trace) > cap:
            raise RuntimeError(
                f"evaluation count exceeded the termination cap {cap}; "
                "this indicates a defect in the split or stop logic"
            )

    t_hat, m_hat = 0.0, w0
    for t, w in trace:
        if w > m_hat:
            t_hat, m_hat = t, w
    return RunResult(
        epsilon=epsilon,
        t_hat=t_hat,
        m_hat=m_hat,
        n_evals=len(trace),
        h_max=h_max,
        trace=tuple(trace),
        seed=path.seed,
    )


def _check_state(heap: list[tuple[float, int, int, DyadicInterval]]) -> None:
    """Debug scan: heap front is the true argmax and the set tiles [0, 1]."""
    front = min(entry[:3] for entry in heap)
    if heap[0][:3] != front:
        raise AssertionError(f"heap front {heap[0][:3]} is not the selection {front}")
    total = sum(Fraction(1, 1 << entry[3].h) for entry in heap)
    if total != 1:
        raise AssertionError(f"interval set covers {total}, expected 1")
    starts = sorted((entry[3].h, entry[3].k) for entry in heap)
    seen = Fraction(0)
    for h, k in sorted(starts, key=lambda hk: Fraction(hk[1], 1 << hk[0])):
        if Fraction(k, 1 << h) != seen:
            raise AssertionError(f"gap or overlap at interval (h={h}, k={k})")
        seen += Fraction(1, 1 << h)
