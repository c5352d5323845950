"""Per-parcel contribution probabilities and the load prediction algorithm.

Each parcel's contribution to the load at slot k+j is a Bernoulli variable
whose parameter depends on the parcel's latest known status:

* already delivered: ratio of pickup survival probabilities;
* in transit (any earlier status): probability of being delivered within
  (k, k+j] and not picked up by k+j, conditioned on the transition out of
  the current status not having happened by k;
* not yet ordered: the same joint event for a virtual parcel entering the
  chain at a future slot, mixed over carriers/retailers and a Poisson
  number of orders.

All nested sums over intermediate transition times are evaluated by a
forward pass over arrival-time distributions, never by literal nested
loops.  The load pmf is the convolution of the per-parcel Bernoulli pmfs
with the future-order pmf.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .arrivals import OrderIntensity, poisson_pmf, poisson_truncation
from .errors import ImpossibleEvidence, MissingKernel, ValidationError
from .estimation import SelectionModel
from .pmf import HoldingTimePmf, LoadPmf, convolve, point_forecast
from .records import ParcelRecord

__all__ = [
    "PmfAt",
    "prob_still_stored",
    "prob_delivered_and_stored_last_hop",
    "prob_delivered_and_stored_multi_hop",
    "prob_future_order_contributes",
    "chain_prob_g",
    "future_orders_pmf",
    "predict_load_pmf",
    "ForecastResult",
    "convolve",
    "point_forecast",
]

# pmf_at(n, t) -> holding-time pmf of status n entered at slot t,
# with routing attributes (carrier/retailer/pup) already bound.
PmfAt = Callable[[int, int], HoldingTimePmf]

_EPS = 1e-15


def bind_kernel(kernel, carrier=None, retailer=None, pup=None) -> PmfAt:
    """Close a transition kernel over one parcel's routing attributes."""

    def pmf_at(n: int, t: int) -> HoldingTimePmf:
        return kernel.pmf_at(n, t, carrier=carrier, retailer=retailer, pup=pup)

    return pmf_at


def prob_still_stored(pmf_at: PmfAt, n_statuses: int, t_delivered: int, k: int, j: int) -> float:
    """P(parcel still stored at k+j | delivered at t_delivered, not picked up by k).

    Ratio of the pickup-time survival at k+j to the survival at k.
    """
    if j < 0:
        raise ValidationError("horizon j must be >= 0")
    f = pmf_at(n_statuses - 1, t_delivered)
    denom = f.survival(k - t_delivered)
    if denom <= _EPS:
        raise ImpossibleEvidence(
            f"pickup pmf says the parcel delivered at {t_delivered} must have left by {k}"
        )
    # tiny tail sums can make the ratio overshoot 1 by a few ulps
    return min(1.0, f.survival(k + j - t_delivered) / denom)


def _forward_arrivals(
    pmf_at: PmfAt, start_status: int, arr: np.ndarray, t_lo: int, t_hi: int, n_target: int
) -> np.ndarray:
    """Propagate an arrival-time distribution forward to ``n_target``.

    ``arr[t - t_lo]`` is the probability of entering ``start_status`` exactly
    at slot t; the result is the same representation for ``n_target``.
    Arrival times beyond ``t_hi`` are dropped (they cannot lead to delivery
    within the horizon).
    """
    size = t_hi - t_lo + 1
    for n in range(start_status, n_target):
        nxt = np.zeros(size)
        for idx in np.nonzero(arr)[0]:
            t = t_lo + idx
            probs = pmf_at(n, t).probs
            width = min(len(probs) - 1, t_hi - t)
            if width >= 1:
                nxt[idx + 1 : idx + 1 + width] += arr[idx] * probs[1 : width + 1]
        arr = nxt
    return arr


def _joint_delivered_not_picked(
    pmf_at: PmfAt, n_statuses: int, arr: np.ndarray, t_lo: int, k: int, j: int, start_status: int
) -> float:
    """Sum over delivery slots of arrival probability times pickup survival."""
    arrivals = _forward_arrivals(pmf_at, start_status, arr, t_lo, k + j, n_statuses - 1)
    total = 0.0
    for idx in np.nonzero(arrivals)[0]:
        t_del = t_lo + idx
        if t_del > k:  # delivery must fall inside (k, k+j]
            total += arrivals[idx] * pmf_at(n_statuses - 1, t_del).survival(k + j - t_del)
    return total


def _prob_delivered_and_stored(
    pmf_at: PmfAt, n_statuses: int, n: int, t_n: int, k: int, j: int
) -> float:
    """P(delivered in (k, k+j] and not picked up by k+j | status n since t_n, T_{n+1} > k)."""
    if not 0 <= n <= n_statuses - 2:
        raise ValidationError(f"status {n} is not an in-transit status for N={n_statuses}")
    if j < 1:
        return 0.0
    f = pmf_at(n, t_n)
    denom = f.survival(k - t_n)
    if denom <= _EPS:
        raise ImpossibleEvidence(
            f"kernel says the transition out of status {n} entered at {t_n} "
            f"must have happened by {k}"
        )
    t_lo, t_hi = k + 1, k + j
    arr = np.zeros(j)
    for t in range(t_lo, t_hi + 1):
        delta = t - t_n
        if 1 <= delta <= f.support_max:
            arr[t - t_lo] = f.probs[delta] / denom
    return _joint_delivered_not_picked(pmf_at, n_statuses, arr, t_lo, k, j, n + 1)


def prob_delivered_and_stored_last_hop(
    pmf_at: PmfAt, n_statuses: int, t_prev: int, k: int, j: int
) -> float:
    """Contribution probability for a parcel one transition away from delivery."""
    return _prob_delivered_and_stored(pmf_at, n_statuses, n_statuses - 2, t_prev, k, j)


def prob_delivered_and_stored_multi_hop(
    pmf_at: PmfAt, n_statuses: int, n: int, t_n: int, k: int, j: int
) -> float:
    """Contribution probability for a parcel several transitions from delivery.

    Degenerates to the last-hop case when n = N-2.
    """
    return _prob_delivered_and_stored(pmf_at, n_statuses, n, t_n, k, j)


def chain_prob_g(pmf_at: PmfAt, n_statuses: int, n: int, t_n: int, t_delivery: int) -> float:
    """P(delivery exactly at t_delivery | status n entered at t_n).

    Forward pass over per-status arrival-time distributions; returns 0 for
    unreachable times (each hop takes at least one slot).
    """
    if n >= n_statuses - 1:
        raise ValidationError("chain probability needs a status before delivery")
    if t_delivery - t_n < n_statuses - 1 - n:
        return 0.0
    arr = np.zeros(t_delivery - t_n + 1)
    arr[0] = 1.0
    arrivals = _forward_arrivals(pmf_at, n, arr, t_n, t_delivery, n_statuses - 1)
    return float(arrivals[t_delivery - t_n])


def prob_future_order_contributes(
    pmf_at: PmfAt, n_statuses: int, t_0: int, k: int, j: int, entry_status: int = 0
) -> float:
    """P(delivered in (k, k+j] and not picked up by k+j | enters chain at t_0 > k)."""
    if not k < t_0 <= k + j:
        raise ValidationError("future order time must satisfy k < t_0 <= k+j")
    hops = n_statuses - 1 - entry_status
    if t_0 + hops > k + j:
        return 0.0
    t_lo, t_hi = k + 1, k + j
    arr = np.zeros(j)
    arr[t_0 - t_lo] = 1.0
    return _joint_delivered_not_picked(pmf_at, n_statuses, arr, t_lo, k, j, entry_status)


def future_orders_pmf(
    intensity: OrderIntensity,
    kernel,
    selection: SelectionModel,
    pup: str,
    k: int,
    j: int,
    entry_status: int = 0,
    coverage: float = 0.99,
) -> LoadPmf:
    """Pmf of the number of not-yet-ordered parcels stored at k+j.

    For each future slot k+i, i in [1, j-1], and each carrier, the number
    of orders is Poisson with the fitted intensity, each contributing
    independently with a probability mixed over the retailer selection
    model.  The Poisson mixture is truncated at the smallest count whose
    CDF reaches ``coverage`` and renormalized.
    """
    result = LoadPmf.point_mass(0)
    timebase = kernel.timebase
    for i in range(1, j):
        t_0 = k + i
        for carrier in intensity.carriers:
            lam = intensity.lambda_at(timebase, t_0, carrier)
            if lam <= 0.0:
                continue
            p_retailers = selection.p_retailer_given_carrier(carrier)
            if not p_retailers:
                p_retailers = {None: 1.0}
            p = 0.0
            for retailer, weight in p_retailers.items():
                pmf_at = bind_kernel(kernel, carrier=carrier, retailer=retailer, pup=pup)
                p += weight * prob_future_order_contributes(
                    pmf_at, kernel.n_statuses, t_0, k, j, entry_status
                )
            m_max = poisson_truncation(lam, coverage)
            bern = np.array([1.0 - p, p])
            q = np.zeros(m_max + 1)
            p_m = np.array([1.0])
            q[0] += poisson_pmf(lam, 0)
            for m in range(1, m_max + 1):
                p_m = np.convolve(p_m, bern)
                q[: m + 1] += poisson_pmf(lam, m) * p_m
            result = LoadPmf(np.convolve(result.probs, q / q.sum()))
    return result.trimmed()


@dataclass
class ForecastResult:
    """Forecast of the load pmf at one horizon, plus diagnostics."""

    pup: str
    k: int
    j: int
    pmf: LoadPmf
    diagnostics: list[str] = field(default_factory=list)

    @property
    def mean(self) -> float:
        return self.pmf.mean()

    def to_json_dict(self) -> dict:
        return {
            "pup": self.pup,
            "k": self.k,
            "j": self.j,
            "pmf": [float(p) for p in self.pmf.probs],
            "mean": self.mean,
            "q05": self.pmf.quantile(0.05),
            "q50": self.pmf.quantile(0.50),
            "q95": self.pmf.quantile(0.95),
            "diagnostics": list(self.diagnostics),
        }


def _parcel_contribution(
    kernel, rec: ParcelRecord, k: int, j: int, diagnostics: list[str]
) -> float | None:
    """Bernoulli parameter for one known parcel, or None if it cannot contribute."""
    n_statuses = kernel.n_statuses
    n = rec.status_at(k)
    if n is None or n >= n_statuses:
        return None
    t_n = rec.entry_times[n]
    pmf_at = bind_kernel(kernel, carrier=rec.carrier, retailer=rec.retailer, pup=rec.pup)
    try:
        if n == n_statuses - 1:
            return prob_still_stored(pmf_at, n_statuses, t_n, k, j)
        return _prob_delivered_and_stored(pmf_at, n_statuses, n, t_n, k, j)
    except ImpossibleEvidence:
        pass
    except MissingKernel:
        diagnostics.append(f"parcel {rec.id}: no kernel for status {n}; skipped")
        return None
    # Evidence contradicts the fitted pmf (holding time beyond its support).
    # Retry with the coarsest pooled pmf; if that also says the parcel must
    # have left, treat it as departed (the forced-return rule).
    try:
        pooled = kernel.statuses[n].coarsest()
    except (KeyError, MissingKernel):
        diagnostics.append(f"parcel {rec.id}: impossible evidence, no fallback; dropped")
        return None

    def pooled_at(m: int, t: int) -> HoldingTimePmf:
        return pooled if m == n else pmf_at(m, t)

    try:
        if n == n_statuses - 1:
            p = prob_still_stored(pooled_at, n_statuses, t_n, k, j)
        else:
            p = _prob_delivered_and_stored(pooled_at, n_statuses, n, t_n, k, j)
        diagnostics.append(f"parcel {rec.id}: impossible evidence, used pooled fallback")
        return p
    except ImpossibleEvidence:
        diagnostics.append(f"parcel {rec.id}: holding time beyond all supports; assumed departed")
        return 0.0


def predict_load_pmf(
    parcels: Sequence[ParcelRecord],
    kernel,
    intensity: OrderIntensity | None,
    selection: SelectionModel | None,
    k: int,
    j: int,
    entry_status: int = 0,
    coverage: float = 0.99,
) -> ForecastResult:
    """Full load pmf at k+j from known parcels plus forecast future orders.

    Parcels already picked up contribute nothing; each other parcel adds a
    Bernoulli factor, and the future-order pmf is convolved in last.
    """
    pups = {rec.pup for rec in parcels}
    if len(pups) > 1:
        raise ValidationError(f"parcels target multiple pups: {sorted(pups)}")
    pup = pups.pop() if pups else ""
    diagnostics: list[str] = []
    probs = np.array([1.0])
    for rec in parcels:
        p = _parcel_contribution(kernel, rec, k, j, diagnostics)
        if p is not None and p > 0.0:
            probs = np.convolve(probs, [1.0 - p, p])
    if intensity is not None:
        if selection is None:
            selection = SelectionModel({None: 1.0}, {None: {c: 1.0 / len(intensity.carriers) for c in intensity.carriers}})
        future = future_orders_pmf(
            intensity, kernel, selection, pup, k, j, entry_status, coverage
        )
        probs = np.convolve(probs, future.probs)
    pmf = LoadPmf(probs / probs.sum()).trimmed()
    return ForecastResult(pup=pup, k=k, j=j, pmf=pmf, diagnostics=diagnostics)
