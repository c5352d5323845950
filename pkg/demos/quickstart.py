"""End-to-end walkthrough: simulate a shop, fit models, forecast the load.

Simulates a synthetic three-carrier pick-up point for a few months, fits
the transition kernels and order-intensity models from the resulting event
log (no peeking at the ground truth), then forecasts the full load pmf at
an anchor and compares it with what actually happened.

Run:  python3 demos/quickstart.py [--days 120] [--seed 7]
"""

import argparse

from pupcast import (
    OrderIntensity,
    TransitionKernel,
    default_scenario,
    estimate_pickup_kernel,
    estimate_selection,
    estimate_transit_kernel,
    fit_daily_volume,
    fit_hourly_profile,
    predict_load_pmf,
    simulate,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--days", type=int, default=120)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    cfg = default_scenario(seed=args.seed, horizon_days=args.days)
    trace = simulate(cfg)
    print(f"simulated {len(trace.parcels)} parcels over {args.days} days at {cfg.pup!r}")

    # anchor: midnight, two weeks before the end so every horizon is observable
    k = (args.days - 14) * 24
    log = trace.event_log(cutoff=k)
    print(f"fitting on the event log as observed at slot {k} ({len(log.records)} parcels)")

    kernel = TransitionKernel(
        n_statuses=cfg.n_statuses,
        statuses={
            2: estimate_transit_kernel(log, cfg.pup, status_from=2),
            3: estimate_pickup_kernel(log, cfg.pup, cfg.opening, status_from=3),
        },
        timebase=cfg.timebase,
    )
    selection = estimate_selection(log)
    profile = fit_hourly_profile(log, status=cfg.entry_status)
    volume = fit_daily_volume(log.truncated(k - 1), status=cfg.entry_status)
    intensity = OrderIntensity.from_models(profile, volume)

    parcels = log.for_pup(cfg.pup)
    print(f"\nload forecast anchored at {cfg.timebase.datetime_of(k)}:")
    print(f"{'horizon':>8} {'mean':>7} {'q05':>4} {'q50':>4} {'q95':>4} {'actual':>7}")
    for j in (13, 37, 61, 85):
        r = predict_load_pmf(
            parcels, kernel, intensity, selection, k, j, entry_status=cfg.entry_status
        )
        actual = int(trace.load[k + j])
        print(
            f"{j:>7}h {r.mean:7.2f} {r.pmf.quantile(0.05):4d} "
            f"{r.pmf.quantile(0.50):4d} {r.pmf.quantile(0.95):4d} {actual:7d}"
        )
    print("\neach row is a full pmf; mean and quantiles are summaries of it")


if __name__ == "__main__":
    main()
