"""Grid calibration of (baseline_offset, recover_slope_mean) against the
published reference-row power values.  Throwaway tooling, not shipped API.
"""
import sys
import time
from dataclasses import replace

import numpy as np

sys.path.insert(0, "src")
from ordtrial import power, simgen
from ordtrial.power import MethodSpec

TARGETS = {
    "prop_odds@d1": 0.05,
    "prop_odds@d7": 0.76,
    "prop_odds@d14": 0.85,
    "prop_odds@d28": 0.88,
    "wilcoxon_mean_score": 0.80,
    "cox_improvement(2)": 0.81,
    "cox_recovery": 0.82,
    "cox_death": 0.63,
    "two_proportion_mortality@d28": 0.58,
}

METHODS = [
    MethodSpec("prop_odds", day=1),
    MethodSpec("prop_odds", day=7),
    MethodSpec("prop_odds", day=14),
    MethodSpec("prop_odds", day=28),
    MethodSpec("wilcoxon_mean_score"),
    MethodSpec("cox_improvement", k_points=2),
    MethodSpec("cox_recovery"),
    MethodSpec("cox_death"),
    MethodSpec("two_proportion_mortality", day=28),
]


def evaluate(offset, slope, n_sims=300, seed=20250810):
    sc = simgen.ScenarioParams(baseline_offset=offset, recover_slope_mean=slope)
    pt = power.run_power_study(sc, METHODS, n_sims=n_sims, master_seed=seed, n_workers=2)
    rates = {r.spec.label: r.rejection_rate for r in pt}
    dev = max(abs(rates[k] - v) for k, v in TARGETS.items())
    return rates, dev


if __name__ == "__main__":
    t0 = time.time()
    results = []
    for offset in [3.6, 3.8, 4.0, 4.2, 4.4]:
        for slope in [-0.7, -0.8, -0.9, -1.0, -1.1, -1.2]:
            rates, dev = evaluate(offset, slope)
            results.append((dev, offset, slope, rates))
            print(f"off={offset:4.1f} slope={slope:5.2f} maxdev={dev:6.3f} | "
                  + " ".join(f"{rates[k]:.2f}" for k in TARGETS))
    results.sort()
    print("\nbest:")
    for dev, off, sl, rates in results[:5]:
        print(f"  off={off} slope={sl} maxdev={dev:.3f}")
    print(f"elapsed {time.time()-t0:.0f}s")
