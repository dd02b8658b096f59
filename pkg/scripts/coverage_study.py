"""Monte Carlo recovery rates and 2-sigma coverage of the synthetic round trips.

Usage::

    python scripts/coverage_study.py --seeds 1000
    python scripts/coverage_study.py --only pe3 activation --seeds 200

For each study the script prints the fraction of seeds whose estimate lies
within the target tolerance and the fraction whose reported 2-sigma interval
covers the true value. The power-law study also prints the Cramer-Rao bound
on the best achievable rate for the 8-point design.
"""

from __future__ import annotations

import argparse
import time

import numpy as np
from scipy import stats

from echofit.demo import (
    MOD_DECAY_WINDOW,
    MOD_EARLY_WINDOW,
    MOD_FIELDS,
    PE2_LIFETIMES,
    activation_series,
    modulation_decay,
    pe2_decay,
    pe3_decay,
    powerlaw_series,
)
from echofit.estimation import (
    fit_3pe_surface,
    fit_activation,
    fit_exponential_decay,
    fit_modulation_frequency,
    fit_powerlaw,
)
from echofit.physics import DephasingParams


def report(name, hits, covered, extra=""):
    hits, covered = np.asarray(hits), np.asarray(covered)
    print(f"{name:28s} within tolerance {hits.mean():6.1%}   2-sigma coverage {covered.mean():6.1%}  {extra}")


def study_pe3(seeds):
    truth = {"gamma1": (1.3e6, 0.1e6), "rate_r": (0.026e6, 0.005e6), "t1": (6.7e-3, 0.5e-3)}
    hits = {k: [] for k in truth}
    cov = {k: [] for k in truth}
    joint = []
    for s in seeds:
        r = fit_3pe_surface(pe3_decay(0.4e6, s), gamma0=0.4e6)
        ok = []
        for k, (v, tol) in truth.items():
            ok.append(abs(r[k] - v) <= tol)
            hits[k].append(ok[-1])
            cov[k].append(abs(r[k] - v) <= r.error(k))
        joint.append(all(ok))
    for k in truth:
        report(f"3PE {k}", hits[k], cov[k])
    print(f"{'3PE all three jointly':28s} within tolerance {np.mean(joint):6.1%}")


def study_pe2(seeds):
    for temperature, t2, tol in PE2_LIFETIMES:
        h, c = [], []
        for s in seeds:
            r = fit_exponential_decay(pe2_decay(t2, 2.2, temperature, s))
            h.append(abs(r["t2"] - t2) <= tol)
            c.append(abs(r["t2"] - t2) <= r.error("t2"))
        report(f"2PE T2 = {t2 * 1e9:.0f} ns", h, c)


def study_powerlaw(seeds):
    base = DephasingParams()
    h, c = [], []
    for s in seeds:
        r = fit_powerlaw(powerlaw_series(base, s))
        h.append(abs(r["exponent"] - 1.4) <= 0.1)
        c.append(abs(r["exponent"] - 1.4) <= r.error("exponent"))
    # best possible 8-point design on [2, 10] K: half the points at each end
    lx = np.log([2.0] * 4 + [10.0] * 4)
    sd = 0.2 / np.sqrt(np.sum((lx - lx.mean()) ** 2))
    best = 2 * stats.norm.cdf(0.1 / sd) - 1
    lx = np.log(np.linspace(2, 10, 8))
    sd_lin = 0.2 / np.sqrt(np.sum((lx - lx.mean()) ** 2))
    report("power-law exponent", h, c,
           f"(bound: evenly spaced {2 * stats.norm.cdf(0.1 / sd_lin) - 1:.1%}, best design {best:.1%})")


def study_activation(seeds, count=16):
    base = DephasingParams()
    h, c, conv = [], [], []
    for s in seeds:
        r = fit_activation(activation_series(base, s, count=count), 0.5)
        h.append(abs(r["g_eff"] - 5.0) <= 2.5)
        c.append(abs(r["g_eff"] - 5.0) <= r.error("g_eff"))
        conv.append(r.converged)
    report(f"activation g_eff ({count} pts)", h, c, f"converged {np.mean(conv):.1%}")


def study_modulation(seeds):
    h = []
    for s in seeds:
        f = [fit_modulation_frequency(modulation_decay(b, s), MOD_EARLY_WINDOW, MOD_DECAY_WINDOW)["f_m"]
             for b in MOD_FIELDS]
        h.append(abs(np.polyfit(MOD_FIELDS, f, 1)[0] / 10.6e6 - 1) <= 0.02)
    print(f"{'modulation slope':28s} within 2 % {np.mean(h):6.1%}")


STUDIES = {"pe3": study_pe3, "pe2": study_pe2, "powerlaw": study_powerlaw, "activation": study_activation,
           "modulation": study_modulation}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=200)
    ap.add_argument("--first-seed", type=int, default=0)
    ap.add_argument("--only", nargs="+", choices=sorted(STUDIES), default=sorted(STUDIES))
    args = ap.parse_args()
    seeds = range(args.first_seed, args.first_seed + args.seeds)
    for name in args.only:
        t0 = time.perf_counter()
        STUDIES[name](seeds)
        print(f"  ({time.perf_counter() - t0:.1f} s)")


if __name__ == "__main__":
    main()
