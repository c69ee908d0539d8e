# -*- coding: utf-8 -*-
# Copyright 2014 The mrkit authors. See LICENSE file for details.

"""Time the assembly of k-point tables against the index bound, once from the
resolvent and once from the wave functions, and plot both curves."""

import os
import sys
import time
import numpy as np
from matplotlib import pyplot as plt

sys.path.insert(0, os.path.abspath('..'))
from mrkit.series import set_truncation
from mrkit.diffpoly import InitialData
from mrkit.resolvent import mr_coeffs
from mrkit.waves import wave_pair, pair_fix, purity_check
from mrkit.correlators import npoint_mr, npoint_wave

import logging
logging.basicConfig(
    format='%(asctime)s,%(msecs)-6.1f [%(process)-5d]%(funcName)s# %(message)s',
    datefmt='%H:%M:%S')
log = logging.getLogger()
log.setLevel(logging.INFO)


def data2():
    return InitialData.from_triples([(0, 0, 1), (1, 0, 1)],
        [(0, 0, 1), (1, 0, -1)], label="DATA2")


def time_mr(k, bound):
    data = data2()
    t0 = time.time()
    mr = mr_coeffs(k * (bound + 1), data.q, data.r)
    npoint_mr(mr, k, bound)
    return time.time() - t0


def time_wave(k, bound):
    data = data2()
    t0 = time.time()
    n = max(4, k * (bound + 1))
    fixed = pair_fix(wave_pair(data, n))
    npoint_wave(purity_check(fixed, n - 1)[1], k, bound)
    return time.time() - t0


def bench(k, samplesize, bounds):
    log.info("Benching k=%s with bounds %s", k, bounds)
    set_truncation(n_x=12, n_xi=k * (max(bounds) + 1), eps_ceiling=8)
    for func, label in ((time_mr, "resolvent"), (time_wave, "wave functions")):
        durations = [[func(k, b) for _ in range(samplesize)] for b in bounds]
        means = [np.mean(d) for d in durations]
        stddevs = [np.std(d) for d in durations]
        log.info("%s: mean durations %s", label, means)
        plt.errorbar(x=bounds, y=means, yerr=stddevs, marker='o',
            label=label)
    plt.title("%s-point tables (DATA2)" % k, fontsize=10)
    plt.xlabel("index bound")
    plt.ylabel("duration [s]")
    plt.yscale("log")
    plt.legend(loc="upper left")
    fname = "npoint_k%s.png" % k
    log.info("Writing %s.", fname)
    plt.savefig(fname, dpi=200)
    plt.clf()


def main():
    if len(sys.argv) > 1 and sys.argv[1] == "--short":
        bench(2, 2, (0, 1))
    else:
        bench(2, 5, (0, 1, 2, 3))
        bench(3, 3, (0, 1))


if __name__ == "__main__":
    main()
