# -*- coding: utf-8 -*-
# Copyright 2014 The mrkit authors. See LICENSE file for details.

import os
import io
import sys
import time
import cProfile
import pstats

sys.path.insert(0, os.path.abspath('..'))
from mrkit.series import set_truncation
from mrkit.diffpoly import InitialData
from mrkit.resolvent import mr_coeffs
from mrkit.correlators import npoint_mr

import logging
logging.basicConfig(
    format='%(asctime)s,%(msecs)-6.1f [%(process)-5d]%(funcName)s# %(message)s',
    datefmt='%H:%M:%S')
log = logging.getLogger()
log.setLevel(logging.DEBUG)


def main():
    t0 = time.time()
    set_truncation(n_x=12, n_xi=8, eps_ceiling=8)
    data = InitialData.from_triples([(0, 0, 1), (1, 0, 1)],
        [(0, 0, 1), (1, 0, -1)])
    mr = mr_coeffs(6, data.q, data.r)
    log.info("Setup duration: %.3f s", time.time() - t0)
    log.info("Profiling...")
    pr = cProfile.Profile()
    pr.enable()
    npoint_mr(mr, 3, 1)
    pr.disable()
    s = io.StringIO()
    ps = pstats.Stats(pr, stream=s).sort_stats('time')
    ps.print_stats(20)
    print(s.getvalue())


if __name__ == "__main__":
    main()
