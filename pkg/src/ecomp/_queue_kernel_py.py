"""Pure-Python event loop for the birth-death queue simulator.

Reference implementation of the chunk runner; the Cython module
``ecomp._queue_kernel`` is a drop-in replacement producing bit-identical
trajectories.  Parity rests on three rules shared by both kernels:

* the capacity check happens at the top of the loop, before any draw, so
  array growth never shifts the random stream;
* every step consumes one uniform for the holding time, plus a second one
  only in interior states where both moves compete;
* waits are computed as -log1p(-u)/rate in double precision.
"""

from __future__ import annotations

import math

import numpy as np


def run_chunk(bit_generator, lam, dep, parr, occ, t, n, horizon, burn_in,
              top_blocked):
    """Advance one trajectory until the horizon or until state space runs out.

    Parameters
    ----------
    bit_generator : np.random.BitGenerator
        Source of uniforms; consumed one value at a time.
    lam : float
        Arrival rate.
    dep, parr, occ : float64 arrays of equal length K
        Departure rate mu*phi(k), arrival probability lam/(lam+dep[k]),
        and the occupancy accumulator (mutated in place).
    t, n : float, int
        Current time and state.
    horizon, burn_in : float
        Occupancy is accumulated over (burn_in, horizon).
    top_blocked : bool
        Arrivals suppressed in state K-1 (finite support cap).

    Returns
    -------
    (t, n, jumps, status) with status 0 when the horizon was reached and 1
    when the caller must grow the state arrays and call again.
    """
    gen = np.random.Generator(bit_generator)
    log1p = math.log1p
    K = dep.shape[0]
    jumps = 0
    while True:
        if t >= horizon:
            return t, n, jumps, 0
        if n + 1 >= K and not (top_blocked and n == K - 1):
            return t, n, jumps, 1
        u = gen.random()
        if n == 0:
            rate = lam
            if rate <= 0.0:
                # absorbed: no arrivals ever happen, time runs out here
                lo = t if t > burn_in else burn_in
                ov = horizon - lo
                if ov > 0.0:
                    occ[0] += ov
                return horizon, n, jumps, 0
            up = True
        elif top_blocked and n == K - 1:
            rate = dep[n]
            up = False
        else:
            rate = lam + dep[n]
            up = gen.random() < parr[n]
        t_next = t + (-log1p(-u) / rate)
        hi = t_next if t_next < horizon else horizon
        lo = t if t > burn_in else burn_in
        ov = hi - lo
        if ov > 0.0:
            occ[n] += ov
        t = t_next
        if t >= horizon:
            return t, n, jumps, 0
        if up:
            n += 1
        else:
            n -= 1
        jumps += 1
