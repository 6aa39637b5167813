# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled event loop for the birth-death queue simulator.

Bit-identical twin of ``ecomp._queue_kernel_py.run_chunk``: same draw
discipline (capacity check before any draw; one uniform per step plus a
second only in interior states), same -log1p(-u)/rate waits, same double
arithmetic, pulling uniforms straight from the bit generator.
"""

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport log1p
from numpy.random cimport bitgen_t


def run_chunk(bit_generator, double lam, double[::1] dep, double[::1] parr,
              double[::1] occ, double t, Py_ssize_t n, double horizon,
              double burn_in, bint top_blocked):
    """See ``ecomp._queue_kernel_py.run_chunk`` for the contract."""
    cdef bitgen_t *rng
    rng = <bitgen_t *> PyCapsule_GetPointer(bit_generator.capsule,
                                            "BitGenerator")
    cdef Py_ssize_t K = dep.shape[0]
    cdef long long jumps = 0
    cdef double u, rate, t_next, hi, lo, ov
    cdef bint up
    cdef int status = -1

    with bit_generator.lock, nogil:
        while True:
            if t >= horizon:
                status = 0
                break
            if n + 1 >= K and not (top_blocked and n == K - 1):
                status = 1
                break
            u = rng.next_double(rng.state)
            if n == 0:
                rate = lam
                if rate <= 0.0:
                    lo = t if t > burn_in else burn_in
                    ov = horizon - lo
                    if ov > 0.0:
                        occ[0] += ov
                    t = horizon
                    status = 0
                    break
                up = True
            elif top_blocked and n == K - 1:
                rate = dep[n]
                up = False
            else:
                rate = lam + dep[n]
                up = rng.next_double(rng.state) < parr[n]
            t_next = t + (-log1p(-u) / rate)
            hi = t_next if t_next < horizon else horizon
            lo = t if t > burn_in else burn_in
            ov = hi - lo
            if ov > 0.0:
                occ[n] += ov
            t = t_next
            if t >= horizon:
                status = 0
                break
            if up:
                n += 1
            else:
                n -= 1
            jumps += 1

    return t, int(n), int(jumps), status
