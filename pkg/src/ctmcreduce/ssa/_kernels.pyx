# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled SSA kernels. Must stay bit-identical to ``_kernels_py``."""
import numpy as np

from libc.math cimport log
from libc.stdint cimport uint64_t, int64_t

cdef double INV53 = 1.0 / 9007199254740992.0


cdef struct Rng:
    uint64_t s0, s1, s2, s3


cdef inline uint64_t splitmix_next(uint64_t* state) nogil:
    state[0] += <uint64_t>0x9E3779B97F4A7C15ULL
    cdef uint64_t z = state[0]
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline void rng_seed(Rng* r, uint64_t seed) nogil:
    cdef uint64_t sm = seed
    r.s0 = splitmix_next(&sm)
    r.s1 = splitmix_next(&sm)
    r.s2 = splitmix_next(&sm)
    r.s3 = splitmix_next(&sm)


cdef inline uint64_t rotl(uint64_t x, int k) nogil:
    return (x << k) | (x >> (64 - k))


cdef inline double rng_random(Rng* r) nogil:
    cdef uint64_t result = rotl(r.s1 * 5, 7) * 9
    cdef uint64_t t = r.s1 << 17
    r.s2 ^= r.s0
    r.s3 ^= r.s1
    r.s1 ^= r.s2
    r.s0 ^= r.s3
    r.s2 ^= t
    r.s3 = rotl(r.s3, 45)
    return <double>(result >> 11) * INV53


cdef inline Py_ssize_t pick(const double[:] cum, double u) nogil:
    cdef Py_ssize_t j, n = cum.shape[0]
    for j in range(n):
        if u < cum[j]:
            return j
    return n - 1


cdef inline Py_ssize_t pick_row(const double[:, ::1] rows, Py_ssize_t s, double u) nogil:
    cdef Py_ssize_t j, n = rows.shape[1]
    for j in range(n):
        if u < rows[s, j]:
            return j
    return n - 1


def simulate_path(cum_pi, q, cum_jump, double horizon, seed):
    cdef const double[:] cpi = np.ascontiguousarray(cum_pi, dtype=np.float64)
    cdef const double[:] rates = np.ascontiguousarray(q, dtype=np.float64)
    cdef const double[:, ::1] rows = np.ascontiguousarray(cum_jump, dtype=np.float64)
    cdef Rng r
    rng_seed(&r, <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF))
    cdef Py_ssize_t s = pick(cpi, rng_random(&r))
    cdef double clock = 0.0, rate
    times = [0.0]
    states = [s]
    while True:
        rate = rates[s]
        if rate <= 0.0:
            return times, states, True
        clock += -log(1.0 - rng_random(&r)) / rate
        if clock > horizon:
            return times, states, False
        s = pick_row(rows, s, rng_random(&r))
        times.append(clock)
        states.append(s)


def endpoint_states(cum_pi, q, cum_jump, double t, Py_ssize_t n_paths, seed):
    cdef const double[:] cpi = np.ascontiguousarray(cum_pi, dtype=np.float64)
    cdef const double[:] rates = np.ascontiguousarray(q, dtype=np.float64)
    cdef const double[:, ::1] rows = np.ascontiguousarray(cum_jump, dtype=np.float64)
    cdef uint64_t base = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    out = np.zeros(n_paths, dtype=np.int64)
    cdef int64_t[:] o = out
    cdef Rng r
    cdef Py_ssize_t k, s
    cdef double clock, rate
    with nogil:
        for k in range(n_paths):
            rng_seed(&r, base ^ <uint64_t>k)
            s = pick(cpi, rng_random(&r))
            clock = 0.0
            if t > 0.0:
                while True:
                    rate = rates[s]
                    if rate <= 0.0:
                        break
                    clock += -log(1.0 - rng_random(&r)) / rate
                    if clock > t:
                        break
                    s = pick_row(rows, s, rng_random(&r))
            o[k] = s
    return out


def first_passage(cum_pi, q, cum_jump, is_slow, Py_ssize_t n_paths, seed, long long budget):
    cdef const double[:] cpi = np.ascontiguousarray(cum_pi, dtype=np.float64)
    cdef const double[:] rates = np.ascontiguousarray(q, dtype=np.float64)
    cdef const double[:, ::1] rows = np.ascontiguousarray(cum_jump, dtype=np.float64)
    slow_arr = np.ascontiguousarray(is_slow, dtype=np.uint8)
    cdef const unsigned char[:] slow = slow_arr
    cdef uint64_t base = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    taus = np.zeros(n_paths, dtype=np.float64)
    hits = np.zeros(n_paths, dtype=np.int64)
    cdef double[:] tv = taus
    cdef int64_t[:] hv = hits
    cdef Rng r
    cdef Py_ssize_t k, s
    cdef long long jumps, exceeded = 0
    cdef double clock, rate
    with nogil:
        for k in range(n_paths):
            rng_seed(&r, base ^ <uint64_t>k)
            s = pick(cpi, rng_random(&r))
            clock = 0.0
            jumps = 0
            while not slow[s]:
                rate = rates[s]
                if rate <= 0.0 or jumps >= budget:
                    exceeded += 1
                    s = -1
                    break
                clock += -log(1.0 - rng_random(&r)) / rate
                s = pick_row(rows, s, rng_random(&r))
                jumps += 1
            tv[k] = clock
            hv[k] = s
    return taus, hits, exceeded
