"""Pure-Python SSA kernels; the reference for the compiled ``_kernels``.

Both implementations must consume random numbers in the same order so
their outputs are bit-identical:

* generator: xoshiro256** seeded by four splitmix64 outputs of the seed;
  path ``k`` of a batch uses seed ``seed ^ k``;
* uniforms: ``(x >> 11) * 2**-53``;
* one uniform picks the initial state, then per jump one uniform for the
  holding time ``-log(1 - u) / q`` and one for the target state.

Categorical draws take the first index ``j`` with ``u < cum[j]``; callers
pass cumulative rows whose last positive entry is pinned to 1.0.
"""
import math

MASK = (1 << 64) - 1
_INV53 = 1.0 / 9007199254740992.0


def splitmix64(state):
    state = (state + 0x9E3779B97F4A7C15) & MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return state, z ^ (z >> 31)


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & MASK


class Xoshiro256:
    __slots__ = ("s0", "s1", "s2", "s3")

    def __init__(self, seed):
        sm = seed & MASK
        sm, self.s0 = splitmix64(sm)
        sm, self.s1 = splitmix64(sm)
        sm, self.s2 = splitmix64(sm)
        sm, self.s3 = splitmix64(sm)

    def next_u64(self):
        s0, s1, s2, s3 = self.s0, self.s1, self.s2, self.s3
        result = (_rotl((s1 * 5) & MASK, 7) * 9) & MASK
        t = (s1 << 17) & MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self.s0, self.s1, self.s2, self.s3 = s0, s1, s2, s3
        return result

    def random(self):
        return (self.next_u64() >> 11) * _INV53


def _pick(cum, u):
    for j, c in enumerate(cum):
        if u < c:
            return j
    return len(cum) - 1


def simulate_path(cum_pi, q, cum_jump, horizon, seed):
    """One path up to ``horizon``: (jump times, visited states, absorbed)."""
    cum_pi = list(cum_pi)
    q = list(q)
    rows = [list(r) for r in cum_jump]
    rng = Xoshiro256(seed)
    s = _pick(cum_pi, rng.random())
    times = [0.0]
    states = [s]
    clock = 0.0
    while True:
        rate = q[s]
        if rate <= 0.0:
            return times, states, True
        clock += -math.log(1.0 - rng.random()) / rate
        if clock > horizon:
            return times, states, False
        s = _pick(rows[s], rng.random())
        times.append(clock)
        states.append(s)


def endpoint_states(cum_pi, q, cum_jump, t, n_paths, seed):
    """State occupied at time ``t`` by each of ``n_paths`` independent paths."""
    cum_pi = list(cum_pi)
    q = list(q)
    rows = [list(r) for r in cum_jump]
    log = math.log
    out = [0] * n_paths
    for k in range(n_paths):
        rng = Xoshiro256(seed ^ k)
        s = _pick(cum_pi, rng.random())
        clock = 0.0
        if t > 0.0:
            while True:
                rate = q[s]
                if rate <= 0.0:
                    break
                clock += -log(1.0 - rng.random()) / rate
                if clock > t:
                    break
                s = _pick(rows[s], rng.random())
        out[k] = s
    return out


def first_passage(cum_pi, q, cum_jump, is_slow, n_paths, seed, budget):
    """Per path: (hitting time of the slow set, state hit, budget exceeded)."""
    cum_pi = list(cum_pi)
    q = list(q)
    rows = [list(r) for r in cum_jump]
    slow = [bool(x) for x in is_slow]
    log = math.log
    taus = [0.0] * n_paths
    hits = [0] * n_paths
    exceeded = 0
    for k in range(n_paths):
        rng = Xoshiro256(seed ^ k)
        s = _pick(cum_pi, rng.random())
        clock = 0.0
        jumps = 0
        while not slow[s]:
            rate = q[s]
            if rate <= 0.0 or jumps >= budget:
                exceeded += 1
                s = -1
                break
            clock += -log(1.0 - rng.random()) / rate
            s = _pick(rows[s], rng.random())
            jumps += 1
        taus[k] = clock
        hits[k] = s
    return taus, hits, exceeded
