# cython: language_level=3
# cython: boundscheck=False
# cython: wraparound=False
# cython: cdivision=True
"""Compiled possibility kernel.

Semantics identical to `_kernel_py.first_possible_ket`; this is the hot inner
loop of the hidden-variable scan (d^4 exponent evaluations per call).
"""

DEF MAX_D = 61
DEF MAX_DSQ = MAX_D * MAX_D


def first_possible_ket(int d, int[:, ::1] phi_table, int[::1] u, int[::1] v,
                       int a, int b):
    """First ket index j*d + k with a non-vanishing root multiset, else -1.

    See the pure-Python twin for the exponent formula.  `phi_table` is the
    d x d table of the state's phase polynomial, `u`/`v` the two commuting
    generators as (p1,q1,p2,q2) rows, `a`/`b` their prescribed outcomes.
    """
    if d < 3 or d > MAX_D:
        raise ValueError("kernel supports 3 <= d <= %d" % MAX_D)
    cdef int inv2 = (d + 1) // 2
    cdef int nsq = d * d
    cdef int p1s[MAX_DSQ]
    cdef int p2s[MAX_DSQ]
    cdef int q1s[MAX_DSQ]
    cdef int q2s[MAX_DSQ]
    cdef int bases[MAX_DSQ]
    cdef int counts[MAX_D]
    cdef int x, y, idx, j, k, t, val, jj, kk, ok

    idx = 0
    for x in range(d):
        for y in range(d):
            p1s[idx] = (x * u[0] + y * v[0]) % d
            q1s[idx] = (x * u[1] + y * v[1]) % d
            p2s[idx] = (x * u[2] + y * v[2]) % d
            q2s[idx] = (x * u[3] + y * v[3]) % d
            val = (-x * a - y * b
                   - inv2 * (p1s[idx] * q1s[idx] + p2s[idx] * q2s[idx])) % d
            bases[idx] = val + d if val < 0 else val
            idx += 1

    for j in range(d):
        for k in range(d):
            for t in range(d):
                counts[t] = 0
            for idx in range(nsq):
                jj = j - q1s[idx]
                if jj < 0:
                    jj += d
                kk = k - q2s[idx]
                if kk < 0:
                    kk += d
                val = (bases[idx] + j * p1s[idx] + k * p2s[idx]
                       + phi_table[jj, kk]) % d
                counts[val] += 1
            ok = 1
            for t in range(d):
                if counts[t] != d:
                    ok = 0
                    break
            if ok == 0:
                return j * d + k
    return -1
