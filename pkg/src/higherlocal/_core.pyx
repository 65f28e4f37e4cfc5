# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in higherlocal._kernel_py."""

from libc.stdlib cimport calloc, free, malloc

IS_COMPILED = True


def conv_trunc(a_exps, a_codes, b_exps, b_codes, long cap, mul, add, long q):
    cdef long na = len(a_exps)
    cdef long nb = len(b_exps)
    if na == 0 or nb == 0:
        return [], []
    cdef long long[::1] tmul = mul
    cdef long long[::1] tadd = add
    cdef long *ae = <long *> malloc(na * sizeof(long))
    cdef long *ac = <long *> malloc(na * sizeof(long))
    cdef long *be = <long *> malloc(nb * sizeof(long))
    cdef long *bc = <long *> malloc(nb * sizeof(long))
    cdef long i, j
    for i in range(na):
        ae[i] = a_exps[i]
        ac[i] = a_codes[i]
    for j in range(nb):
        be[j] = b_exps[j]
        bc[j] = b_codes[j]

    # Dense accumulation over the reachable exponent window.
    cdef long lo = ae[0] + be[0]
    cdef long hi = ae[na - 1] + be[nb - 1] + 1
    if hi > cap:
        hi = cap
    if hi <= lo:
        free(ae); free(ac); free(be); free(bc)
        return [], []
    cdef long span = hi - lo
    cdef long long *buf = <long long *> calloc(span, sizeof(long long))
    cdef long e, row, prod, cur
    for i in range(na):
        row = ac[i] * q
        for j in range(nb):
            e = ae[i] + be[j]
            if e >= hi:
                break
            prod = tmul[row + bc[j]]
            if prod:
                cur = buf[e - lo]
                buf[e - lo] = prod if cur == 0 else tadd[cur * q + prod]
    exps, codes = [], []
    for i in range(span):
        if buf[i]:
            exps.append(lo + i)
            codes.append(buf[i])
    free(ae); free(ac); free(be); free(bc); free(buf)
    return exps, codes


def poly_mul_mod(a, b, modulus, long p):
    cdef long deg = len(modulus) - 1
    cdef long n = len(a)
    cdef long m = len(b)
    cdef long size = n + m - 1 if n and m else 1
    cdef long *prod = <long *> calloc(size, sizeof(long))
    cdef long *mo = <long *> malloc((deg + 1) * sizeof(long))
    cdef long i, j, k, t, ai, c, off
    for i in range(deg + 1):
        mo[i] = modulus[i]
    for i in range(n):
        ai = a[i]
        if ai:
            for j in range(m):
                prod[i + j] = (prod[i + j] + ai * <long> b[j]) % p
    for k in range(size - 1, deg - 1, -1):
        c = prod[k]
        if c:
            prod[k] = 0
            off = k - deg
            for t in range(deg):
                prod[off + t] = (prod[off + t] - c * mo[t]) % p
                if prod[off + t] < 0:
                    prod[off + t] += p
    out = [prod[i] for i in range(deg)] if size >= deg else [prod[i] for i in range(size)] + [0] * (deg - size)
    free(prod)
    free(mo)
    return out
