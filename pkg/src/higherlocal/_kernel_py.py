"""Pure-Python implementations of the arithmetic hot spots.

These are the reference kernels; `higherlocal._core` is a Cython twin with
identical signatures and results.  Field elements are table codes in
``0..q-1`` and tables are flat row-major ``array('q')`` buffers of length
``q*q`` (see :mod:`higherlocal.ffield`).
"""

IS_COMPILED = False


def conv_trunc(a_exps, a_codes, b_exps, b_codes, cap, mul, add, q):
    """Truncated convolution of two sparse coefficient vectors.

    The inputs are parallel lists (exponent, nonzero code); exponents may be
    negative.  Terms with exponent >= cap are discarded.  Returns parallel
    sorted lists (exps, codes) with zero codes dropped.
    """
    acc = {}
    get = acc.get
    for i in range(len(a_exps)):
        ea = a_exps[i]
        row = a_codes[i] * q
        for j in range(len(b_exps)):
            e = ea + b_exps[j]
            if e >= cap:
                continue
            prod = mul[row + b_codes[j]]
            if prod:
                cur = get(e)
                acc[e] = prod if cur is None else add[cur * q + prod]
    exps, codes = [], []
    for e in sorted(acc):
        c = acc[e]
        if c:
            exps.append(e)
            codes.append(c)
    return exps, codes


def poly_mul_mod(a, b, modulus, p):
    """Product of two F_p[x] polynomials reduced modulo a monic modulus.

    Polynomials are little-endian int lists with entries in 0..p-1;
    ``modulus`` has degree >= 1 and leading coefficient 1.  Returns a list of
    length deg(modulus).
    """
    deg = len(modulus) - 1
    n, m = len(a), len(b)
    prod = [0] * (n + m - 1 if n and m else 1)
    for i in range(n):
        ai = a[i]
        if ai:
            for j in range(m):
                prod[i + j] = (prod[i + j] + ai * b[j]) % p
    for k in range(len(prod) - 1, deg - 1, -1):
        c = prod[k]
        if c:
            prod[k] = 0
            off = k - deg
            for t in range(deg):
                prod[off + t] = (prod[off + t] - c * modulus[t]) % p
    out = prod[:deg]
    while len(out) < deg:
        out.append(0)
    return out
