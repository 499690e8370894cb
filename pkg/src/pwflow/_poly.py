"""Dense polynomials as tuples of floats, lowest degree first.

Small and pure Python on purpose: pieces rarely exceed degree 3, where
tuple arithmetic beats numpy's per-call overhead by a wide margin.
"""
import math

# Relative size below which a leading coefficient is treated as zero.
TRIM_REL = 1e-12

ZERO = (0.0,)


def peval(c, u):
    acc = 0.0
    for ci in reversed(c):
        acc = acc * u + ci
    return acc


def degree(c):
    return len(c) - 1


def trim(c, scale=1.0):
    """Drop negligible leading coefficients.

    A coefficient is negligible when its contribution over ``[0, scale]`` is
    tiny next to the largest term.
    """
    n = len(c)
    if n <= 1:
        return tuple(c) if n else ZERO
    s = max(scale, 1e-300)
    terms = [abs(ci) * s**i for i, ci in enumerate(c)]
    top = max(terms)
    if top == 0.0:
        return ZERO
    while n > 1 and terms[n - 1] <= TRIM_REL * top:
        n -= 1
    return tuple(c[:n])


def padd(a, b):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, bi in enumerate(b):
        out[i] += bi
    return tuple(out)


def psub(a, b):
    n = max(len(a), len(b))
    out = [0.0] * n
    for i, ai in enumerate(a):
        out[i] = ai
    for i, bi in enumerate(b):
        out[i] -= bi
    return tuple(out)


def pscale(a, k):
    return tuple(ai * k for ai in a)


def pmul(a, b):
    out = [0.0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0.0:
            continue
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return tuple(out)


def pder(c):
    if len(c) <= 1:
        return ZERO
    return tuple(i * c[i] for i in range(1, len(c)))


def pint(c, c0=0.0):
    return (c0,) + tuple(ci / (i + 1) for i, ci in enumerate(c))


def pshift(c, d):
    """Coefficients of ``p(u + d)`` (Taylor shift)."""
    if d == 0.0 or len(c) <= 1:
        return tuple(c)
    a = list(c)
    n = len(a)
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            a[j] += d * a[j + 1]
    return tuple(a)


def pcompose(outer, inner):
    """Coefficients of ``outer(inner(u))``."""
    acc = (outer[-1],)
    for ci in reversed(outer[:-1]):
        acc = padd(pmul(acc, inner), (ci,))
    return acc


def is_zero(c, atol):
    return all(abs(ci) <= atol for ci in c)


def cauchy_bound(c):
    lead = c[-1]
    return 1.0 + max(abs(ci / lead) for ci in c[:-1])


def _bisect(c, a, b, fa, rel):
    width = b - a
    tol = max(rel * width, 1e-300)
    for _ in range(200):
        if b - a <= tol:
            break
        m = 0.5 * (a + b)
        fm = peval(c, m)
        if fm == 0.0:
            return m
        if (fm < 0.0) == (fa < 0.0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def real_roots(c, lo=0.0, hi=math.inf, rel=1e-12):
    """Sorted real roots of ``c`` inside ``[lo, hi]``.

    Closed form up to degree 2, otherwise isolation between the critical
    points followed by bisection.  Double roots are reported once.  A
    polynomial that is identically zero has no isolated roots.
    """
    span = (hi - lo) if math.isfinite(hi) else max(1.0, abs(lo))
    c = trim(c, scale=max(span, abs(lo), 1.0))
    deg = len(c) - 1
    if deg <= 0:
        return []
    if deg == 1:
        roots = [-c[0] / c[1]]
    elif deg == 2:
        roots = _quadratic(c)
    else:
        roots = _isolate(c, lo, hi, rel)
    return sorted(r for r in roots if lo <= r <= hi)


def _quadratic(c):
    c0, b, a = c
    disc = b * b - 4.0 * a * c0
    if disc < 0.0:
        # near-tangent: keep the vertex as a touching root
        if disc >= -1e-12 * max(b * b, abs(4.0 * a * c0)):
            return [-b / (2.0 * a)]
        return []
    sq = math.sqrt(disc)
    if sq == 0.0:
        return [-b / (2.0 * a)]
    q = -0.5 * (b + math.copysign(sq, b))
    r1 = q / a
    r2 = c0 / q if q != 0.0 else r1
    return sorted({r1, r2})


def _isolate(c, lo, hi, rel):
    if not math.isfinite(hi):
        hi = max(lo, 0.0) + cauchy_bound(c)
    crit = real_roots(pder(c), lo, hi, rel)
    pts = [lo] + [x for x in crit if lo < x < hi] + [hi]
    roots = []
    for a, b in zip(pts, pts[1:]):
        fa, fb = peval(c, a), peval(c, b)
        if fa == 0.0:
            roots.append(a)
        elif fb == 0.0:
            continue
        elif (fa < 0.0) != (fb < 0.0):
            roots.append(_bisect(c, a, b, fa, rel))
    if peval(c, hi) == 0.0:
        roots.append(hi)
    # tangent roots at critical points
    for x in crit:
        if lo <= x <= hi and abs(peval(c, x)) <= 1e-12 * max(1.0, *(abs(ci) for ci in c)):
            roots.append(x)
    roots.sort()
    out = []
    for r in roots:
        if not out or r - out[-1] > rel * max(1.0, abs(r)):
            out.append(r)
    return out
