"""Piecewise polynomial functions of one real variable.

A :class:`PiecewiseFn` is defined from its first breakpoint ``x_0`` to
``+inf``.  Piece ``i`` covers ``[x_i, x_{i+1})`` and is stored as
coefficients in the local variable ``u = x - x_i``, lowest degree first.
Evaluation is right-continuous: at a breakpoint the piece on the right is
used, and :meth:`PiecewiseFn.eval_left` gives the left limit.  Jumps are
plain value discontinuities; there are no zero-width pieces.

Every operation here returns a new function.  Instances are immutable.
"""
from __future__ import annotations

import math
import os
import warnings
from bisect import bisect_right
from dataclasses import dataclass

from . import _poly as P
from .errors import DivisionByZero, DomainError, NotInvertible, NotMonotone, NotPiecewiseConstant

EPS_REL = float(os.environ.get("BOTTLEMOD_TOLERANCE", "1e-9"))

# composition results above this degree trigger a warning
MAX_QUIET_DEGREE = 9

INF = math.inf


def set_tolerance(eps: float) -> None:
    global EPS_REL
    if not eps > 0:
        raise ValueError("tolerance must be positive")
    EPS_REL = float(eps)


def atol(*values: float) -> float:
    """Absolute tolerance matching the magnitude of ``values``."""
    m = 1.0
    for v in values:
        if math.isfinite(v) and abs(v) > m:
            m = abs(v)
    return EPS_REL * m


class PiecewiseFn:
    """Right-continuous piecewise polynomial on ``[x_0, inf)``.

    ``breakpoints`` may have one more entry than ``pieces``.  The extra entry
    closes the last piece, and ``extension`` says what happens after it:
    ``"hold"`` freezes the left-limit value there, ``"continue"`` keeps
    evaluating the last polynomial.  Either way the stored form always has
    one piece per breakpoint, the last one unbounded.
    """

    __slots__ = ("breakpoints", "pieces", "_hash")

    def __init__(self, breakpoints, pieces, extension: str = "hold"):
        bps = tuple(float(x) for x in breakpoints)
        pcs = tuple(tuple(float(c) for c in p) for p in pieces)
        if extension not in ("hold", "continue"):
            raise ValueError(f"unknown extension mode {extension!r}")
        if len(bps) == len(pcs) + 1 and pcs:
            if extension == "hold":
                w = bps[-1] - bps[-2]
                pcs = pcs + ((P.peval(pcs[-1], w),),)
            else:
                bps = bps[:-1]
        if not pcs or len(bps) != len(pcs):
            raise ValueError("need one piece per breakpoint (or one fewer with an explicit end)")
        for a, b in zip(bps, bps[1:]):
            if not b > a:
                raise ValueError(f"breakpoints must be strictly increasing, got {a} then {b}")
        for p in pcs:
            if not p:
                raise ValueError("every piece needs at least one coefficient")
            if not all(math.isfinite(c) for c in p):
                raise ValueError("coefficients must be finite")
        if not all(math.isfinite(x) for x in bps):
            raise ValueError("breakpoints must be finite")
        self.breakpoints = bps
        self.pieces = pcs
        self._hash = None

    # -- basics ---------------------------------------------------------

    @property
    def x0(self) -> float:
        return self.breakpoints[0]

    @property
    def degree(self) -> int:
        return max(len(p) for p in self.pieces) - 1

    def __len__(self):
        return len(self.pieces)

    def __eq__(self, other):
        if not isinstance(other, PiecewiseFn):
            return NotImplemented
        return self.breakpoints == other.breakpoints and self.pieces == other.pieces

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.breakpoints, self.pieces))
        return self._hash

    def __repr__(self):
        parts = []
        for i, (x, p) in enumerate(zip(self.breakpoints, self.pieces)):
            end = self.breakpoints[i + 1] if i + 1 < len(self.breakpoints) else INF
            parts.append(f"[{x:g},{end:g}): {list(p)}")
        return "PiecewiseFn(" + "; ".join(parts) + ")"

    def spans(self):
        """Yield ``(start, end, coefficients)`` per piece; the last end is ``inf``."""
        bps = self.breakpoints
        n = len(bps)
        for i in range(n):
            yield bps[i], (bps[i + 1] if i + 1 < n else INF), self.pieces[i]

    def index(self, x: float) -> int:
        if x < self.breakpoints[0]:
            raise DomainError(f"x={x} is left of the domain start {self.breakpoints[0]}")
        return bisect_right(self.breakpoints, x) - 1

    def __call__(self, x: float) -> float:
        i = self.index(x)
        return P.peval(self.pieces[i], x - self.breakpoints[i])

    def eval_left(self, x: float) -> float:
        """Left limit at ``x``; at the domain start this is the value itself."""
        i = self.index(x)
        if i > 0 and x == self.breakpoints[i]:
            i -= 1
        return P.peval(self.pieces[i], x - self.breakpoints[i])

    def values(self, xs):
        return [self(x) for x in xs]

    def end_value(self, i: int) -> float:
        """Left limit at the end of piece ``i`` (``i`` must not be the last)."""
        return P.peval(self.pieces[i], self.breakpoints[i + 1] - self.breakpoints[i])

    def jumps(self):
        """``(x, left, right)`` for every breakpoint with a value discontinuity."""
        out = []
        for i in range(1, len(self.pieces)):
            left = self.end_value(i - 1)
            right = self.pieces[i][0]
            if abs(right - left) > atol(left, right):
                out.append((self.breakpoints[i], left, right))
        return out

    def has_jump(self, x: float) -> bool:
        i = self.index(x)
        if i == 0 or x != self.breakpoints[i]:
            return False
        left = self.end_value(i - 1)
        right = self.pieces[i][0]
        return abs(right - left) > atol(left, right)

    def is_constant_piece(self, i: int) -> bool:
        p = self.pieces[i]
        if len(p) == 1:
            return True
        start, end = self.breakpoints[i], (
            self.breakpoints[i + 1] if i + 1 < len(self.breakpoints) else INF
        )
        w = end - start if math.isfinite(end) else max(1.0, abs(start))
        return len(P.trim(p, w)) == 1 or all(
            abs(c) * w**k <= atol(p[0]) for k, c in enumerate(p) if k
        )

    def is_piecewise_constant(self) -> bool:
        return all(self.is_constant_piece(i) for i in range(len(self.pieces)))

    # -- calculus --------------------------------------------------------

    def derivative(self) -> PiecewiseFn:
        """Piecewise derivative; jumps contribute nothing (see :meth:`jumps`)."""
        return PiecewiseFn(self.breakpoints, [P.pder(p) for p in self.pieces])

    def antiderivative(self, c0: float = 0.0) -> PiecewiseFn:
        """Continuous antiderivative with value ``c0`` at ``x_0``."""
        pieces = []
        acc = float(c0)
        for i, (s, e, p) in enumerate(self.spans()):
            q = P.pint(p, acc)
            pieces.append(q)
            if math.isfinite(e):
                acc = P.peval(q, e - s)
        return PiecewiseFn(self.breakpoints, pieces)

    def integral(self, a: float, b: float) -> float:
        F = self.antiderivative()
        return F(b) - F(a)

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, float)):
            return PiecewiseFn(self.breakpoints, [P.padd(p, (float(other),)) for p in self.pieces])
        return _binary(self, other, P.padd)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            return self + (-float(other))
        return _binary(self, other, P.psub)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return self.scale(-1.0)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return self.scale(float(other))
        return _binary(self, other, P.pmul)

    __rmul__ = __mul__

    def scale(self, k: float) -> PiecewiseFn:
        return PiecewiseFn(self.breakpoints, [P.pscale(p, k) for p in self.pieces])

    # -- structure -------------------------------------------------------

    def restrict(self, start: float) -> PiecewiseFn:
        """Same function with the domain cut to ``[start, inf)``."""
        if start < self.x0:
            if self.x0 - start <= atol(start, self.x0):
                start = self.x0
            else:
                raise DomainError(f"cannot restrict to {start}, domain starts at {self.x0}")
        i = self.index(start)
        if i == 0 and start == self.x0:
            return self
        first = P.pshift(self.pieces[i], start - self.breakpoints[i])
        return PiecewiseFn((start,) + self.breakpoints[i + 1:], (first,) + self.pieces[i + 1:])

    def simplify(self) -> PiecewiseFn:
        """Merge neighbouring pieces that continue the same polynomial."""
        bps = [self.breakpoints[0]]
        pcs = [self.pieces[0]]
        for x, p in zip(self.breakpoints[1:], self.pieces[1:]):
            cont = P.pshift(pcs[-1], x - bps[-1])
            n = max(len(cont), len(p))
            a = cont + (0.0,) * (n - len(cont))
            b = p + (0.0,) * (n - len(p))
            if all(abs(ai - bi) <= atol(ai, bi) for ai, bi in zip(a, b)):
                continue
            bps.append(x)
            pcs.append(p)
        if len(bps) == len(self.breakpoints):
            return self
        return PiecewiseFn(bps, pcs)


# -- constructors -----------------------------------------------------------


def constant(value: float, x0: float = 0.0) -> PiecewiseFn:
    return PiecewiseFn([x0], [[value]])


def linear(slope: float, intercept: float = 0.0, x0: float = 0.0) -> PiecewiseFn:
    return PiecewiseFn([x0], [[intercept, slope]])


def step(at: float, before: float, after: float, x0: float = 0.0) -> PiecewiseFn:
    if at <= x0:
        return constant(after, x0)
    return PiecewiseFn([x0, at], [[before], [after]])


def indicator(a: float, b: float = INF, x0: float = 0.0) -> PiecewiseFn:
    """1 on ``[a, b)``, 0 elsewhere."""
    bps, pcs = [x0], [[0.0]]
    if a <= x0:
        pcs = [[1.0]]
    else:
        bps.append(a)
        pcs.append([1.0])
    if math.isfinite(b):
        if b <= bps[-1]:
            raise ValueError("empty indicator interval")
        bps.append(b)
        pcs.append([0.0])
    return PiecewiseFn(bps, pcs)


def from_points(xs, ys) -> PiecewiseFn:
    """Continuous piecewise-linear interpolant, held constant after the last point."""
    xs = [float(x) for x in xs]
    ys = [float(y) for y in ys]
    if len(xs) != len(ys) or len(xs) < 1:
        raise ValueError("need matching, non-empty point lists")
    pieces = []
    for (xa, ya), (xb, yb) in zip(zip(xs, ys), zip(xs[1:], ys[1:])):
        pieces.append([ya, (yb - ya) / (xb - xa)])
    pieces.append([ys[-1]])
    return PiecewiseFn(xs, pieces)


# -- refinement helpers -----------------------------------------------------


def _refine(fns, start=None):
    """Common breakpoints of ``fns`` from ``start`` on, and each function's
    polynomials re-expanded on that grid."""
    lo = max(f.x0 for f in fns)
    if start is not None:
        if start < lo - atol(start, lo):
            raise DomainError(f"{start} is outside the common domain starting at {lo}")
        lo = max(lo, start)
    grid = {lo}
    for f in fns:
        for x in f.breakpoints:
            if x > lo:
                grid.add(x)
    grid = sorted(grid)
    polys = []
    for f in fns:
        row = []
        bps = f.breakpoints
        i = bisect_right(bps, lo) - 1
        n = len(bps)
        for x in grid:
            while i + 1 < n and bps[i + 1] <= x:
                i += 1
            row.append(P.pshift(f.pieces[i], x - bps[i]))
        polys.append(row)
    return grid, polys


def _binary(f, g, op):
    grid, (pf, pg) = _refine([f, g])
    return PiecewiseFn(grid, [op(a, b) for a, b in zip(pf, pg)])


def _width(grid, j):
    return grid[j + 1] - grid[j] if j + 1 < len(grid) else INF


def _probe(u0, u1):
    """A point strictly inside ``(u0, u1)``; ``u1`` may be infinite."""
    if math.isfinite(u1):
        return 0.5 * (u0 + u1)
    return u0 + max(1.0, abs(u0))


def _cuts(polys, w, origin=0.0):
    """Interior roots of pairwise differences on a piece of width ``w``.

    Roots that would round onto either end of the piece once shifted to
    ``origin`` are dropped, so the cut points stay strictly increasing.
    """
    cuts = set()
    n = len(polys)
    for a in range(n):
        for b in range(a + 1, n):
            for r in P.real_roots(P.psub(polys[a], polys[b]), 0.0, w):
                if origin < origin + r < origin + w:
                    cuts.add(r)
    return sorted(cuts)


# -- module-level API -------------------------------------------------------


def evaluate(f: PiecewiseFn, x: float) -> float:
    return f(x)


def eval_left(f: PiecewiseFn, x: float) -> float:
    return f.eval_left(x)


def derivative(f: PiecewiseFn) -> PiecewiseFn:
    return f.derivative()


def antiderivative(f: PiecewiseFn, c0: float = 0.0) -> PiecewiseFn:
    return f.antiderivative(c0)


def has_jump(f: PiecewiseFn, x: float) -> bool:
    return f.has_jump(x)


def add(f, g):
    return f + g


def sub(f, g):
    return f - g


def mul(f, g):
    return f * g


def splice(base: PiecewiseFn, at: float, patch: PiecewiseFn) -> PiecewiseFn:
    """``base`` on ``[x_0, at)`` followed by ``patch`` from ``at`` on."""
    if at < base.x0 or at < patch.x0 - atol(at, patch.x0):
        raise DomainError(f"splice point {at} outside a domain")
    tail = patch.restrict(at)
    if at == base.x0:
        return tail
    i = bisect_right(base.breakpoints, at) - 1
    if base.breakpoints[i] == at:
        i -= 1
    return PiecewiseFn(base.breakpoints[: i + 1] + tail.breakpoints, base.pieces[: i + 1] + tail.pieces)


def div_by_pwconstant(f: PiecewiseFn, g: PiecewiseFn) -> PiecewiseFn:
    """``f / g`` for piecewise-constant ``g``, with ``0 / 0 = 0``."""
    grid, (pf, pg) = _refine([f, g])
    out = []
    for j, (a, b) in enumerate(zip(pf, pg)):
        w = _width(grid, j)
        scale_w = w if math.isfinite(w) else max(1.0, abs(grid[j]))
        if len(P.trim(b, scale_w)) > 1:
            raise NotPiecewiseConstant(f"divisor is not constant on [{grid[j]}, {grid[j] + w})")
        d = b[0]
        if abs(d) <= EPS_REL * 1e-3:
            size = max(abs(c) * scale_w**k for k, c in enumerate(a))
            if size <= atol(0.0):
                out.append((0.0,))
                continue
            raise DivisionByZero(f"division by zero on [{grid[j]}, {grid[j] + w})")
        out.append(P.pscale(a, 1.0 / d))
    return PiecewiseFn(grid, out)


@dataclass(frozen=True)
class Envelope:
    """Lower envelope with the index set attaining the minimum on each piece."""

    fn: PiecewiseFn
    labels: tuple

    def label_at(self, x: float) -> frozenset:
        return self.labels[self.fn.index(x)]


def minimum(fns) -> Envelope:
    """Section-wise lower envelope of ``fns``.

    Pieces are split at every pairwise intersection; each resulting piece is
    labelled with the indices of the functions within tolerance of the
    minimum there.
    """
    fns = list(fns)
    if not fns:
        raise ValueError("minimum of an empty list")
    if len(fns) == 1:
        f = fns[0]
        return Envelope(f, tuple(frozenset({0}) for _ in f.pieces))
    grid, polys = _refine(fns)
    bps, pcs, labels = [], [], []
    for j, x in enumerate(grid):
        w = _width(grid, j)
        ps = [row[j] for row in polys]
        cuts = _cuts(ps, w, x)
        edges = [0.0] + cuts + [w]
        for u0, u1 in zip(edges, edges[1:]):
            m = _probe(u0, u1)
            vals = [P.peval(p, m) for p in ps]
            mn = min(vals)
            tol = atol(*vals)
            lab = frozenset(i for i, v in enumerate(vals) if v <= mn + tol)
            k = min(lab)
            poly = P.pshift(ps[k], u0)
            start = x + u0
            if bps and labels[-1] == lab:
                prev = P.pshift(pcs[-1], start - bps[-1])
                if len(prev) == len(poly) and all(
                    abs(a - b) <= atol(a, b) for a, b in zip(prev, poly)
                ):
                    continue
            bps.append(start)
            pcs.append(poly)
            labels.append(lab)
    return Envelope(PiecewiseFn(bps, pcs), tuple(labels))


def monotone_witness(f: PiecewiseFn):
    """First point where ``f`` decreases by more than tolerance, or ``None``."""
    for i, (s, e, p) in enumerate(f.spans()):
        if i > 0:
            left = f.end_value(i - 1)
            if p[0] < left - atol(left, p[0]):
                return s
        w = e - s
        if len(p) <= 1:
            continue
        crit = P.real_roots(P.pder(p), 0.0, w)
        pts = [0.0] + [c for c in crit if 0.0 < c < w]
        if math.isfinite(w):
            pts.append(w)
        else:
            pts.append(pts[-1] + max(1.0, abs(pts[-1])))
        vals = [P.peval(p, u) for u in pts]
        for u, va, vb in zip(pts[1:], vals, vals[1:]):
            if vb < va - atol(va, vb):
                return s + u
        if not math.isfinite(w):
            q = P.trim(p, max(1.0, abs(s)))
            if len(q) > 1 and q[-1] < 0.0:
                return s + pts[-1]
    return None


@dataclass(frozen=True)
class MonotoneTag:
    kind: str = "non-decreasing"
    tolerance: float = 0.0

    def verify(self, f: PiecewiseFn) -> bool:
        if self.kind == "none":
            return True
        return monotone_witness(f) is None


def is_monotone(f: PiecewiseFn) -> bool:
    return monotone_witness(f) is None


def compose(outer: PiecewiseFn, inner: PiecewiseFn, at_flats=None) -> PiecewiseFn:
    """``outer(inner(x))`` for non-decreasing ``inner``.

    ``at_flats``, if given, is called with the level of every constant piece
    of ``inner`` and supplies the value used there instead of ``outer``.
    """
    w = monotone_witness(inner)
    if w is not None:
        raise NotMonotone(f"inner function decreases at x={w}")
    obps = outer.breakpoints
    bps, pcs = [], []
    max_deg = 0
    for i, (s, e, q) in enumerate(inner.spans()):
        w = e - s
        qt = P.trim(q, w if math.isfinite(w) else max(1.0, abs(s)))
        if len(qt) == 1:
            v = qt[0]
            val = at_flats(v) if at_flats is not None else outer(_clamp(outer, v))
            bps.append(s)
            pcs.append((val,))
            continue
        v0 = P.peval(q, 0.0)
        v1 = P.peval(q, w) if math.isfinite(w) else INF
        cuts = []
        lo = bisect_right(obps, v0)
        for b in obps[lo:]:
            if b >= v1:
                break
            rs = [r for r in P.real_roots(P.padd(q, (-b,)), 0.0, w) if s < s + r < e]
            if rs:
                cuts.append(rs[0])
        edges = [0.0] + sorted(set(cuts)) + [w]
        for u0, u1 in zip(edges, edges[1:]):
            if bps and s + u0 <= bps[-1]:
                continue
            y = P.peval(q, _probe(u0, u1))
            j = outer.index(_clamp(outer, y))
            local = P.padd(P.pshift(q, u0), (-obps[j],))
            poly = P.pcompose(outer.pieces[j], local)
            max_deg = max(max_deg, len(poly) - 1)
            bps.append(s + u0)
            pcs.append(poly)
    if max_deg > MAX_QUIET_DEGREE:
        warnings.warn(f"composition produced degree {max_deg} pieces", RuntimeWarning, stacklevel=2)
    return PiecewiseFn(bps, pcs)


def _clamp(f, x):
    if x < f.x0 and f.x0 - x <= atol(x, f.x0):
        return f.x0
    return x


class GeneralizedInverse:
    """``y -> min{x : f(x) >= y}`` for a non-decreasing ``f``.

    ``fn`` holds the right-continuous companion ``inf{x : f(x) > y}``; both
    agree except at the levels of constant stretches of ``f``, where calling
    the object gives the left end of the stretch.
    """

    def __init__(self, fn, x0, y0, y_max, attained):
        self.fn = fn
        self.x0 = x0
        self.y0 = y0
        self.y_max = y_max
        self.attained = attained

    def __call__(self, y: float) -> float:
        if y <= self.y0 + atol(y, self.y0):
            return self.x0
        if y > self.y_max + atol(y, self.y_max) or (y > self.y_max and not self.attained):
            raise DomainError(f"y={y} is above the range of the function (sup {self.y_max})")
        if self.fn is None:
            return self.x0
        return self.fn.eval_left(min(y, self.y_max) if self.attained else y)


def generalized_inverse(f: PiecewiseFn) -> GeneralizedInverse:
    """Left generalized inverse of a non-decreasing piecewise-linear ``f``.

    Increasing linear pieces invert exactly, constant stretches of ``f``
    become jumps and jumps of ``f`` become constant stretches.
    """
    w = monotone_witness(f)
    if w is not None:
        raise NotMonotone(f"function decreases at x={w}")
    out = []  # (y_start, coefficients)

    def emit(y, poly):
        if out and y <= out[-1][0] + atol(y, out[-1][0]):
            out[-1] = (out[-1][0], poly)
        else:
            out.append((y, poly))

    y0 = f(f.x0)
    ycur = y0
    attained = True
    y_max = y0
    n = len(f.pieces)
    for i, (s, e, p) in enumerate(f.spans()):
        width = e - s
        q = P.trim(p, width if math.isfinite(width) else max(1.0, abs(s)))
        if len(q) == 2 and q[1] > 0.0:
            emit(q[0], (s - q[0] / q[1], 1.0 / q[1]))
            if math.isfinite(width):
                ycur = P.peval(q, width)
            else:
                ycur = INF
                attained = False
        elif len(q) > 2:
            raise NotInvertible(f"piece starting at {s} has degree {len(q) - 1}")
        else:
            ycur = q[0]
        if i + 1 < n:
            nxt = f.pieces[i + 1][0]
            if nxt > ycur + atol(ycur, nxt):
                emit(ycur, (e,))
                ycur = nxt
        y_max = ycur
    # emitted linear pieces hold coefficients in the global variable y; localize
    bps, pcs = [], []
    for y, poly in out:
        bps.append(y)
        pcs.append(P.pshift(poly, y) if len(poly) > 1 else poly)
    fn = None
    if bps:
        if bps[0] > 0.0 and y0 > 0.0:
            bps.insert(0, 0.0)
            pcs.insert(0, (f.x0,))
        fn = PiecewiseFn(bps, pcs)
    return GeneralizedInverse(fn, f.x0, y0, y_max, attained)


def first_crossing(f: PiecewiseFn, g: PiecewiseFn, after: float, direction: str = "any"):
    """First ``x >= after`` where ``f - g`` changes sign.

    ``direction="up"`` looks for the first point at or right after which
    ``f > g`` (the region before ``after`` counts as ``f <= g``);
    ``"down"`` is the mirror image.  ``"any"`` reports the first change away
    from the sign ``f - g`` has just after ``after``.  Returns ``None`` when
    there is no crossing.
    """
    if direction not in ("up", "down", "any"):
        raise ValueError(direction)
    grid, (pf, pg) = _refine([f, g], start=after)
    want = {"up": 1, "down": -1}.get(direction)
    for x, sgn in _sign_runs(grid, pf, pg):
        if sgn == 0:
            continue
        if want is None:
            want = -sgn
            continue
        if sgn == want:
            return x
    return None


def _sign_runs(grid, pf, pg):
    """Yield ``(x, sign)`` for every point value and open run of ``f - g``."""
    for j, x in enumerate(grid):
        w = _width(grid, j)
        a, b = pf[j], pg[j]
        d = P.psub(a, b)
        va, vb = P.peval(a, 0.0), P.peval(b, 0.0)
        yield x, _sign(va - vb, va, vb)
        cuts = [r for r in P.real_roots(d, 0.0, w) if 0.0 < r < w]
        edges = [0.0] + cuts + [w]
        for u0, u1 in zip(edges, edges[1:]):
            if u0 > 0.0:
                va, vb = P.peval(a, u0), P.peval(b, u0)
                yield x + u0, _sign(va - vb, va, vb)
            m = _probe(u0, u1)
            va, vb = P.peval(a, m), P.peval(b, m)
            yield x + u0, _sign(va - vb, va, vb)


def _sign(d, a, b):
    if abs(d) <= atol(a, b):
        return 0
    return 1 if d > 0 else -1


def first_reach(f: PiecewiseFn, level: float, after: float):
    """Smallest ``x >= after`` with ``f(x) >= level`` (within tolerance)."""
    g = f.restrict(after)
    tol = atol(level)
    for s, e, p in g.spans():
        if P.peval(p, 0.0) >= level - tol:
            return s
        w = e - s
        roots = [r for r in P.real_roots(P.padd(p, (-level,)), 0.0, w) if 0.0 < r < w]
        for k, r in enumerate(roots):
            nxt = roots[k + 1] if k + 1 < len(roots) else w
            if P.peval(p, _probe(r, nxt)) >= level - tol:
                return s + r
    return None


def sup_value(f: PiecewiseFn) -> float:
    """Supremum of a non-decreasing function (``inf`` if it grows forever)."""
    s, e, p = list(f.spans())[-1]
    q = P.trim(p, max(1.0, abs(s)))
    if len(q) > 1 and q[-1] > 0.0:
        return INF
    return q[0]


def min_value(f: PiecewiseFn):
    """``(value, x)`` of the smallest value ``f`` takes (``-inf`` if unbounded)."""
    best, where = INF, f.x0
    for s, e, p in f.spans():
        w = e - s
        pts = [0.0] + [c for c in P.real_roots(P.pder(p), 0.0, w) if 0.0 < c < w]
        if math.isfinite(w):
            pts.append(w)
        else:
            q = P.trim(p, max(1.0, abs(s)))
            if len(q) > 1 and q[-1] < 0.0:
                return -INF, s + pts[-1] + max(1.0, abs(s))
        for u in pts:
            v = P.peval(p, u)
            if v < best:
                best, where = v, s + u
    return best, where
