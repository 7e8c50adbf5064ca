"""Interaction diagrams for q-walk collision moments.

A diagram is a sequence of m couples (which pair of walks collides in
each replica stretch) with consecutive couples distinct.  The module
provides exhaustive enumeration, the jump/index classification driving
the downward induction over stretch lengths (small/long jumps; stopping,
fresh, good and bad indices; the backward anchor map phi), the nuisance
coefficient recursion with its geometric bound, numeric evaluation of
the per-diagram bound chain, and the closing geometric-series bound.

Exact small instances of the diagram decomposition are evaluated
spatially so the truncated series can be compared against the transfer
values of :mod:`polymer2d.polymer`.
"""

import math
from dataclasses import dataclass
import numpy as np

from .kernel import CapacityError
from .scaling import big_f, lambda_tn_sq, small_f

ENUM_Q_CAP = 5
ENUM_M_CAP = 7


@dataclass(frozen=True)
class Diagram:
    q: int
    couples: tuple  # ((i, j), ...), 1-based, i < j, consecutive distinct

    @property
    def m(self):
        return len(self.couples)

    def __post_init__(self):
        for i, j in self.couples:
            if not 1 <= i < j <= self.q:
                raise ValueError(f"invalid couple ({i}, {j}) for q={self.q}")
        for a, b in zip(self.couples, self.couples[1:]):
            if a == b:
                raise ValueError("consecutive couples must differ")


def all_couples(q):
    return [(i, j) for i in range(1, q + 1) for j in range(i + 1, q + 1)]


def enumerate_diagrams(q, m, q_cap=ENUM_Q_CAP, m_cap=ENUM_M_CAP):
    """All diagrams with m couples over q walks in lexicographic order."""
    if q > q_cap or m > m_cap:
        raise CapacityError(f"enumeration capped at q<={q_cap}, m<={m_cap}")
    cs = all_couples(q)
    if m == 0:
        yield Diagram(q=q, couples=())
        return

    def rec(prefix):
        if len(prefix) == m:
            yield Diagram(q=q, couples=tuple(prefix))
            return
        for c in cs:
            if prefix and prefix[-1] == c:
                continue
            yield from rec(prefix + [c])

    yield from rec([])


def count_diagrams(q, m):
    """|D(m, q)| = binom(q,2) (binom(q,2) - 1)^(m-1)."""
    if m == 0:
        return 1
    npair = math.comb(q, 2)
    return npair * (npair - 1) ** (m - 1)


def last_active(couples, r):
    """Index pair (kbar1, kbar2, kbar) of the last couples containing the
    two walks of couple r (1-based; 0 when the walk is fresh)."""
    i_r, j_r = couples[r - 1]
    k1 = k2 = 0
    for x in range(r - 1, 0, -1):
        c = set(couples[x - 1])
        if k1 == 0 and i_r in c:
            k1 = x
        if k2 == 0 and j_r in c:
            k2 = x
        if k1 and k2:
            break
    return k1, k2, max(k1, k2)


@dataclass(frozen=True)
class ClassifiedDiagram:
    """A diagram with all per-index marks filled (1-based arrays).

    Index r is a small jump when its couple was active recently
    (r - kbar_r <= L + 2), otherwise a long jump.  Stopping indices pace
    the long stretches between small jumps at distance L; fresh indices
    are long jumps that end a nuisance-free run; good = long and not
    fresh; everything else is bad.  phi(r) anchors the time-gap sum fed
    to the decreasing weight during the downward induction.
    """

    diagram: Diagram
    L: int
    kbar1: tuple
    kbar2: tuple
    kbar: tuple
    is_long: tuple
    is_small: tuple
    is_stopping: tuple
    is_fresh: tuple
    is_good: tuple
    is_bad: tuple
    phi: tuple
    small_positions: tuple

    @property
    def m(self):
        return self.diagram.m

    @property
    def q(self):
        return self.diagram.q

    @property
    def n_small(self):
        return len(self.small_positions)


def classify(diagram, L):
    """Mark every index of the diagram following the four-step procedure:
    small jumps, then stopping indices, then fresh, the rest good."""
    if L < 3:
        raise ValueError("L must be >= 3")
    m = diagram.m
    couples = diagram.couples
    kb1 = [0] * (m + 1)
    kb2 = [0] * (m + 1)
    kb = [0] * (m + 1)
    for r in range(1, m + 1):
        kb1[r], kb2[r], kb[r] = last_active(couples, r)
    small = [False] * (m + 1)
    for r in range(1, m + 1):
        small[r] = (r - kb[r]) <= L + 2
    longj = [False] * (m + 1)
    for r in range(1, m + 1):
        longj[r] = not small[r]
    s_list = [r for r in range(1, m + 1) if small[r]]
    bounds = [0] + s_list + [m + 1]
    stopping = [False] * (m + 1)
    for b in range(1, len(bounds)):
        s_prev, s_cur = bounds[b - 1], bounds[b]
        if s_cur - s_prev > L + 1:
            k = 1
            while s_cur - k * L - 1 > s_prev:
                stopping[s_cur - k * L - 1] = True
                k += 1
    # a long jump is fresh if it is stopping, precedes a small jump, or
    # is the last index
    fresh = [False] * (m + 1)
    for r in range(1, m + 1):
        fresh[r] = longj[r] and (stopping[r]
                                 or (r < m and small[r + 1])
                                 or r == m)
    good = [False] * (m + 1)
    bad = [False] * (m + 1)
    for r in range(1, m + 1):
        good[r] = longj[r] and not fresh[r]
        bad[r] = not good[r]
    phi = [0] * (m + 1)
    if m >= 1:
        phi[m] = m
    for r in range(1, m):
        if (not stopping[r]) and longj[r + 1]:
            nxt = next((rp for rp in range(r, m + 1) if fresh[rp]), None)
            if nxt is None:
                raise AssertionError("no fresh index ahead of a long jump")
            phi[r] = nxt - L
        else:
            phi[r] = r
    return ClassifiedDiagram(
        diagram=diagram, L=L,
        kbar1=tuple(kb1), kbar2=tuple(kb2), kbar=tuple(kb),
        is_long=tuple(longj), is_small=tuple(small),
        is_stopping=tuple(stopping), is_fresh=tuple(fresh),
        is_good=tuple(good), is_bad=tuple(bad), phi=tuple(phi),
        small_positions=tuple(s_list))


def u_tilde(cd, r, us):
    """Recent-activity backlog entering the weight argument at index r.

    us is 1-based (us[0] unused).  Sums the stretch lengths since the
    couple was last active; collapses to half the previous stretch when
    the couple was active at the immediately preceding index.
    """
    if r < 2:
        raise ValueError("backlog defined for r >= 2")
    kb = cd.kbar[r]
    if kb == r - 1:
        return 0.5 * us[r - 1]
    return float(sum(us[kb + 1:r]))


def structure_violations(cd):
    """Check every structural property of the classification; returns a
    list of human-readable violations (empty means all hold)."""
    out = []
    m = cd.m
    small, longj = cd.is_small, cd.is_long
    fresh, good, stop = cd.is_fresh, cd.is_good, cd.is_stopping
    phi = cd.phi
    if m == 0:
        return out
    if not small[1]:
        out.append("index 1 must be a small jump")
    for r in range(1, m + 1):
        if stop[r] and not fresh[r]:
            out.append(f"stopping index {r} not fresh")
        if phi[r] > r:
            out.append(f"phi({r}) = {phi[r]} > {r}")
        if good[r] and phi[r] > r - 1:
            out.append(f"phi({r}) = {phi[r]} > {r - 1} at good index")
    if longj[m] and not fresh[m]:
        out.append("last index is a long jump but not fresh")
    for r in range(1, m):
        if good[r] and not longj[r + 1]:
            out.append(f"good index {r} not followed by a long jump")
        if longj[r + 1] and phi[r] > r:
            out.append(f"phi({r}) > {r} before a long jump")
    for r in range(2, m):
        if good[r] and phi[r - 1] != phi[r]:
            out.append(f"phi({r - 1}) != phi({r}) around good index {r}")
    for r in range(2, m + 1):
        if fresh[r] and phi[r - 1] != r - cd.L:
            out.append(f"phi({r - 1}) != {r - cd.L} before fresh index {r}")
    n_bad = sum(1 for r in range(1, m + 1) if cd.is_bad[r])
    if n_bad > 2 * cd.n_small + m / cd.L + 1:
        out.append(f"{n_bad} bad indices exceed 2n + m/L + 1")
    return out


def small_jump_count_bound(q, m, L):
    """Exhaustively count diagrams by number of small jumps and compare
    with binom(m,n) (2(L+2)q)^n binom(q,2)^(m-n)."""
    counts = {}
    for d in enumerate_diagrams(q, m):
        n = classify(d, L).n_small
        counts[n] = counts.get(n, 0) + 1
    rows = []
    ok = True
    for n, c in sorted(counts.items()):
        bound = (math.comb(m, n) * (2 * (L + 2) * q) ** n
                 * math.comb(q, 2) ** (m - n))
        rows.append((n, c, bound))
        ok = ok and c <= bound
    return ok, rows


# ---------------------------------------------------------------------------
# nuisance coefficients
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoeffTable:
    """Coefficients c[k][i] of the downward induction, with the bad-index
    indicators gamma[k] that switched each recursion step."""

    c: tuple          # c[k] is a tuple of length k+1, k = 1..m
    gamma: tuple      # gamma[k] for k = 1..m-1 (1-based, entry 0 unused)

    def value(self, k, i):
        if i > k:
            return 0.0
        return self.c[k - 1][i]


def coeff_table(cd, gamma_mode="diagram"):
    """Run the coefficient recursion c^{k+1} = c^k + 2 gamma_k cumsum.

    gamma_mode "diagram" takes gamma_k = 1{index m-k is bad}; "all_bad"
    forces every gamma to 1, a diagram-independent worst case (marked
    non-standard, used for stress tests only).
    """
    m = cd.m
    if m == 0:
        return CoeffTable(c=(), gamma=())
    if gamma_mode == "diagram":
        gamma = [0] + [1 if cd.is_bad[m - k] else 0 for k in range(1, m)]
    elif gamma_mode == "all_bad":
        gamma = [0] + [1] * (m - 1)
    else:
        raise ValueError(f"unknown gamma_mode {gamma_mode!r}")
    tables = [(1.0, 2.0)]
    for k in range(1, m):
        cur = tables[-1]
        g = gamma[k]
        nxt = []
        for i in range(k + 2):
            base = cur[i] if i <= k else 0.0
            nxt.append(base + 2.0 * g * sum(cur[j] for j in range(min(i, k + 1))))
        tables.append(tuple(nxt))
    return CoeffTable(c=tuple(tables), gamma=tuple(gamma))


def coeff_bound_violations(cd, table=None):
    """Geometric bound c_i^k <= 3^i prod_{r<k} (1 + gamma_r)."""
    if table is None:
        table = coeff_table(cd)
    out = []
    for k in range(1, cd.m + 1):
        prod = 1.0
        for r in range(1, k):
            prod *= 1 + table.gamma[r]
        for i in range(k + 1):
            if table.value(k, i) > (3.0 ** i) * prod * (1 + 1e-12):
                out.append((k, i, table.value(k, i), (3.0 ** i) * prod))
    return out


# ---------------------------------------------------------------------------
# induction inequality, brute force
# ---------------------------------------------------------------------------

def _suffix_tuples(k, budget):
    """All (u_1..u_k) with entries >= 1 and sum <= budget."""
    if k == 0:
        yield ()
        return
    for first in range(1, budget - k + 2):
        for rest in _suffix_tuples(k - 1, budget - first):
            yield (first,) + rest


def bound_sum_lhs(cd, params, T, k, prefix):
    """Exact suffix sum of the weight product for the last k stretches.

    prefix holds u_1..u_{m-k}; the sum runs over u_{m-k+1}..u_m >= 1
    subject to the total budget sum(u) <= T.
    """
    m = cd.m
    if not 1 <= k <= m - 1:
        raise ValueError("k must lie in [1, m-1]")
    if len(prefix) != m - k:
        raise ValueError("prefix length mismatch")
    base = sum(prefix)
    if base > T:
        raise ValueError("prefix already exceeds the budget")
    us = [0.0] * (m + 1)
    for i, u in enumerate(prefix, start=1):
        us[i] = u
    total = 0.0
    for suffix in _suffix_tuples(k, T - base):
        for i, u in enumerate(suffix, start=m - k + 1):
            us[i] = u
        prod = 1.0
        for r in range(m - k + 1, m + 1):
            prod *= big_f(params, us[r] + u_tilde(cd, r, us))
        total += prod
    return total


def bound_sum_rhs(cd, params, T, k, prefix, table=None):
    """Coefficient-side bound sum_i c_i^k/(k-i)! (1-bh^2)^-i f(v)^(k-i)."""
    m = cd.m
    if table is None:
        table = coeff_table(cd)
    us = [0.0] * (m + 1)
    for i, u in enumerate(prefix, start=1):
        us[i] = u
    v = sum(us[cd.phi[m - k]:m - k + 1])
    fv = small_f(params, T, v)
    mu = 1.0 - params.beta_hat ** 2
    total = 0.0
    for i in range(k + 1):
        total += (table.value(k, i) / math.factorial(k - i)
                  * mu ** (-i) * fv ** (k - i))
    return total


def induction_step_sides(cd, params, T, k, j, prefix):
    """Single summation step: (lhs, rhs) of the one-variable reduction.

    Sums over u = u_{m-k} with the running budget; the right side is the
    anchored power of the remaining mass plus the nuisance cascade that
    appears when index m-k is bad.
    """
    m = cd.m
    if not 0 <= k <= m - 2:
        raise ValueError("k must lie in [0, m-2]")
    if j > k:
        raise ValueError("j must be <= k")
    if len(prefix) != m - k - 1:
        raise ValueError("prefix length mismatch")
    base = sum(prefix)
    us = [0.0] * (m + 1)
    for i, u in enumerate(prefix, start=1):
        us[i] = u
    lhs = 0.0
    r = m - k
    for u in range(1, T - int(base) + 1):
        us[r] = u
        arg = sum(us[cd.phi[r]:r + 1])
        lhs += (big_f(params, us[r] + u_tilde(cd, r, us))
                * small_f(params, T, arg) ** j)
    gamma = 1 if cd.is_bad[r] else 0
    v = sum(us[cd.phi[r - 1]:r])
    fv = small_f(params, T, v)
    mu = 1.0 - params.beta_hat ** 2
    rhs = fv ** (j + 1) / (j + 1)
    if gamma:
        for el in range(1, j + 2):
            rhs += (math.factorial(j) / math.factorial(j + 1 - el)
                    * 2.0 * mu ** (-el) * fv ** (j + 1 - el))
    return lhs, rhs


# ---------------------------------------------------------------------------
# per-diagram bound evaluation
# ---------------------------------------------------------------------------

def eval_a(cd, params, T, renewal_table, pstar,
           caps=(3, 12)):
    """Space-collapsed diagram weight: sum over stretch lengths u (budget
    T) and overlap lengths v of the kernel-supremum chain.

    The v-sums factorize per index once the u-tuple is fixed.
    """
    m = cd.m
    if m == 0:
        return 1.0
    if m > caps[0] or T > caps[1]:
        raise CapacityError(f"direct evaluation capped at m<={caps[0]}, "
                            f"T<={caps[1]}")
    if len(pstar) < 5 * T + 1:
        raise ValueError("pstar array too short (need 5T)")
    u_part = renewal_table.u[:T + 1]
    last_sum = float(u_part.sum())
    total = 0.0
    us = [0] * (m + 1)

    def rec(r, budget):
        nonlocal total
        if r > m:
            prod = pstar[2 * us[1]]
            for t in range(1, m):
                shift = int(2 * us[t + 1] + 2 * u_tilde(cd, t + 1, us))
                prod *= float(np.dot(u_part, pstar[shift:shift + T + 1]))
            total += prod * last_sum
            return
        for u in range(1, budget + 1):
            us[r] = u
            rec(r + 1, budget - u)

    rec(1, T)
    return total


def eval_a_tilde(cd, params, T, pstar, eps=0.0, caps=(3, 12)):
    """v-summed form of the diagram weight with the decreasing-weight
    product; carries the (1+eps)^m slot of the overlap-sum comparison."""
    m = cd.m
    if m == 0:
        return 1.0
    if m > caps[0] or T > caps[1]:
        raise CapacityError(f"direct evaluation capped at m<={caps[0]}, "
                            f"T<={caps[1]}")
    mu = 1.0 - params.beta_hat ** 2
    total = 0.0
    us = [0] * (m + 1)

    def rec(r, budget):
        nonlocal total
        if r > m:
            prod = pstar[2 * us[1]] * (1 + eps) ** m
            for t in range(2, m + 1):
                prod *= big_f(params, us[t] + u_tilde(cd, t, us))
            total += prod
            return
        for u in range(1, budget + 1):
            us[r] = u
            rec(r + 1, budget - u)

    rec(1, T)
    return total / mu


# ---------------------------------------------------------------------------
# exact diagram sums (small m) and chaos grouping
# ---------------------------------------------------------------------------

class _LatticeGrid:
    """Dense square grid with kernel/overlap lookups for exact sums."""

    def __init__(self, radius, kernel_table, spatial_u):
        self.radius = radius
        pts = [(a, b) for a in range(-radius, radius + 1)
               for b in range(-radius, radius + 1)]
        self.pts = pts
        self.index = {p: i for i, p in enumerate(pts)}
        self.ktable = kernel_table
        self.spatial = spatial_u

    def pvec(self, d, x0):
        return np.array([self.ktable.p(d, (p[0] - x0[0], p[1] - x0[1]))
                         for p in self.pts])

    def pmat(self, d):
        out = np.empty((len(self.pts), len(self.pts)))
        for j, pj in enumerate(self.pts):
            out[:, j] = self.pvec(d, pj)
        return out

    def u_at(self, n, dx):
        if n == 0:
            return 1.0 if dx == (0, 0) else 0.0
        u, v = dx[0] + dx[1], dx[0] - dx[1]
        if abs(u) > n or abs(v) > n or (u + n) % 2 or (v + n) % 2:
            return 0.0
        return float(self.spatial[n][(u + n) // 2, (v + n) // 2])

    def umat(self, n):
        out = np.empty((len(self.pts), len(self.pts)))
        for j, pj in enumerate(self.pts):
            out[:, j] = [self.u_at(n, (p[0] - pj[0], p[1] - pj[1]))
                         for p in self.pts]
        return out

    def u_scalar(self, n):
        if n == 0:
            return 1.0
        return float(self.spatial[n].sum())


def exact_diagram_sum(diagram, T, X, grid):
    """Exact time-and-position sum of one diagram's contribution (m <= 2).

    Walks not involved in a collision are already integrated out; the
    remaining factors are entry kernels for the first couple, overlap
    weights along each stretch, and transition kernels anchored at the
    previous activity of each walk.
    """
    m = diagram.m
    if m == 0:
        return 1.0
    if m > 2:
        raise CapacityError("exact sums implemented for m <= 2")
    couples = diagram.couples
    i1, j1 = couples[0]
    total = 0.0
    if m == 1:
        for a in range(1, T + 1):
            f1 = grid.pvec(a, X[i1 - 1]) * grid.pvec(a, X[j1 - 1])
            mass = float(f1.sum())
            for b in range(a, T + 1):
                total += mass * grid.u_scalar(b - a)
        return total
    i2, j2 = couples[1]
    shared = set(couples[0]) & set(couples[1])
    for a1 in range(1, T + 1):
        f1 = grid.pvec(a1, X[i1 - 1]) * grid.pvec(a1, X[j1 - 1])
        for b1 in range(a1, T + 1):
            g = grid.umat(b1 - a1) @ f1
            for a2 in range(b1 + 1, T + 1):
                if shared:
                    s = next(iter(shared))
                    fresh_walk = i2 if s == j2 else j2
                    inner = grid.pmat(a2 - b1).T @ grid.pvec(a2, X[fresh_walk - 1])
                    val = float(g @ inner)
                else:
                    pair_mass = float((grid.pvec(a2, X[i2 - 1])
                                       * grid.pvec(a2, X[j2 - 1])).sum())
                    val = float(g.sum()) * pair_mass
                for b2 in range(a2, T + 1):
                    total += val * grid.u_scalar(b2 - a2)
    return total


def make_grid(T, X, kernel_table, spatial_u):
    spread = max(abs(v) for p in X for v in p) if X else 0
    return _LatticeGrid(T + spread, kernel_table, spatial_u)


def psi_m_terms(params, q, T, X, m_max, grid):
    """sigma^(2m) sum over D(m, q) of the exact diagram sums."""
    out = {}
    for m in range(m_max + 1):
        acc = 0.0
        for d in enumerate_diagrams(q, m):
            acc += exact_diagram_sum(d, T, X, grid)
        out[m] = params.sigma_N_sq ** m * acc
    return out


def chaos_by_m(params, T, X, m_max=None):
    """Three-walk collision expansion grouped by couple-alternation count.

    Walks the full tree of (meeting time, couple) choices, evolving the
    translation-reduced state once per tree node; every marked meeting
    multiplies by sigma^2 and the couple's coincidence mask.  Returns a
    dict m -> series value (m = number of maximal couple runs).
    """
    from .polymer import triple_plane_steps, triple_state
    s0, masks = triple_state(T, X)
    sig = params.sigma_N_sq
    couple_keys = [(1, 2), (1, 3), (2, 3)]
    out = {}

    def add(m, val):
        out[m] = out.get(m, 0.0) + val

    def rec(state, t, last, m):
        if t == T:
            add(m, float(state.sum()))
            return
        stepped = triple_plane_steps(state)
        rec(stepped, t + 1, last, m)
        for c in couple_keys:
            marked = stepped * masks[c]
            if not marked.any():
                continue
            rec(sig * marked, t + 1, c, m + (c != last))

    rec(s0, 0, None, 0)
    if m_max is not None:
        out = {m: v for m, v in out.items() if m <= m_max}
    return out


# ---------------------------------------------------------------------------
# closing bound
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FinalBound:
    r: float
    bound: float
    valid: bool
    condition_value: float   # 3 bh^2/(1-bh^2) binom(q,2)/log N
    condition_ok: bool


def choose_l(q):
    """ceil(sqrt(q)), lifted to the minimal admissible value 3."""
    return max(3, math.ceil(math.sqrt(q)))


def final_bound(params, q, T, L, eps=0.0, prefactor=1.0):
    """Geometric-series closure of the diagram sums.

    r is the growth ratio of the summed diagram weights; when r < 1 the
    moment bound prefactor/(1-r) * exp((1+eps)(8(L+2)q + binom(q,2))
    2^(1/L) lambda_{T,N}^2) holds.  The absolute constant is not
    certified (prefactor defaults to 1); the shape and the validity flag
    are the point.
    """
    if L < 3:
        raise ValueError("L must be >= 3")
    bh2 = params.beta_hat ** 2
    combo = 8 * (L + 2) * q + math.comb(q, 2)
    r = (3.0 * (1 + eps) * 2.0 ** (1.0 / L) / (1.0 - bh2)
         * (bh2 / params.log_N) * combo)
    lam = lambda_tn_sq(params, T)
    exponent = (1 + eps) * combo * 2.0 ** (1.0 / L) * lam
    bound = prefactor / (1.0 - r) * math.exp(exponent) if r < 1 else math.inf
    cond = 3.0 * bh2 / (1.0 - bh2) * math.comb(q, 2) / params.log_N
    return FinalBound(r=r, bound=bound, valid=r < 1,
                      condition_value=cond, condition_ok=cond < 1)
