"""The DNF-induced Markov chain on bin levels and its exact analysis.

States are the closed state ``c`` (level 0 merged with every level >= 1) and
all reachable levels in (0, 1).  Levels are held as integers on the common
scale ``Q = lcm(size denominators)``.  Apart from transitions into ``c`` every
move strictly raises the level, so ordering states by level makes the balance
equations lower triangular and the hitting-time equations upper triangular.
The exact solvers below are Gaussian elimination in that pivot order, which
produces no fill-in.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, gcd
from typing import Optional

import numpy as np

from .core import CapExceeded, DiscreteDistribution, DnfCoverError, ValidationError, fmt
from .lp import solve_exact

DEFAULT_STATE_CAP = 200_000
DEFAULT_EXACT_CAP = 2_000
FLOAT_RESIDUAL_TOL = 1e-12


class StateExplosion(CapExceeded):
    pass


class Periodic(DnfCoverError):
    def __init__(self, period: int):
        super().__init__(f"chain is {period}-periodic; use the periodic shortcut (AECR = 1)")
        self.period = period


class InconsistentAnalysis(DnfCoverError):
    """Two independent computations of the same quantity disagreed."""


@dataclass
class BinLevelChain:
    dist: DiscreteDistribution
    scale: int
    levels: list[int]  # levels[0] == 0 is the closed state; ascending
    transitions: list[list[tuple[int, Fraction]]]
    depth: list[int] = field(repr=False)

    def __len__(self):
        return len(self.levels)

    @property
    def states(self) -> list:
        return ["c"] + [Fraction(v, self.scale) for v in self.levels[1:]]

    def index_of(self, level: Fraction) -> int:
        if level == 0:
            return 0
        v = level * self.scale
        if v.denominator != 1:
            raise KeyError(level)
        return self._index[int(v)]

    def __post_init__(self):
        self._index = {v: i for i, v in enumerate(self.levels)}

    def dense_matrix(self) -> list[list[Fraction]]:
        n = len(self)
        mat = [[Fraction(0)] * n for _ in range(n)]
        for i, row in enumerate(self.transitions):
            for j, p in row:
                mat[i][j] += p
        return mat

    def float_matrix(self):
        from scipy import sparse

        rows, cols, vals = [], [], []
        for i, row in enumerate(self.transitions):
            for j, p in row:
                rows.append(i)
                cols.append(j)
                vals.append(float(p))
        n = len(self)
        return sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))

    def to_dict(self) -> dict:
        labels = ["c"] + [fmt(Fraction(v, self.scale)) for v in self.levels[1:]]
        return {
            "schema_version": 1,
            "distribution": self.dist.to_dict(),
            "states": labels,
            "transitions": [
                [labels[i], labels[j], fmt(p)] for i, row in enumerate(self.transitions) for j, p in row
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def build_chain(dist: DiscreteDistribution, state_cap: int = DEFAULT_STATE_CAP) -> BinLevelChain:
    """Breadth-first closure of the reachable bin levels, starting from ``c``."""
    if state_cap < 1:
        raise ValidationError("state_cap must be >= 1")
    if dist.sizes[0] == 0:
        raise ValidationError("the level chain needs positive sizes (a size-0 item would not close or move)")
    q = dist.scale()
    weights = list(zip(dist.int_sizes(), dist.probs))
    # c plus every multiple of the smallest size below 1 is reachable
    if -(-q // weights[0][0]) > state_cap:
        raise StateExplosion(
            f"at least {-(-q // weights[0][0])} reachable levels (multiples of the smallest size), "
            f"above the cap {state_cap}; use Monte Carlo"
        )
    depth = {0: 0}
    order = [0]
    edges = {}
    queue = deque([0])
    while queue:
        level = queue.popleft()
        out = {}
        for w, p in weights:
            target = level + w
            if target >= q:
                target = 0
            elif target not in depth:
                if len(depth) >= state_cap:
                    raise StateExplosion(
                        f"more than {state_cap} reachable levels for {len(dist)} sizes; use Monte Carlo"
                    )
                depth[target] = depth[level] + 1
                order.append(target)
                queue.append(target)
            out[target] = out.get(target, 0) + p
        edges[level] = out
    levels = sorted(order)
    index = {v: i for i, v in enumerate(levels)}
    transitions = [sorted((index[t], p) for t, p in edges[v].items()) for v in levels]
    return BinLevelChain(dist, q, levels, transitions, [depth[v] for v in levels])


def period(chain: BinLevelChain) -> int:
    """gcd over all edges u->v of depth(u) + 1 - depth(v), cross-checked on the sizes."""
    d = 0
    for u, row in enumerate(chain.transitions):
        for v, _ in row:
            d = gcd(d, chain.depth[u] + 1 - chain.depth[v])
    d = abs(d) or 1
    interval = interval_period(chain.dist)
    if (d >= 2 or interval >= 2) and d != interval:
        raise InconsistentAnalysis(f"graph period {d} but size-interval period {interval}")
    return d


def interval_period(dist: DiscreteDistribution) -> int:
    """d >= 2 if every size lies in [1/d, 1/(d-1)), i.e. all share ceil(1/s) = d; else 1."""
    if dist.sizes[0] == 0:
        return 1
    ds = {ceil(1 / s) for s in dist.sizes}
    if len(ds) == 1:
        d = ds.pop()
        return d if d >= 2 else 1
    return 1


@dataclass
class Stationary:
    values: list  # aligned with chain.states; Fractions when exact
    exact: bool
    residual: float = 0.0

    def closed(self):
        return self.values[0]

    def as_dict(self, chain: BinLevelChain) -> dict:
        return dict(zip(chain.states, self.values))


def _incoming(chain: BinLevelChain):
    inc = [[] for _ in chain.levels]
    for i, row in enumerate(chain.transitions):
        for j, p in row:
            if j != 0:
                inc[j].append((i, p))
    return inc


def stationary(
    chain: BinLevelChain, exact_cap: int = DEFAULT_EXACT_CAP, method: str = "auto"
) -> Stationary:
    """Unique solution of pi = pi P with sum(pi) = 1.

    ``method`` is "triangular" (exact substitution in level order), "dense"
    (exact Gauss-Jordan on the full system), "float" (sparse triangular solve
    with a residual certificate) or "auto" (triangular up to ``exact_cap``
    states, float above).
    """
    d = period(chain)
    if d != 1:
        raise Periodic(d)
    if method == "auto":
        method = "triangular" if len(chain) <= exact_cap else "float"
    if method == "triangular":
        return _stationary_triangular(chain)
    if method == "dense":
        return _stationary_dense(chain)
    if method == "float":
        return _stationary_float(chain)
    raise ValueError(f"unknown method {method!r}")


def _stationary_triangular(chain):
    inc = _incoming(chain)
    u = [Fraction(0)] * len(chain)
    u[0] = Fraction(1)
    for j in range(1, len(chain)):
        u[j] = sum((u[i] * p for i, p in inc[j]), Fraction(0))
    inflow = sum((u[i] * p for i, row in enumerate(chain.transitions) for j, p in row if j == 0), Fraction(0))
    if inflow != u[0]:
        raise InconsistentAnalysis("balance equation at the closed state fails")
    total = sum(u)
    return Stationary([x / total for x in u], exact=True)


def _stationary_dense(chain):
    n = len(chain)
    mat = chain.dense_matrix()
    a = [[mat[i][j] - (1 if i == j else 0) for i in range(n)] for j in range(n)]
    a[-1] = [Fraction(1)] * n
    b = [Fraction(0)] * (n - 1) + [Fraction(1)]
    return Stationary(solve_exact(a, b), exact=True)


def _stationary_float(chain):
    from scipy import sparse
    from scipy.sparse.linalg import spsolve_triangular

    n = len(chain)
    p = chain.float_matrix()
    if n == 1:
        return Stationary([1.0], exact=False, residual=0.0)
    # unnormalized u with u[c] = 1: (I - P_LL^T) u_L = P_cL^T
    pt = p.T.tocsr()
    a = sparse.identity(n - 1, format="csr") - pt[1:, 1:]
    rhs = np.asarray(pt[1:, 0].todense()).ravel()
    u_l = spsolve_triangular(a.tocsr(), rhs, lower=True)
    u = np.concatenate([[1.0], u_l])
    pi = u / u.sum()
    residual = float(np.max(np.abs(p.T @ pi - pi)))
    if residual > FLOAT_RESIDUAL_TOL:
        raise InconsistentAnalysis(f"float stationary residual {residual:.3g} above {FLOAT_RESIDUAL_TOL}")
    return Stationary(pi.tolist(), exact=False, residual=residual)


def hitting_times(chain: BinLevelChain, exact: bool = True) -> list:
    """Expected number of further items until the bin closes, per state."""
    one = Fraction(1) if exact else 1.0
    h = [one * 0] * len(chain)
    for j in range(len(chain) - 1, -1, -1):
        acc = one
        for k, p in chain.transitions[j]:
            if k != 0:
                acc += (p if exact else float(p)) * h[k]
        h[j] = acc
    return h


def expected_items_per_bin(chain: BinLevelChain, exact_cap: int = DEFAULT_EXACT_CAP):
    """E[T], computed by first-step analysis and checked against 1/pi(c)."""
    exact = len(chain) <= exact_cap
    h = hitting_times(chain, exact=exact)
    et = h[0]
    d = period(chain)
    if d != 1:
        if et != d:
            raise InconsistentAnalysis(f"periodic chain: E[T]={et} but period {d}")
        return et
    pi = stationary(chain, exact_cap)
    if exact:
        if 1 / pi.closed() != et:
            raise InconsistentAnalysis(f"1/pi(c) = {1 / pi.closed()} but first-step E[T] = {et}")
    elif abs(1 / pi.closed() - et) > 1e-9 * et:
        raise InconsistentAnalysis(f"float E[T] mismatch {1 / pi.closed()} vs {et}")
    return et


def expected_overshoot(chain: BinLevelChain, exact_cap: int = DEFAULT_EXACT_CAP):
    """E[R] from first-step equations on the terminal excess, checked by Wald's identity."""
    exact = len(chain) <= exact_cap
    q = chain.scale
    weights = [(w, p if exact else float(p)) for w, p in zip(chain.dist.int_sizes(), chain.dist.probs)]
    zero = Fraction(0) if exact else 0.0
    r = [zero] * len(chain)
    index = chain._index
    for j in range(len(chain) - 1, -1, -1):
        level = chain.levels[j]
        acc = zero
        for w, p in weights:
            t = level + w
            if t >= q:
                acc += p * (Fraction(t - q, q) if exact else (t - q) / q)
            else:
                acc += p * r[index[t]]
        r[j] = acc
    er = r[0]
    et = hitting_times(chain, exact)[0]
    ex = chain.dist.mean() if exact else float(chain.dist.mean())
    if exact and 1 + er != et * ex:
        raise InconsistentAnalysis(f"Wald identity fails: 1 + {er} != {et} * {ex}")
    return er


def stopping_time_tail(chain: BinLevelChain, i: int) -> Fraction:
    """Exact P[T > i] by propagating the open-bin mass for ``i`` steps from ``c``."""
    if i <= 0:
        return Fraction(1)
    mass = {0: Fraction(1)}
    for _ in range(i):
        nxt = {}
        for s, m in mass.items():
            for j, p in chain.transitions[s]:
                if j != 0:
                    nxt[j] = nxt.get(j, 0) + m * p
        mass = nxt
    return sum(mass.values(), Fraction(0))


@dataclass
class ChainAnalysis:
    dist: DiscreteDistribution
    states: int
    period: int
    stationary: Optional[Stationary]
    expected_T: object
    expected_overshoot: object
    expected_size: Fraction
    exact: bool
    aecr: object = None
    aecr_provenance: str = ""

    def wald_holds(self) -> bool:
        return 1 + self.expected_overshoot == self.expected_T * self.expected_size


def analyze(
    dist: DiscreteDistribution,
    state_cap: int = DEFAULT_STATE_CAP,
    exact_cap: int = DEFAULT_EXACT_CAP,
    with_aecr: bool = True,
) -> ChainAnalysis:
    chain = build_chain(dist, state_cap)
    d = period(chain)
    exact = len(chain) <= exact_cap
    pi = stationary(chain, exact_cap) if d == 1 else None
    result = ChainAnalysis(
        dist=dist,
        states=len(chain),
        period=d,
        stationary=pi,
        expected_T=expected_items_per_bin(chain, exact_cap),
        expected_overshoot=expected_overshoot(chain, exact_cap),
        expected_size=dist.mean(),
        exact=exact,
    )
    if with_aecr:
        result.aecr, result.aecr_provenance = _aecr_from(result)
    return result


def _aecr_from(res: ChainAnalysis):
    from .offline import gamma_rate, is_perfect_packing

    if res.period >= 2:
        return Fraction(1), "periodic"
    ex = res.expected_size if res.exact else float(res.expected_size)
    if is_perfect_packing(res.dist).feasible:
        return 1 / (ex * res.expected_T), "perfect-packing"
    gamma = gamma_rate(res.dist)
    rate = 1 / res.expected_T
    return rate / (gamma.value if res.exact else float(gamma.value)), "lp-bound"


def aecr_exact(
    dist: DiscreteDistribution, state_cap: int = DEFAULT_STATE_CAP, exact_cap: int = DEFAULT_EXACT_CAP
) -> tuple:
    """(AECR, provenance): "periodic", "perfect-packing" or "lp-bound"."""
    res = analyze(dist, state_cap, exact_cap)
    return res.aecr, res.aecr_provenance
