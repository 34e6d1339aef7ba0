"""Finite alphabets, configurations, abstract automata networks and the
dynamics engine: stepping, orbit/cycle analysis, exhaustive state-space sweeps
and effective-dependency extraction.

Conventions used throughout the package:
  * a configuration is a tuple of state indices, one per node, in declaration
    order; node 0 is the least-significant digit of the packed integer index;
  * networks are immutable after construction and safe to share.
"""

from dataclasses import dataclass, field
from math import prod

import numpy as np

from .errors import CapExceeded, ShapeError, exhaustive_cap

TABLE_MAP_LIMIT = 1 << 16  # explicit tables up to q**deps entries


@dataclass(frozen=True)
class Alphabet:
    """A finite alphabet of `size` states.

    `factors` declares product structure (tuple of factor sizes whose product
    is `size`); `ordered` marks alphabets where min/max labels make sense.
    """

    size: int
    factors: tuple = None
    ordered: bool = True

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("alphabet size must be >= 1")
        if self.factors is not None:
            object.__setattr__(self, "factors", tuple(self.factors))
            if prod(self.factors) != self.size:
                raise ValueError("factor product does not match size")

    def index_to_tuple(self, s):
        """Decompose a state index into factor components (first factor is
        least significant)."""
        if self.factors is None:
            raise ValueError("alphabet has no factor structure")
        out = []
        for f in self.factors:
            out.append(s % f)
            s //= f
        return tuple(out)

    def tuple_to_index(self, comps):
        if self.factors is None:
            raise ValueError("alphabet has no factor structure")
        if len(comps) != len(self.factors):
            raise ShapeError("component count does not match factors")
        s = 0
        for f, c in zip(reversed(self.factors), reversed(comps)):
            if not 0 <= c < f:
                raise ShapeError(f"component {c} out of range for factor {f}")
            s = s * f + c
        return s


BOOL = Alphabet(2)


class TableMap:
    """Local map stored as an explicit lookup table over the dependency tuple."""

    __slots__ = ("deps", "table")

    def __init__(self, deps, table):
        self.deps = tuple(deps)
        t = np.asarray(table)
        if t.dtype.kind not in "ui":
            t = t.astype(np.int64)
        t = t.astype(np.uint8 if (t.size == 0 or t.max() < 256) else np.uint16)
        t.flags.writeable = False
        self.table = t

    def __call__(self, values):
        idx = 0
        stride = 1
        q = self._q()
        for v in values:
            idx += v * stride
            stride *= q
        return int(self.table[idx])

    def _q(self):
        if len(self.deps) == 0:
            return 1
        root = round(len(self.table) ** (1.0 / len(self.deps)))
        for cand in (root - 1, root, root + 1):
            if cand >= 1 and cand ** len(self.deps) == len(self.table):
                return cand
        raise ValueError("table length is not a power of the alphabet size")

    def batch(self, cols):
        if not self.deps:
            return np.full(cols.shape[0] if hasattr(cols, "shape") else 1,
                           self.table[0])
        q = self._q()
        idx = np.zeros(cols[0].shape, dtype=np.int64)
        stride = 1
        for c in cols:
            idx += c.astype(np.int64) * stride
            stride *= q
        return self.table[idx]


class FuncMap:
    """Local map given by a Python function over the dependency tuple.

    `batch_fn`, when provided, evaluates the map on numpy column vectors
    (one array per dependency) and returns an array; without it the batch
    path falls back to a per-row loop.
    """

    __slots__ = ("deps", "fn", "batch_fn")

    def __init__(self, deps, fn, batch_fn=None):
        self.deps = tuple(deps)
        self.fn = fn
        self.batch_fn = batch_fn

    def __call__(self, values):
        return self.fn(values)

    def batch(self, cols):
        if self.batch_fn is not None:
            return np.asarray(self.batch_fn(cols))
        m = cols[0].shape[0] if cols else 1
        out = np.empty(m, dtype=np.int64)
        rows = np.stack(cols, axis=1) if cols else np.zeros((m, 0), dtype=np.int64)
        for i in range(m):
            out[i] = self.fn(tuple(int(v) for v in rows[i]))
        return out


def table_from_fn(alphabet, deps, fn):
    """Materialize fn over all q**len(deps) inputs into a TableMap."""
    q = alphabet.size
    d = len(deps)
    table = np.empty(q ** d, dtype=np.uint8 if q <= 256 else np.uint16)
    idx = 0
    values = [0] * d
    while True:
        table[idx] = fn(tuple(values))
        idx += 1
        for j in range(d):
            values[j] += 1
            if values[j] < q:
                break
            values[j] = 0
        else:
            break
        if idx >= q ** d:
            break
    return TableMap(deps, table)


def make_local_map(alphabet, deps, fn, batch_fn=None, table_limit=TABLE_MAP_LIMIT):
    """Table-backed map when the domain fits `table_limit`, else a FuncMap."""
    if alphabet.size ** len(deps) <= table_limit:
        return table_from_fn(alphabet, deps, fn)
    return FuncMap(deps, fn, batch_fn)


class AbstractNetwork:
    """A deterministic network: one local map per node over a shared alphabet.

    The global map applies every local map simultaneously on a snapshot of
    the configuration.
    """

    def __init__(self, alphabet, maps, node_names=None):
        self.alphabet = alphabet
        self.maps = tuple(maps)
        self.n = len(self.maps)
        self.node_names = tuple(node_names) if node_names else tuple(range(self.n))
        for m in self.maps:
            for d in m.deps:
                if not 0 <= d < self.n:
                    raise ShapeError(f"dependency {d} out of range")

    # -- configurations ----------------------------------------------------
    def check_config(self, x):
        if len(x) != self.n:
            raise ShapeError(f"configuration has {len(x)} nodes, network has {self.n}")
        q = self.alphabet.size
        for v in x:
            if not 0 <= v < q:
                raise ShapeError(f"state {v} outside alphabet of size {q}")
        return tuple(int(v) for v in x)

    def num_configs(self):
        return self.alphabet.size ** self.n

    def config_to_index(self, x):
        q = self.alphabet.size
        idx = 0
        for v in reversed(x):
            idx = idx * q + v
        return idx

    def index_to_config(self, idx):
        q = self.alphabet.size
        out = []
        for _ in range(self.n):
            out.append(idx % q)
            idx //= q
        return tuple(out)

    @property
    def config_dtype(self):
        return np.uint8 if self.alphabet.size <= 256 else np.uint16

    # -- stepping ----------------------------------------------------------
    def step(self, x):
        x = self.check_config(x)
        return tuple(int(m((*(x[d] for d in m.deps),))) for m in self.maps)

    def step_batch(self, X):
        """Apply the global map to every row of X, shape (m, n)."""
        X = np.asarray(X, dtype=self.config_dtype)
        out = np.empty_like(X)
        for v, m in enumerate(self.maps):
            cols = [X[:, d] for d in m.deps]
            out[:, v] = m.batch(cols)
        return out

    def iterate(self, x, steps):
        """Orbit segment [x, F(x), ..., F^steps(x)]."""
        orbit = [self.check_config(x)]
        for _ in range(steps):
            orbit.append(self.step(orbit[-1]))
        return orbit

    # -- exhaustive machinery ----------------------------------------------
    def all_configs(self, cap=None):
        N = self.num_configs()
        lim = exhaustive_cap(cap)
        if N > lim:
            raise CapExceeded(
                f"state space of size {N} exceeds cap {lim}", required=N, cap=lim)
        q = self.alphabet.size
        X = np.empty((N, self.n), dtype=self.config_dtype)
        idx = np.arange(N, dtype=np.int64)
        for v in range(self.n):
            X[:, v] = (idx // (q ** v)) % q
        return X

    def transition_table(self, cap=None):
        """successor[i] = index of F(config i) for the whole state space."""
        X = self.all_configs(cap)
        Y = self.step_batch(X)
        q = self.alphabet.size
        succ = np.zeros(len(Y), dtype=np.int64)
        stride = 1
        for v in range(self.n):
            succ += Y[:, v].astype(np.int64) * stride
            stride *= q
        return succ


@dataclass(frozen=True)
class OrbitSummary:
    """Transient length, minimal period, the attractor cycle and the witness."""

    tau: int
    period: int
    attractor: tuple
    witness: tuple

    def __iter__(self):  # (tau, period) unpacking convenience
        return iter((self.tau, self.period))


@dataclass(frozen=True)
class OrbitGraph:
    """Functional graph over the full configuration space: i -> successor[i]."""

    alphabet: Alphabet
    n: int
    successor: np.ndarray = field(repr=False)

    def edges(self):
        return [(int(i), int(s)) for i, s in enumerate(self.successor)]


def orbit_summary(net, x, cap=None, method="hash"):
    """Minimal (tau, period) of the orbit of x, by exact cycle detection.

    `method` is "hash" (map of visited configurations, exact and single-pass)
    or "brent" (O(1) memory fallback).  `cap` bounds total steps explored.
    """
    x = net.check_config(x)
    lim = exhaustive_cap(cap) if cap is None else int(cap)
    if method == "brent":
        tau, period = _brent(net.step, x, lim)
    else:
        seen = {x: 0}
        cur = x
        t = 0
        while True:
            cur = net.step(cur)
            t += 1
            if cur in seen:
                tau, period = seen[cur], t - seen[cur]
                break
            if t >= lim:
                raise CapExceeded(
                    f"orbit not closed within {lim} steps", steps_taken=t, cap=lim)
            seen[cur] = t
    start = x
    for _ in range(tau):
        start = net.step(start)
    cyc = [start]
    for _ in range(period - 1):
        cyc.append(net.step(cyc[-1]))
    return OrbitSummary(tau=tau, period=period, attractor=tuple(cyc), witness=x)


def _brent(f, x0, lim):
    power = period = 1
    tortoise, hare = x0, f(x0)
    steps = 1
    while tortoise != hare:
        if power == period:
            tortoise = hare
            power *= 2
            period = 0
        hare = f(hare)
        period += 1
        steps += 1
        if steps > lim:
            raise CapExceeded(f"orbit not closed within {lim} steps",
                              steps_taken=steps, cap=lim)
    tortoise = hare = x0
    for _ in range(period):
        hare = f(hare)
    tau = 0
    while tortoise != hare:
        tortoise, hare = f(tortoise), f(hare)
        tau += 1
        if tau > lim:
            raise CapExceeded("transient search exceeded cap", cap=lim)
    return tau, period


def _cycle_nodes(succ):
    """Indices lying on cycles of the functional graph `succ`."""
    g = succ
    n = len(succ)
    k = 1
    while k < n:
        g = g[g]
        k *= 2
    return np.unique(g)


def attractors(net, cap=None):
    """Every cycle of the orbit graph, once, with the lexicographically least
    rotation (by packed configuration index) as representative."""
    succ = net.transition_table(cap)
    on_cycle = _cycle_nodes(succ)
    seen = set()
    out = []
    for c in on_cycle.tolist():
        if c in seen:
            continue
        cyc = [c]
        seen.add(c)
        cur = int(succ[c])
        while cur != c:
            cyc.append(cur)
            seen.add(cur)
            cur = int(succ[cur])
        k = cyc.index(min(cyc))
        cyc = cyc[k:] + cyc[:k]
        out.append(cyc)
    out.sort(key=lambda cyc: cyc[0])
    return [
        OrbitSummary(
            tau=0,
            period=len(cyc),
            attractor=tuple(net.index_to_config(i) for i in cyc),
            witness=net.index_to_config(cyc[0]),
        )
        for cyc in out
    ]


def orbit_graph(net, cap=None):
    succ = net.transition_table(cap)
    succ.flags.writeable = False
    return OrbitGraph(alphabet=net.alphabet, n=net.n, successor=succ)


def transients(net, cap=None):
    """Per-configuration transient lengths over the whole state space."""
    succ = net.transition_table(cap)
    on_cycle = np.zeros(len(succ), dtype=bool)
    on_cycle[_cycle_nodes(succ)] = True
    tau = np.zeros(len(succ), dtype=np.int64)
    cur = succ.copy()
    done = on_cycle.copy()
    steps = 0
    while not done.all():
        steps += 1
        fresh = ~done & on_cycle[cur]
        tau[fresh] = steps
        done |= fresh
        cur = succ[cur]
        if steps > len(succ):
            raise AssertionError("functional graph traversal did not converge")
    return tau


def effective_dependencies(net, max_deps=20, cap=None):
    """Minimal dependency structure: in-edges (u, v) present iff some single-
    node change at u flips F(.)_v, exhausting assignments over v's declared
    dependency list.  Returns {v: sorted tuple of effective in-neighbors}."""
    q = net.alphabet.size
    result = {}
    for v, m in enumerate(net.maps):
        d = len(m.deps)
        if d > max_deps:
            raise CapExceeded(
                f"node {v} declares {d} dependencies, cap is {max_deps}",
                required=d, cap=max_deps)
        total = q ** d
        lim = exhaustive_cap(cap)
        if total > lim:
            raise CapExceeded(
                f"node {v}: {total} assignments exceed cap {lim}",
                required=total, cap=lim)
        if d == 0:
            result[v] = ()
            continue
        idx = np.arange(total, dtype=np.int64)
        cols = [((idx // (q ** j)) % q).astype(np.uint8) for j in range(d)]
        vals = m.batch(cols)
        eff = []
        for j, u in enumerate(m.deps):
            grid = vals.reshape(tuple(q for _ in range(d)), order="F")
            if np.any(grid.min(axis=j) != grid.max(axis=j)):
                eff.append(u)
        result[v] = tuple(sorted(set(eff)))
    return result


def identity_network(alphabet, n):
    return AbstractNetwork(
        alphabet, [TableMap((v,), np.arange(alphabet.size)) for v in range(n)])


def network_from_tables(alphabet, tables):
    """tables: list of (deps, flat table) pairs, one per node."""
    return AbstractNetwork(
        alphabet, [TableMap(deps, t) for deps, t in tables])
