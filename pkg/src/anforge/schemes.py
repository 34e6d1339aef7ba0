"""Update schemes as node-activation sequences, the three deterministic
asynchronous extensions over product alphabets, block-parallel schedules and
projection verification."""

from dataclasses import dataclass

import numpy as np

from .core import AbstractNetwork, Alphabet, FuncMap
from .errors import PreconditionError, ShapeError


# ---------------------------------------------------------------------------
# schemes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Parallel:
    def mu(self, k, n):
        return frozenset(range(n))

    period = 1


@dataclass(frozen=True)
class BlockSequential:
    """Ordered partition of the node set; block k mod b is active at step k."""

    blocks: tuple

    def __post_init__(self):
        object.__setattr__(self, "blocks",
                           tuple(frozenset(b) for b in self.blocks))

    @property
    def period(self):
        return len(self.blocks)

    def mu(self, k, n):
        self.validate(n)
        return self.blocks[k % len(self.blocks)]

    def validate(self, n):
        seen = set()
        for b in self.blocks:
            if seen & b:
                raise PreconditionError("blocks are not disjoint")
            seen |= b
        if seen != set(range(n)):
            raise PreconditionError("blocks do not partition the node set")

    def block_index(self, v):
        for i, b in enumerate(self.blocks):
            if v in b:
                return i
        raise PreconditionError(f"node {v} is in no block")


@dataclass(frozen=True)
class LocalClocks:
    """Per-node period tau_v and shift delta_v: v active at k iff
    delta_v == k mod tau_v."""

    periods: tuple
    shifts: tuple

    def __post_init__(self):
        object.__setattr__(self, "periods", tuple(int(t) for t in self.periods))
        object.__setattr__(self, "shifts", tuple(int(d) for d in self.shifts))
        for t, d in zip(self.periods, self.shifts):
            if t < 1 or not 0 <= d < t:
                raise PreconditionError(f"need 0 <= shift {d} < period {t}")

    @property
    def period(self):
        out = 1
        for t in self.periods:
            out = np.lcm(out, t)
        return int(out)

    def mu(self, k, n):
        if len(self.periods) != n:
            raise ShapeError("one period per node required")
        return frozenset(v for v in range(n)
                         if self.shifts[v] == k % self.periods[v])


@dataclass(frozen=True)
class Periodic:
    """Explicit period-p list of activated node subsets."""

    sets: tuple

    def __post_init__(self):
        object.__setattr__(self, "sets", tuple(frozenset(s) for s in self.sets))
        if not self.sets:
            raise PreconditionError("periodic scheme needs at least one set")

    @property
    def period(self):
        return len(self.sets)

    def mu(self, k, n):
        return self.sets[k % len(self.sets)]


@dataclass(frozen=True)
class BlockParallel:
    """Partition of V into ordered lists; list position j is active at steps
    k with j == k mod len(list)."""

    lists: tuple

    def __post_init__(self):
        object.__setattr__(self, "lists", tuple(tuple(l) for l in self.lists))

    @property
    def period(self):
        out = 1
        for l in self.lists:
            out = np.lcm(out, len(l))
        return int(out)

    def mu(self, k, n):
        self.validate(n)
        return frozenset(l[k % len(l)] for l in self.lists)

    def validate(self, n):
        flat = [v for l in self.lists for v in l]
        if len(flat) != len(set(flat)) or set(flat) != set(range(n)):
            raise PreconditionError("lists do not partition the node set")


def scheme_step(net, scheme, x, k=0):
    """One intermediate step: update exactly the nodes in mu(k)."""
    x = net.check_config(x)
    active = scheme.mu(k, net.n)
    full = net.step(x)
    return tuple(full[v] if v in active else x[v] for v in range(net.n))


def scheme_orbit(net, scheme, x, steps):
    """[x, x1, ..., x_steps] with x_{k+1} = F^{mu(k)}(x_k)."""
    out = [net.check_config(x)]
    for k in range(steps):
        out.append(scheme_step(net, scheme, out[-1], k))
    return out


def block_parallel_to_local_clocks(bp):
    nodes = {}
    for l in bp.lists:
        for j, v in enumerate(l):
            nodes[v] = (len(l), j)
    n = len(nodes)
    return LocalClocks(periods=tuple(nodes[v][0] for v in range(n)),
                       shifts=tuple(nodes[v][1] for v in range(n)))


def local_clocks_to_block_parallel(lc, n_dummies_start=None):
    """Pack nodes into per-period lists, padding unfilled positions with fresh
    dummy node ids (constant-size activation sets); returns (scheme, dummies)."""
    n = len(lc.periods)
    next_id = n if n_dummies_start is None else n_dummies_start
    by_period = {}
    for v in range(n):
        by_period.setdefault(lc.periods[v], []).append(v)
    lists = []
    dummies = []
    for p, vs in sorted(by_period.items()):
        slots = {}
        for v in vs:
            slots.setdefault(lc.shifts[v], []).append(v)
        while any(slots.get(j) for j in range(p)):
            l = []
            for j in range(p):
                if slots.get(j):
                    l.append(slots[j].pop())
                else:
                    l.append(next_id)
                    dummies.append(next_id)
                    next_id += 1
            lists.append(tuple(l))
    return BlockParallel(tuple(lists)), tuple(dummies)


# ---------------------------------------------------------------------------
# asynchronous extensions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Extension:
    """A deterministic product-alphabet network realizing a scheme.

    Projection onto the first factor recovers the scheme dynamics when the
    auxiliary components are initialized from the scheme parameters.
    """

    base: AbstractNetwork
    extended: AbstractNetwork
    kind: str           # "block-sequential" | "local-clocks" | "periodic"
    param: int          # b, c or p
    scheme: object

    def project_state(self, s):
        return s % self.base.alphabet.size

    def project(self, x):
        q = self.base.alphabet.size
        return tuple(int(s) % q for s in x)

    def components(self, s):
        return self.extended.alphabet.index_to_tuple(s)

    def init_config(self, x0):
        """Encode the scheme parameters into the auxiliary components."""
        x0 = self.base.check_config(x0)
        enc = self.extended.alphabet.tuple_to_index
        n = self.base.n
        sch = self.scheme
        if self.kind == "block-sequential":
            return tuple(enc((x0[v], sch.block_index(v))) for v in range(n))
        if self.kind == "local-clocks":
            return tuple(
                enc((x0[v],
                     (sch.periods[v] - sch.shifts[v]) % sch.periods[v],
                     sch.periods[v] - 1))
                for v in range(n))
        if self.kind == "periodic":
            return tuple(
                enc((x0[v], 0,
                     sum(1 << k for k in range(self.param)
                         if v in sch.sets[k])))
                for v in range(n))
        raise ValueError(self.kind)


def _psi(r, m):
    """Clamp a counter into range for clock period m."""
    return r if r <= m - 1 else m - 1


def extend(net, scheme, with_dummies=False):
    """Build the deterministic asynchronous extension of `net` realizing
    `scheme` (block-sequential, local-clocks or periodic; block-parallel is
    lowered to local clocks, adding dummy nodes only when requested)."""
    if isinstance(scheme, BlockParallel):
        if with_dummies:
            lc_part = block_parallel_to_local_clocks(scheme)
            raise PreconditionError(
                "dummy-node lowering changes the node set; extend the padded "
                "network explicitly")
        scheme.validate(net.n)
        return extend(net, block_parallel_to_local_clocks(scheme))
    if isinstance(scheme, BlockSequential):
        scheme.validate(net.n)
        return _extend_block_sequential(net, scheme)
    if isinstance(scheme, LocalClocks):
        return _extend_local_clocks(net, scheme)
    if isinstance(scheme, Periodic):
        return _extend_periodic(net, scheme)
    raise PreconditionError(f"cannot extend scheme {scheme!r}")


def _ext_deps(net, v):
    base_deps = net.maps[v].deps
    return (v,) + base_deps, base_deps


def _extend_block_sequential(net, scheme):
    q = net.alphabet.size
    b = len(scheme.blocks)
    alpha = Alphabet(q * b, factors=(q, b), ordered=False)
    maps = []
    for v in range(net.n):
        deps, base_deps = _ext_deps(net, v)
        base_map = net.maps[v]

        def fn(values, q=q, b=b, base_map=base_map):
            s_self, rest = values[0], values[1:]
            qv, r = s_self % q, s_self // q
            nq = base_map(tuple(s % q for s in rest)) if r == 0 else qv
            return nq + q * ((r - 1) % b)

        def batch_fn(cols, q=q, b=b, base_map=base_map):
            s_self, rest = cols[0], cols[1:]
            qv = (s_self % q).astype(np.int64)
            r = (s_self // q).astype(np.int64)
            nq = base_map.batch([c % q for c in rest]).astype(np.int64)
            nq = np.where(r == 0, nq, qv)
            return nq + q * ((r - 1) % b)

        maps.append(FuncMap(deps, fn, batch_fn))
    ext = AbstractNetwork(alpha, maps, node_names=net.node_names)
    return Extension(base=net, extended=ext, kind="block-sequential",
                     param=b, scheme=scheme)


def _extend_local_clocks(net, scheme, clock_len=None):
    q = net.alphabet.size
    c = clock_len or max(scheme.periods)
    if any(t > c for t in scheme.periods):
        raise PreconditionError(f"clock period exceeds clock length {c}")
    alpha = Alphabet(q * c * c, factors=(q, c, c), ordered=False)
    maps = []
    for v in range(net.n):
        deps, base_deps = _ext_deps(net, v)
        base_map = net.maps[v]

        def fn(values, q=q, c=c, base_map=base_map):
            s_self, rest = values[0], values[1:]
            qv = s_self % q
            r = (s_self // q) % c
            m = s_self // (q * c) + 1
            nq = base_map(tuple(s % q for s in rest)) if r == 0 else qv
            nr = (_psi(r, m) + 1) % m
            return nq + q * nr + q * c * (m - 1)

        def batch_fn(cols, q=q, c=c, base_map=base_map):
            s_self, rest = cols[0], cols[1:]
            qv = (s_self % q).astype(np.int64)
            r = ((s_self // q) % c).astype(np.int64)
            m = (s_self // (q * c)).astype(np.int64) + 1
            nq = base_map.batch([col % q for col in rest]).astype(np.int64)
            nq = np.where(r == 0, nq, qv)
            nr = (np.minimum(r, m - 1) + 1) % m
            return nq + q * nr + q * c * (m - 1)

        maps.append(FuncMap(deps, fn, batch_fn))
    ext = AbstractNetwork(alpha, maps, node_names=net.node_names)
    return Extension(base=net, extended=ext, kind="local-clocks",
                     param=c, scheme=scheme)


def _extend_periodic(net, scheme, max_period=8):
    q = net.alphabet.size
    p = len(scheme.sets)
    if p > max_period:
        raise PreconditionError(
            f"period {p} exceeds the 2**p-blow-up cap {max_period}")
    alpha = Alphabet(q * p * (1 << p), factors=(q, p, 1 << p), ordered=False)
    maps = []
    for v in range(net.n):
        deps, base_deps = _ext_deps(net, v)
        base_map = net.maps[v]

        def fn(values, q=q, p=p, base_map=base_map):
            s_self, rest = values[0], values[1:]
            qv = s_self % q
            ph = (s_self // q) % p
            ss = s_self // (q * p)
            fire = (ss >> ph) & 1
            nq = base_map(tuple(s % q for s in rest)) if fire else qv
            return nq + q * ((ph + 1) % p) + q * p * ss

        def batch_fn(cols, q=q, p=p, base_map=base_map):
            s_self, rest = cols[0], cols[1:]
            qv = (s_self % q).astype(np.int64)
            ph = ((s_self // q) % p).astype(np.int64)
            ss = (s_self // (q * p)).astype(np.int64)
            fire = (ss >> ph) & 1
            nq = base_map.batch([col % q for col in rest]).astype(np.int64)
            nq = np.where(fire == 1, nq, qv)
            return nq + q * ((ph + 1) % p) + q * p * ss

        maps.append(FuncMap(deps, fn, batch_fn))
    ext = AbstractNetwork(alpha, maps, node_names=net.node_names)
    return Extension(base=net, extended=ext, kind="periodic",
                     param=p, scheme=scheme)


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProjectionVerdict:
    ok: bool
    divergence: tuple = None  # (t, v)

    def __bool__(self):
        return self.ok


def verify_projection(ext, x0, steps=64, init=None):
    """Check that the projected extension orbit equals the scheme orbit
    pointwise for `steps` steps; reports the first divergent (t, v)."""
    x0 = ext.base.check_config(x0)
    z = ext.init_config(x0) if init is None else init
    want = scheme_orbit(ext.base, ext.scheme, x0, steps)
    cur = z
    for t in range(steps + 1):
        got = ext.project(cur)
        if got != want[t]:
            v = next(i for i in range(ext.base.n) if got[i] != want[t][i])
            return ProjectionVerdict(False, (t, v))
        if t < steps:
            cur = ext.extended.step(cur)
    return ProjectionVerdict(True)


def check_async_contract(ext, x, steps=8):
    """Asynchronous-extension contract: at every node the projected new state
    is either the old projected state or the base image of the projection."""
    cur = x
    for _ in range(steps):
        nxt = ext.extended.step(cur)
        base_now = ext.project(cur)
        base_img = ext.base.step(base_now)
        base_next = ext.project(nxt)
        for v in range(ext.base.n):
            if base_next[v] not in (base_now[v], base_img[v]):
                return False
        cur = nxt
    return True
