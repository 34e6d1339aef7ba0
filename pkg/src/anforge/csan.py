"""Concrete symmetric automata networks: labeled undirected graphs whose
vertex labels consume the *set* of (permuted) neighbor states, plus family
membership checks and compilation to abstract networks."""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .core import AbstractNetwork, Alphabet, FuncMap, make_local_map
from .errors import NotRepresentable, PreconditionError, ShapeError


# ---------------------------------------------------------------------------
# labels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VertexLabel:
    """Set-based local rule.  tag is one of Conj, Disj, Min, Max, Const,
    Custom; Custom carries the map and explicit read declarations so that
    interaction-graph analysis stays total."""

    tag: str
    const: int = None
    fn: object = None
    reads_self: bool = False
    reads_neighbors: bool = True

    def apply(self, alphabet, q, xset):
        if self.tag in ("Conj", "Min"):
            return min(xset) if xset else alphabet.size - 1
        if self.tag in ("Disj", "Max"):
            return max(xset) if xset else 0
        if self.tag == "Const":
            return self.const
        if self.tag == "Custom":
            return self.fn(q, frozenset(xset))
        raise ValueError(f"unknown vertex label {self.tag}")

    @property
    def depends_on_self(self):
        return self.tag == "Custom" and self.reads_self

    @property
    def depends_on_neighbors(self):
        if self.tag == "Const":
            return False
        if self.tag == "Custom":
            return self.reads_neighbors
        return True


CONJ = VertexLabel("Conj")
DISJ = VertexLabel("Disj")
MIN = VertexLabel("Min")
MAX = VertexLabel("Max")


def const_label(q):
    return VertexLabel("Const", const=q)


def custom_label(fn, reads_self, reads_neighbors=True):
    return VertexLabel("Custom", fn=fn, reads_self=reads_self,
                       reads_neighbors=reads_neighbors)


@dataclass(frozen=True)
class EdgeLabel:
    """A permutation of the alphabet attached to an undirected edge; the same
    label is applied from both endpoints."""

    tag: str
    perm: tuple = None

    def apply(self, q):
        if self.tag == "Id":
            return q
        if self.tag == "Switch":
            return 1 - q
        return self.perm[q]

    def as_perm(self, size):
        if self.tag == "Id":
            return tuple(range(size))
        if self.tag == "Switch":
            if size != 2:
                raise PreconditionError("Switch labels require a boolean alphabet")
            return (1, 0)
        p = tuple(self.perm)
        if sorted(p) != list(range(size)):
            raise PreconditionError(f"{p} is not a permutation of 0..{size - 1}")
        return p


ID = EdgeLabel("Id")
SWITCH = EdgeLabel("Switch")


def perm_label(perm):
    return EdgeLabel("Perm", perm=tuple(perm))


# ---------------------------------------------------------------------------
# networks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CsanNetwork:
    """Undirected simple labeled graph denoting a symmetric network."""

    alphabet: Alphabet
    n: int
    vertex_labels: tuple
    edges: dict = field(compare=False)  # frozenset({u,v}) -> EdgeLabel
    node_names: tuple = None

    def __post_init__(self):
        if len(self.vertex_labels) != self.n:
            raise ShapeError("one vertex label per node required")
        for e, lab in self.edges.items():
            u, v = tuple(e)
            if u == v:
                raise PreconditionError("self-loops are not allowed")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ShapeError(f"edge {set(e)} references unknown node")
            lab.as_perm(self.alphabet.size)  # validates

    def neighbors(self, v):
        return tuple(sorted(
            next(iter(e - {v})) for e in self.edges if v in e))

    def edge_label(self, u, v):
        return self.edges[frozenset((u, v))]

    def degree(self, v):
        return len(self.neighbors(v))


def csan(alphabet, n, labels, edge_list, node_names=None):
    """edge_list: iterable of (u, v, EdgeLabel)."""
    edges = {}
    for u, v, lab in edge_list:
        key = frozenset((u, v))
        if key in edges:
            raise PreconditionError(f"duplicate edge {u}-{v}")
        edges[key] = lab
    labels = tuple(labels) if not isinstance(labels, VertexLabel) else tuple(
        labels for _ in range(n))
    return CsanNetwork(alphabet=alphabet, n=n, vertex_labels=labels,
                       edges=edges, node_names=tuple(node_names) if node_names else None)


def evaluate_csan(c):
    """Compile to an AbstractNetwork: node v computes
    label_v(x_v, { edge_label(v,u)(x_u) : u in N(v) })."""
    maps = []
    q = c.alphabet.size
    for v in range(c.n):
        lab = c.vertex_labels[v]
        nbrs = c.neighbors(v)
        perms = [c.edge_label(v, u).as_perm(q) for u in nbrs]
        deps = ((v,) if lab.depends_on_self else ()) + (
            tuple(nbrs) if lab.depends_on_neighbors else ())
        self_first = lab.depends_on_self
        use_nbrs = lab.depends_on_neighbors

        def fn(values, lab=lab, perms=perms, self_first=self_first,
               use_nbrs=use_nbrs, alphabet=c.alphabet):
            if self_first:
                qv, rest = values[0], values[1:]
            else:
                qv, rest = None, values
            xset = {p[x] for p, x in zip(perms, rest)} if use_nbrs else set()
            return lab.apply(alphabet, qv, xset)

        batch_fn = _batch_for(lab, perms, self_first, use_nbrs, c.alphabet)
        maps.append(make_local_map(c.alphabet, deps, fn, batch_fn=batch_fn))
    return AbstractNetwork(c.alphabet, maps, node_names=c.node_names)


def _batch_for(lab, perms, self_first, use_nbrs, alphabet):
    """Vectorized evaluator for the registry labels (min/max reductions)."""
    if lab.tag not in ("Conj", "Min", "Disj", "Max", "Const"):
        return None
    parrs = [np.array(p, dtype=np.uint8) for p in perms]

    def batch(cols):
        nb = cols[1:] if self_first else cols
        m = cols[0].shape[0] if cols else 1
        if lab.tag == "Const":
            return np.full(m, lab.const, dtype=np.uint8)
        if not nb:
            fill = alphabet.size - 1 if lab.tag in ("Conj", "Min") else 0
            return np.full(m, fill, dtype=np.uint8)
        acc = parrs[0][nb[0]]
        for p, col in zip(parrs[1:], nb[1:]):
            cur = p[col]
            acc = np.minimum(acc, cur) if lab.tag in ("Conj", "Min") else np.maximum(acc, cur)
        return acc

    return batch


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FamilySpec:
    """Decidable local constraint on (vertex label, incident edge labels)."""

    name: str  # GloballyPositiveConj | LocallyPositiveConj | SignedConj
    #          | MinMax | AndOr


GLOBALLY_POSITIVE_CONJ = FamilySpec("GloballyPositiveConj")
LOCALLY_POSITIVE_CONJ = FamilySpec("LocallyPositiveConj")
SIGNED_CONJ = FamilySpec("SignedConj")
MIN_MAX = FamilySpec("MinMax")
AND_OR = FamilySpec("AndOr")


@dataclass(frozen=True)
class FamilyVerdict:
    ok: bool
    node: int = None
    reason: str = None

    def __bool__(self):
        return self.ok


def check_family(c, spec):
    """True iff every vertex meets the family's local constraint; reports the
    first violating vertex otherwise."""
    name = spec.name
    for v in range(c.n):
        lab = c.vertex_labels[v]
        incident = [c.edge_label(v, u) for u in c.neighbors(v)]
        if name in ("GloballyPositiveConj", "LocallyPositiveConj", "SignedConj"):
            if c.alphabet.size != 2:
                return FamilyVerdict(False, v, "boolean alphabet required")
            if lab.tag != "Conj":
                return FamilyVerdict(False, v, f"vertex label {lab.tag} is not Conj")
            if any(e.tag not in ("Id", "Switch") for e in incident):
                return FamilyVerdict(False, v, "edge label outside {Id, Switch}")
            if name == "GloballyPositiveConj" and any(
                    e.tag != "Id" for e in incident):
                return FamilyVerdict(False, v, "negative edge present")
            if name == "LocallyPositiveConj" and incident and not any(
                    e.tag == "Id" for e in incident):
                return FamilyVerdict(False, v, "no positive incident edge")
        elif name == "MinMax":
            if not c.alphabet.ordered:
                return FamilyVerdict(False, v, "alphabet is not ordered")
            if lab.tag not in ("Min", "Max", "Conj", "Disj"):
                return FamilyVerdict(False, v, f"vertex label {lab.tag} is not min/max")
            if any(e.tag != "Id" for e in incident):
                return FamilyVerdict(False, v, "edge labels must be identity")
        elif name == "AndOr":
            if c.alphabet.size != 2:
                return FamilyVerdict(False, v, "boolean alphabet required")
            if lab.tag not in ("Conj", "Disj", "Min", "Max"):
                return FamilyVerdict(False, v, f"vertex label {lab.tag} is not AND/OR")
            if any(e.tag != "Id" for e in incident):
                return FamilyVerdict(False, v, "edge labels must be identity")
        else:
            raise ValueError(f"unknown family {name}")
    return FamilyVerdict(True)


def interaction_graph_csan(c):
    """Interaction graph by per-vertex case analysis on what the label reads
    (constant / self only / neighbors only / both); no configuration
    enumeration.  Returns {v: tuple of in-neighbors}."""
    out = {}
    for v in range(c.n):
        lab = c.vertex_labels[v]
        deps = []
        if lab.depends_on_self:
            deps.append(v)
        if lab.depends_on_neighbors:
            deps.extend(c.neighbors(v))
        out[v] = tuple(sorted(deps))
    return out


# ---------------------------------------------------------------------------
# recognition
# ---------------------------------------------------------------------------

def from_bounded_degree(net, spec):
    """Recognize an abstract network as a member of family `spec`, searching
    per-node edge labelings; the result round-trips through evaluate_csan."""
    name = spec.name
    if name in ("GloballyPositiveConj", "LocallyPositiveConj", "SignedConj"):
        return _recognize_signed_conj(net, name)
    if name in ("MinMax", "AndOr"):
        return _recognize_minmax(net, name)
    raise ValueError(f"unknown family {name}")


def _node_table(net, v):
    m = net.maps[v]
    q = net.alphabet.size
    d = len(m.deps)
    vals = {}
    for assign in itertools.product(range(q), repeat=d):
        vals[assign] = m(assign)
    return m.deps, vals


def _recognize_signed_conj(net, name):
    if net.alphabet.size != 2:
        raise NotRepresentable("boolean alphabet required")
    signs = {}
    for v in range(net.n):
        deps, vals = _node_table(net, v)
        if v in deps:
            raise NotRepresentable(
                f"node {v} reads itself; conjunctive labels ignore self", node=v)
        found = None
        for sig in itertools.product((0, 1), repeat=len(deps)):
            # sig[j] = 1 means the edge label negates dependency j
            if all(val == int(all((x ^ s) == 1 for x, s in zip(assign, sig)))
                   for assign, val in vals.items()):
                found = sig
                break
        if found is None:
            raise NotRepresentable(
                f"node {v} is not a signed conjunction of its inputs", node=v)
        for u, s in zip(deps, found):
            signs[(v, u)] = s
    edges = {}
    for (v, u), s in signs.items():
        if (u, v) not in signs:
            raise NotRepresentable(
                f"influence {u}->{v} is one-directional", node=v)
        key = frozenset((u, v))
        lab = SWITCH if s else ID
        if key in edges and edges[key] != lab:
            raise NotRepresentable(
                f"edge {u}-{v} needs different labels per direction", node=v)
        edges[key] = lab
    c = CsanNetwork(alphabet=net.alphabet, n=net.n,
                    vertex_labels=tuple(CONJ for _ in range(net.n)),
                    edges=edges, node_names=net.node_names)
    verdict = check_family(c, FamilySpec(name))
    if not verdict:
        raise NotRepresentable(
            f"node {verdict.node}: {verdict.reason}", node=verdict.node)
    return c


def _recognize_minmax(net, name):
    q = net.alphabet.size
    if name == "AndOr" and q != 2:
        raise NotRepresentable("boolean alphabet required")
    labels = []
    edges = {}
    for v in range(net.n):
        deps, vals = _node_table(net, v)
        if v in deps:
            raise NotRepresentable(f"node {v} reads itself", node=v)
        lab = None
        for cand, red in ((MIN, min), (MAX, max)):
            if all(val == (red(assign) if assign else
                           (q - 1 if cand.tag == "Min" else 0))
                   for assign, val in vals.items()):
                lab = cand
                break
        if lab is None:
            raise NotRepresentable(f"node {v} is not a min or max", node=v)
        labels.append(CONJ if (name == "AndOr" and lab.tag == "Min") else
                      DISJ if (name == "AndOr" and lab.tag == "Max") else lab)
        for u in deps:
            edges[frozenset((u, v))] = ID
    for e in edges:
        u, v = tuple(e)
        if u not in net.maps[v].deps or v not in net.maps[u].deps:
            raise NotRepresentable(f"edge {u}-{v} is one-directional")
    return CsanNetwork(alphabet=net.alphabet, n=net.n,
                       vertex_labels=tuple(labels), edges=edges,
                       node_names=net.node_names)
