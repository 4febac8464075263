"""Quivers, Leavitt path algebras, and their K-group pipelines.

A quiver is a directed multigraph (Q0, Q1, r, s); a vertex is regular when
it emits at least one and finitely many edges.  Three constructions hang
off a quiver here:

* ``quiver_correspondence``: the correspondence with R the vertex
  idempotent ring, X spanned by the edges, and pairing
  <e*, f> = delta_{e,f} 1_{r(e)}; its Cuntz-Pimsner ring is the Leavitt
  path algebra.
* ``LeavittRing``: exact arithmetic in the Leavitt path algebra itself,
  with elements reduced to a linear basis of monomials p q* (paths with a
  common range).  The ghost contraction e* f = delta_{e,f} r(e) resolves
  products, and the range relation v = sum of e e* over s(e) = v
  eliminates monomials whose two paths both end in the designated special
  edge of a vertex, which makes equality testing canonical.
* ``adjacency``/``k_groups``: the adjacency matrix and the induced map on
  K-groups of the coefficient ring, whose kernel and cokernel assemble the
  K-groups of the Leavitt path algebra degreewise.

``crossed_product_k_groups`` is the crossed-product instance of the same
sequence, with the map 1 - alpha on each degree.
"""

from __future__ import annotations

from .abgroup import FgAbelianGroup, IntMatrix, les_segment
from .ringcore import (
    QQ,
    ZZ,
    DirectSumRing,
    RingDescriptor,
    RingElement,
    RingError,
    ZmodRing,
)
from . import funcmod
from .funcmod import CompactOperator, Correspondence, FunctionalHom, FunctionalModule


class QuiverError(ValueError):
    """Syntax or semantic error in quiver input; carries a location."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


# ---------------------------------------------------------------------------
# Quivers
# ---------------------------------------------------------------------------

class Quiver:
    """A finite directed multigraph with named vertices and edges."""

    def __init__(self, vertices, edges):
        """``vertices``: ordered names; ``edges``: list of (name, src, dst)."""
        self.vertices = list(vertices)
        vertex_set = set(self.vertices)
        if len(vertex_set) != len(self.vertices):
            raise QuiverError("duplicate vertex name")
        self.edges = []
        self.source = {}
        self.range = {}
        seen = set()
        for name, src, dst in edges:
            if name in seen or name in vertex_set:
                raise QuiverError(f"duplicate name {name!r}")
            if src not in vertex_set:
                raise QuiverError(f"unknown source vertex {src!r} for edge {name!r}")
            if dst not in vertex_set:
                raise QuiverError(f"unknown range vertex {dst!r} for edge {name!r}")
            seen.add(name)
            self.edges.append(name)
            self.source[name] = src
            self.range[name] = dst
        self._out = {v: [e for e in self.edges if self.source[e] == v]
                     for v in self.vertices}

    def s(self, e):
        return self.source[e]

    def r(self, e):
        return self.range[e]

    def out_edges(self, v):
        return list(self._out[v])

    @property
    def regular_vertices(self):
        """Vertices emitting at least one (and, Q1 being finite, finitely
        many) edges."""
        return [v for v in self.vertices if self._out[v]]

    def is_path(self, edges):
        return all(self.r(a) == self.s(b) for a, b in zip(edges, edges[1:]))

    def paths_from(self, v, length):
        """All paths of the given length starting at v, as edge tuples."""
        try:
            return self._paths_cache[(v, length)]
        except AttributeError:
            self._paths_cache = {}
        except KeyError:
            pass
        if length == 0:
            out = [()]
        else:
            out = []
            for e in self._out[v]:
                for tail in self.paths_from(self.r(e), length - 1):
                    out.append((e,) + tail)
        self._paths_cache[(v, length)] = out
        return out

    def __repr__(self):
        return f"Quiver({len(self.vertices)} vertices, {len(self.edges)} edges)"


def parse_quiver(text):
    """Parse the line-oriented quiver format.

    ``vertices:`` is followed by whitespace-separated names (on the same
    line or subsequent lines); ``edges:`` starts the edge section, each
    edge being ``name: src -> dst``.  ``#`` starts a comment.
    """
    vertices = []
    edges = []
    mode = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("vertices:"):
            mode = "vertices"
            line = line[len("vertices:"):].strip()
            if line:
                vertices.extend(line.split())
            continue
        if line.startswith("edges:"):
            mode = "edges"
            line = line[len("edges:"):].strip()
            if not line:
                continue
        if mode == "vertices":
            vertices.extend(line.split())
            continue
        if mode == "edges":
            if ":" not in line:
                raise QuiverError(f"expected 'name: src -> dst', got {line!r}",
                                  line=lineno)
            name, rest = line.split(":", 1)
            if "->" not in rest:
                raise QuiverError(f"missing '->' in edge {name.strip()!r}",
                                  line=lineno)
            src, dst = rest.split("->", 1)
            name, src, dst = name.strip(), src.strip(), dst.strip()
            if not name or not src or not dst:
                raise QuiverError("empty name in edge declaration", line=lineno)
            edges.append((name, src, dst, lineno))
            continue
        raise QuiverError(f"unexpected content {line!r} before a section header",
                          line=lineno)
    try:
        return Quiver(vertices, [(n, s, d) for n, s, d, _ in edges])
    except QuiverError as exc:
        # attach the first relevant line for semantic errors
        for n, s, d, lineno in edges:
            if n in str(exc) or s in str(exc) or d in str(exc):
                raise QuiverError(str(exc), line=lineno) from None
        raise


def rose(d, vertex="v", prefix="e"):
    """The rose with d loops at a single vertex."""
    return Quiver([vertex], [(f"{prefix}{i}", vertex, vertex) for i in range(d)])


# ---------------------------------------------------------------------------
# Adjacency data and the K-theory map
# ---------------------------------------------------------------------------

class AdjacencyData:
    """Adjacency counts of a quiver and the induced K-theory map.

    ``full_matrix``[x][y] counts the arrows from x to y.  ``reduced`` is
    the arrow-count matrix of the induced map on vertex idempotents
    (entry [y][v] counts arrows from v to y) with the non-regular columns
    removed, and ``theorem_map`` M = 1 - reduced sends the class of 1_v to
    1_v - sum over e with s(e) = v of 1_{r(e)}.
    """

    def __init__(self, quiver):
        self.quiver = quiver
        verts = quiver.vertices
        idx = {v: i for i, v in enumerate(verts)}
        n = len(verts)
        counts = [[0] * n for _ in range(n)]
        for e in quiver.edges:
            counts[idx[quiver.s(e)]][idx[quiver.r(e)]] += 1
        self.full_matrix = IntMatrix.from_rows(counts)
        regs = quiver.regular_vertices
        self.regular = regs
        self.reduced = IntMatrix.from_rows(
            [[counts[idx[v]][idx[y]] for v in regs] for y in verts])
        self.theorem_map = IntMatrix.from_rows(
            [[(1 if y == v else 0) - counts[idx[v]][idx[y]] for v in regs]
             for y in verts])


def adjacency(quiver):
    return AdjacencyData(quiver)


# ---------------------------------------------------------------------------
# The quiver correspondence
# ---------------------------------------------------------------------------

def vertex_ring(quiver, k, label=None):
    """R = k^(Q0), one orthogonal idempotent per vertex."""
    return DirectSumRing(k, quiver.vertices,
                         label=label or f"{k}^(Q0)")


def quiver_module(quiver, ring):
    """The edge module X = span(1_e) with its four bimodule actions.

    X symbols are edge names, X' symbols are ``(edge, "*")`` pairs.  The
    tables are exactly:
    <e*, f> = delta_{e,f} 1_{r(e)};  e . v = delta_{r(e),v} e;
    v . e = delta_{s(e),v} e;  e* . v = delta_{s(e),v} e*;
    v . e* = delta_{r(e),v} e*.
    """
    k = ring.k
    one = k.one
    q = quiver

    def star(e):
        return (e, "*")

    def pairing(c, b):
        e = c[0]
        if e != b:
            return ring.zero()
        return ring.monomial(q.r(e))

    def x_right(b, v):
        return {b: one} if q.r(b) == v else {}

    def x_left(v, b):
        return {b: one} if q.s(b) == v else {}

    def xp_left(v, c):
        return {c: one} if q.r(c[0]) == v else {}

    def xp_right(c, v):
        return {c: one} if q.s(c[0]) == v else {}

    def x_split(b):
        return b, ring.monomial(q.r(b))

    def xp_split(c):
        return ring.monomial(q.r(c[0])), c

    def x_support(b):
        return ring.monomial(q.s(b))

    def xp_support(c):
        return ring.monomial(q.r(c[0]))

    def fs_pairs_left(support_syms):
        return [(e, star(e)) for e in support_syms]

    def fs_pairs_right(support_syms):
        return [(c[0], c) for c in support_syms]

    mod = FunctionalModule(
        ring=ring,
        x_basis=list(q.edges),
        xp_basis=[star(e) for e in q.edges],
        pairing=pairing, x_right=x_right, xp_left=xp_left,
        x_left=x_left, xp_right=xp_right,
        x_split=x_split, xp_split=xp_split,
        x_left_support=x_support, xp_left_support=xp_support,
        fs_pairs_left=fs_pairs_left, fs_pairs_right=fs_pairs_right,
        label="edge module")

    def annih_candidates(csyms, d):
        # tensors at degree d not annihilated outright by the chain: paths
        # extending the reversed ghost word (the pairing table is diagonal)
        prefix = tuple(c[0] for c in reversed(csyms))
        l = len(prefix)
        if d < l or (l and not q.is_path(prefix)):
            return []
        if l == 0:
            return None
        end = q.r(prefix[-1])
        return [prefix + ext for ext in q.paths_from(end, d - l)]

    mod.annih_candidates = annih_candidates
    return mod


def quiver_correspondence(quiver, k=ZZ):
    """The correspondence whose Cuntz-Pimsner ring is the Leavitt algebra.

    The functional homomorphism into R^(Q1) sends 1_e to the tuple
    (delta_{e,f} 1_{r(e)})_f on both sides; the left action of a regular
    vertex decomposes compactly as the sum of e (x) e* over e with
    s(e) = v.
    """
    ring = vertex_ring(quiver, k)
    mod = quiver_module(quiver, ring)
    free = funcmod.free_module(ring, list(quiver.edges))
    one = k.one

    def U(b):
        return {(b, quiver.r(b)): one}

    def V(c):
        e = c[0]
        return {(e, quiver.r(e)): one}

    hom = FunctionalHom(mod, free, U, V, label="edge hom")

    def delta_compact_rule(relt):
        terms = []
        for v, coeff in relt.terms.items():
            for e in quiver.out_edges(v):
                terms.append(({e: coeff}, {(e, "*"): one}))
        return CompactOperator(mod, terms)

    return Correspondence(mod, hom, list(quiver.edges),
                          delta_compact_rule=delta_compact_rule,
                          label=f"quiver correspondence ({quiver!r})")


# ---------------------------------------------------------------------------
# Leavitt path algebra arithmetic
# ---------------------------------------------------------------------------

class LeavittRing(RingDescriptor):
    """The Leavitt path algebra L_k(Q) as a ring with canonical basis.

    Basis symbols are monomials ``(v, p, q)``: paths p and q (edge-name
    tuples) with common range v, standing for p q*.  The designated
    special edge of a regular vertex is the first edge it emits; a
    monomial whose paths both end in the special edge of their common
    source is rewritten through the range relation, which yields a linear
    basis, hence decidable equality.
    """

    def __init__(self, quiver, k=ZZ, label=None):
        super().__init__(k, label or f"L_{k}(Q)")
        self.quiver = quiver
        self._special = {v: quiver.out_edges(v)[0]
                         for v in quiver.regular_vertices}

    # -- symbols -------------------------------------------------------------

    def check_symbol(self, sym):
        v, p, q = sym
        quiv = self.quiver
        return v in quiv.vertices and all(e in quiv.source for e in p + q)

    def vertex(self, v):
        return self.monomial((v, (), ()))

    def path(self, edges):
        edges = tuple(edges)
        if not edges:
            raise RingError("empty path needs a vertex; use .vertex(v)")
        if not self.quiver.is_path(edges):
            return self.zero()
        return self._reduced((self.quiver.r(edges[-1]), edges, ()))

    def ghost(self, edges):
        edges = tuple(edges)
        if not edges:
            raise RingError("empty ghost path needs a vertex; use .vertex(v)")
        if not self.quiver.is_path(edges):
            return self.zero()
        return self._reduced((self.quiver.r(edges[-1]), (), edges))

    def monomial_pq(self, p, q):
        """p q* for paths sharing a range; zero if they do not compose."""
        p, q = tuple(p), tuple(q)
        quiv = self.quiver
        if p and not quiv.is_path(p):
            return self.zero()
        if q and not quiv.is_path(q):
            return self.zero()
        if p and q:
            if quiv.r(p[-1]) != quiv.r(q[-1]):
                return self.zero()
            v = quiv.r(p[-1])
        elif p:
            v = quiv.r(p[-1])
        elif q:
            v = quiv.r(q[-1])
        else:
            raise RingError("vertex monomial needs .vertex(v)")
        return self._reduced((v, p, q))

    # -- reduction to the linear basis ----------------------------------------

    def _reduced(self, sym):
        """Eliminate special-edge junctions; returns a RingElement."""
        v, p, q = sym
        k = self.k
        if not (p and q and p[-1] == q[-1]):
            return self.monomial(sym)
        e = p[-1]
        w = self.quiver.s(e)
        if self._special.get(w) != e:
            return self.monomial(sym)
        # p' (e e*) q'* = p' q'* - sum over other edges f at w of p' f f* q'*
        out = self._reduced((w, p[:-1], q[:-1]))
        for f in self.quiver.out_edges(w):
            if f != e:
                out = out - self._reduced(
                    (self.quiver.r(f), p[:-1] + (f,), q[:-1] + (f,)))
        return out

    # -- ring structure --------------------------------------------------------

    def mul_basis(self, b1, b2):
        v1, p1, q1 = b1
        v2, p2, q2 = b2
        # contract q1* p2: nonzero only when one is a prefix of the other
        if len(q1) <= len(p2):
            if p2[:len(q1)] != q1:
                return {}
            rest = p2[len(q1):]
            if rest:
                if self.quiver.s(rest[0]) != v1:
                    return {}
                new = (v2, p1 + rest, q2)
            else:
                if v1 != v2:
                    return {}
                new = (v2, p1, q2)
        else:
            if q1[:len(p2)] != p2:
                return {}
            leftover = q1[len(p2):]
            if self.quiver.s(leftover[0]) != v2:
                return {}
            new = (v1, p1, q2 + leftover)
        return self._reduced(new).terms

    def local_unit_terms(self, symbols):
        verts = set()
        for v, p, q in symbols:
            verts.add(self.quiver.s(p[0]) if p else v)
            verts.add(self.quiver.s(q[0]) if q else v)
        return {(w, (), ()): self.k.one for w in sorted(verts)}

    def left_support_symbol(self, sym):
        v, p, q = sym
        w = self.quiver.s(p[0]) if p else v
        return (w, (), ())

    def right_support_symbol(self, sym):
        v, p, q = sym
        w = self.quiver.s(q[0]) if q else v
        return (w, (), ())

    def degree(self, element):
        """|p| - |q| when the element is homogeneous, else None."""
        degs = {len(p) - len(q) for (_, p, q) in element.terms}
        if len(degs) > 1:
            return None
        return degs.pop() if degs else 0


def lpa_mul(a, b):
    """Product in the Leavitt path algebra, reduced to the linear basis."""
    if not isinstance(a.ring, LeavittRing) or a.ring is not b.ring:
        raise RingError("operands must share a Leavitt path algebra")
    return a * b


# ---------------------------------------------------------------------------
# K-group pipelines
# ---------------------------------------------------------------------------

class PresetComponent:
    """One cyclic (or free) component of a K-group preset."""

    def __init__(self, group, multiplicity=1):
        self.group = group
        self.multiplicity = multiplicity  # positive int or "countable"

    def __repr__(self):
        return f"PresetComponent({self.group}, x{self.multiplicity})"


def field_presets(k):
    """Degree -1..1 K-group presets for the bundled coefficient rings.

    For a finite field F_p the units are cyclic of order p - 1; for Q they
    are Z/2 plus one infinite cyclic factor per prime (a countable free
    part, handled symbolically); the integers contribute units {1, -1}.
    Degree -1 is trivial for all bundled rings.
    """
    z = FgAbelianGroup.free(1)
    if isinstance(k, ZmodRing):
        if not k.is_field:
            raise RingError(
                f"no bundled K-group presets for non-prime modulus {k.modulus}")
        units = FgAbelianGroup.from_divisors(k.modulus - 1)
        e1 = [PresetComponent(FgAbelianGroup.from_divisors(d))
              for d in units.primary_components()]
        return {-1: [], 0: [PresetComponent(z)], 1: e1}
    if k is QQ:
        return {-1: [], 0: [PresetComponent(z)],
                1: [PresetComponent(FgAbelianGroup.from_divisors(2)),
                    PresetComponent(z, multiplicity="countable")]}
    if k is ZZ:
        return {-1: [], 0: [PresetComponent(z)],
                1: [PresetComponent(FgAbelianGroup.from_divisors(2))]}
    raise RingError(f"no bundled K-group presets for {k!r}")


def _validate_presets(presets):
    for n, comps in presets.items():
        for comp in comps:
            g = comp.group
            if not (g.is_free() or (g.free_rank == 0 and len(g.torsion) == 1)):
                raise RingError(
                    f"preset at degree {n} must be primary-decomposed; "
                    f"got {g}")


def _segments_for(mat, comps):
    return [(comp, les_segment(mat, comp.group)) for comp in comps]


def _group_json(g):
    return {"free_rank": g.free_rank, "torsion": g.torsion, "repr": str(g)}


def _assemble(coker_segs, ker_segs):
    """Combine cokernel-at-n with kernel-at-(n-1) parts of E_n.

    The extension splits when the kernel part is free (subgroups of free
    abelian groups are free); torsion kernels are reported unassembled.
    """
    kernel_free = all(seg.kernel.is_free() for _, seg in ker_segs)
    finite = all(comp.multiplicity != "countable"
                 for comp, _ in coker_segs + ker_segs)
    status = "split-assembled" if kernel_free else "unassembled"
    assembled = None
    if kernel_free and finite:
        total = FgAbelianGroup.trivial()
        for comp, seg in coker_segs:
            for _ in range(comp.multiplicity):
                total = total.direct_sum(seg.cokernel)
        for comp, seg in ker_segs:
            for _ in range(comp.multiplicity):
                total = total.direct_sum(seg.kernel)
        assembled = total
    elif kernel_free:
        status = "split-assembled (countable multiplicity)"
    return assembled, status


def _pipeline_report(mat, presets, degrees, row_labels, col_labels):
    _validate_presets(presets)
    segments = {n: _segments_for(mat, presets.get(n, [])) for n in
                set(degrees) | {n - 1 for n in degrees}}
    report = {
        "matrix_M": {
            "rows": row_labels,
            "cols": col_labels,
            "entries": [list(r) for r in mat.entries],
        },
        "degrees": {},
    }
    for n in sorted(degrees):
        coker_segs = segments.get(n, [])
        ker_segs = segments.get(n - 1, [])
        assembled, status = _assemble(coker_segs, ker_segs)
        comps = []
        for comp, seg in coker_segs:
            comps.append({
                "coefficient": str(comp.group),
                "multiplicity": comp.multiplicity,
                "kernel": _group_json(seg.kernel),
                "cokernel": _group_json(seg.cokernel),
            })
        entry = {
            "components": comps,
            "kernel": _group_json(_total(coker_segs, "kernel")),
            "cokernel": _group_json(_total(coker_segs, "cokernel")),
            "assembled_group": _group_json(assembled) if assembled else None,
            "split_status": status,
        }
        report["degrees"][str(n)] = entry
    return report, segments


def _total(segs, which):
    total = FgAbelianGroup.trivial()
    for comp, seg in segs:
        if comp.multiplicity == "countable":
            continue
        for _ in range(comp.multiplicity):
            total = total.direct_sum(getattr(seg, which))
    return total


def k_groups(quiver, presets=None, k=ZZ, degrees=(0, 1)):
    """K-groups of L_k(Q) from the adjacency map, degree by degree.

    ``presets`` maps a degree n to the primary-decomposed components of
    the n-th K-group of the coefficient ring; ``field_presets`` supplies
    them for the bundled rings.  Each degree of the output carries the
    kernel and cokernel of the adjacency map on that degree's coefficients
    and the assembled group coker(M at n) + ker(M at n-1) when the
    extension splits.
    """
    if presets is None:
        presets = field_presets(k)
    adj = adjacency(quiver)
    report, segments = _pipeline_report(
        adj.theorem_map, presets, list(degrees),
        row_labels=list(quiver.vertices), col_labels=list(adj.regular))
    report = {
        "schema": 1,
        "pipeline": "quiver",
        "quiver": {
            "vertices": list(quiver.vertices),
            "edges": {e: [quiver.s(e), quiver.r(e)] for e in quiver.edges},
        },
        "regular_vertices": list(adj.regular),
        **report,
    }
    return report, segments


def crossed_product_k_groups(alpha, presets=None, degrees=(0, 1)):
    """Kernel/cokernel data of 1 - alpha acting on each preset degree.

    ``alpha`` is the matrix of the induced automorphism on the free part
    of the coefficient K-group; the default preset is Z^n on every degree,
    n matching the matrix size.
    """
    if alpha.rows != alpha.cols:
        raise RingError("automorphism matrix must be square")
    n = alpha.rows
    one_minus = IntMatrix.from_rows(
        [[(1 if i == j else 0) - alpha.entries[i][j] for j in range(n)]
         for i in range(n)])
    if presets is None:
        presets = {d: [PresetComponent(FgAbelianGroup.free(1))]
                   for d in set(degrees) | {min(degrees) - 1}}
    report, segments = _pipeline_report(
        one_minus, presets, list(degrees),
        row_labels=list(range(n)), col_labels=list(range(n)))
    report = {
        "schema": 1,
        "pipeline": "crossed-product",
        "alpha": [list(r) for r in alpha.entries],
        **report,
    }
    return report, segments
