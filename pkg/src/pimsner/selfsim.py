"""Self-similar groups by wreath recursion and their correspondences.

A self-similar group acts on the words over a finite alphabet so that
g(xw) = g(x) . g|_x(w): each generator is presented by a permutation of
the letters plus a restriction word per letter.  Group elements are freely
reduced words in the generators; equality is decided up to a configurable
depth D (identical action on all words of length <= D with freely trivial
depth-D restrictions), which is sound on the "unequal" side and certifies
equality only up to that depth.

``build_nek_correspondence`` packages the permutational bimodule of the
group: the module is free of rank |alphabet| over the group ring, with the
left action twisted by the recursion (g . x = g(x) . g|_x) and pairing
< x . g, y . h > = delta_{x,y} g^{-1} h.  The left action of every group
element is a |alphabet| x |alphabet| matrix over the group ring, so it is
compact outright, and the associated Cuntz-Pimsner ring is the
Nekrashevych algebra of the group.
"""

from __future__ import annotations

from .funcmod import (
    CompactOperator,
    Correspondence,
    FunctionalHom,
    FunctionalModule,
    free_module,
)
from .ringcore import GroupRing, ZZ


class SelfSimError(ValueError):
    """Malformed recursion data or input text; may carry a line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


# ---------------------------------------------------------------------------
# Group words
# ---------------------------------------------------------------------------

def reduce_word(letters):
    """Free reduction: cancel adjacent g g^-1 pairs."""
    out = []
    for gen, exp in letters:
        if out and out[-1][0] == gen and out[-1][1] == -exp:
            out.pop()
        else:
            out.append((gen, exp))
    return tuple(out)


def word_mul(w1, w2):
    return reduce_word(tuple(w1) + tuple(w2))


def word_inv(w):
    return tuple((gen, -exp) for gen, exp in reversed(w))


IDENTITY = ()


class SelfSimilarGroup:
    """A group given by wreath recursion over a finite alphabet.

    ``recursion`` maps each generator name to a pair (permutation dict,
    restrictions dict): the permutation sends letters to letters and the
    restriction of the generator at each letter is a group word.
    """

    def __init__(self, alphabet, recursion, equality_depth=8, label="G"):
        self.alphabet = list(alphabet)
        if len(self.alphabet) < 2:
            raise SelfSimError("the alphabet needs at least two letters")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise SelfSimError("duplicate letters in the alphabet")
        self.generators = list(recursion)
        self.perm = {}
        self.restriction_table = {}
        for gen, (perm, restr) in recursion.items():
            if sorted(perm) != sorted(self.alphabet) or \
                    sorted(perm.values()) != sorted(self.alphabet):
                raise SelfSimError(
                    f"generator {gen!r}: letter map is not a permutation")
            self.perm[gen] = dict(perm)
            self.restriction_table[gen] = {
                x: reduce_word(restr.get(x, ())) for x in self.alphabet}
        self._inv_perm = {g: {v: k for k, v in p.items()}
                          for g, p in self.perm.items()}
        self.equality_depth = equality_depth
        self.label = label
        self._canonical = {IDENTITY: IDENTITY}
        self._triviality = {}

    # -- the action -----------------------------------------------------------

    def gen_word(self, gen, exp=1):
        if gen not in self.perm:
            raise SelfSimError(f"unknown generator {gen!r}")
        return ((gen, 1),) * exp if exp >= 0 else ((gen, -1),) * (-exp)

    def act_letter(self, word, x):
        """Image of the letter x under the group word (rightmost first)."""
        for gen, exp in reversed(word):
            x = self.perm[gen][x] if exp > 0 else self._inv_perm[gen][x]
        return x

    def restrict_letter(self, word, x):
        """Restriction of the group word at the letter x."""
        out = ()
        for gen, exp in reversed(word):
            if exp > 0:
                out = word_mul(self.restriction_table[gen][x], out)
                x = self.perm[gen][x]
            else:
                y = self._inv_perm[gen][x]
                out = word_mul(word_inv(self.restriction_table[gen][y]), out)
                x = y
        return out

    def act(self, word, letters):
        """Length-preserving image of a word over the alphabet."""
        out = []
        g = tuple(word)
        for x in letters:
            out.append(self.act_letter(g, x))
            g = self.restrict_letter(g, x)
        if isinstance(letters, str):
            return "".join(out)
        return type(letters)(out)

    def restriction(self, word, letters):
        """Iterated restriction g|_w along the word w, freely reduced."""
        g = reduce_word(word)
        for x in letters:
            gx = self.restrict_letter(g, x)
            g = gx
        return g

    # -- depth-bounded equality -------------------------------------------------

    def is_trivial(self, word, depth=None):
        """Depth-bounded triviality: acts as identity on words of length
        <= depth and all depth-level restrictions reduce freely to the
        empty word.  False is definitive; True is certified to the depth.
        """
        if depth is None:
            depth = self.equality_depth
        word = reduce_word(word)
        return self._trivial(word, depth)

    def _trivial(self, word, depth):
        if not word:
            return True
        if depth == 0:
            return not word
        key = (word, depth)
        cached = self._triviality.get(key)
        if cached is not None:
            return cached
        ok = True
        for x in self.alphabet:
            if self.act_letter(word, x) != x:
                ok = False
                break
        if ok:
            for x in self.alphabet:
                if not self._trivial(self.restrict_letter(word, x), depth - 1):
                    ok = False
                    break
        self._triviality[key] = ok
        return ok

    def equal(self, w1, w2, depth=None):
        return self.is_trivial(word_mul(w1, word_inv(w2)), depth)

    def canonical(self, word):
        """A canonical representative of the word's group element.

        Representatives are interned per group: the first word seen for an
        element (at the configured equality depth) becomes its symbol.
        """
        word = reduce_word(word)
        if word in self._canonical:
            return self._canonical[word]
        for rep in list(self._canonical.values()):
            if self.equal(word, rep):
                self._canonical[word] = rep
                return rep
        self._canonical[word] = word
        return word

    def group_ring(self, k=ZZ):
        ring = GroupRing(k, self.canonical, word_mul, IDENTITY,
                         label=f"{k}[{self.label}]")
        ring.gen_symbols = [IDENTITY] + \
            [self.canonical(self.gen_word(g)) for g in self.generators]
        return ring

    def __repr__(self):
        return (f"SelfSimilarGroup({self.label}, |X|={len(self.alphabet)}, "
                f"gens={self.generators})")


def group_equal(group, w1, w2, depth=None):
    """Depth-bounded equality of group words; see SelfSimilarGroup.equal."""
    return group.equal(w1, w2, depth)


def act(group, word, letters):
    return group.act(word, letters)


def restriction(group, word, letters):
    return group.restriction(word, letters)


def odometer():
    """The binary adding machine: a = (0 1)(e, a)."""
    return SelfSimilarGroup(
        ["0", "1"],
        {"a": ({"0": "1", "1": "0"}, {"0": (), "1": (("a", 1),)})},
        label="odometer")


def trivial_group(alphabet):
    """The trivial group acting on the given alphabet."""
    return SelfSimilarGroup(alphabet, {}, label="1")


# ---------------------------------------------------------------------------
# Input format
# ---------------------------------------------------------------------------

def parse_selfsim(text):
    """Parse the self-similar group format.

    ``alphabet: 0 1`` declares the letters; each generator line reads
    ``a = (perm 0 1)(e, a)``: any number of ``(perm ...)`` cycles composed
    left to right, then the restriction tuple ordered by the alphabet.
    Restriction entries are juxtaposed generator names separated by
    whitespace or ``*``, with ``^-1`` for inverses and ``e`` for the
    identity.  ``depth: n`` sets the equality depth.  ``#`` comments.
    """
    alphabet = None
    recursion = {}
    depth = 8
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("alphabet:"):
            alphabet = line[len("alphabet:"):].split()
            if len(alphabet) < 2:
                raise SelfSimError("alphabet needs at least two letters",
                                   line=lineno)
            continue
        if line.startswith("depth:"):
            depth = int(line[len("depth:"):].strip())
            continue
        if "=" not in line:
            raise SelfSimError(f"expected 'name = (perm ...)(...)', got {line!r}",
                               line=lineno)
        if alphabet is None:
            raise SelfSimError("generator declared before the alphabet",
                               line=lineno)
        name, rest = line.split("=", 1)
        name = name.strip()
        if not name or name == "e":
            raise SelfSimError(f"bad generator name {name!r}", line=lineno)
        groups = _paren_groups(rest.strip(), lineno)
        if not groups:
            raise SelfSimError("missing restriction tuple", line=lineno)
        *perm_groups, restr_group = groups
        perm = {x: x for x in alphabet}
        for g in perm_groups:
            parts = g.split()
            if not parts or parts[0] != "perm":
                raise SelfSimError(f"expected '(perm ...)', got ({g})",
                                   line=lineno)
            cycle = parts[1:]
            for x in cycle:
                if x not in alphabet:
                    raise SelfSimError(f"unknown letter {x!r} in cycle",
                                       line=lineno)
            step = {}
            for i, x in enumerate(cycle):
                step[x] = cycle[(i + 1) % len(cycle)]
            perm = {x: step.get(perm[x], perm[x]) for x in alphabet}
        entries = [e.strip() for e in restr_group.split(",")]
        if len(entries) != len(alphabet):
            raise SelfSimError(
                f"restriction tuple has {len(entries)} entries for "
                f"{len(alphabet)} letters", line=lineno)
        restr = {}
        for x, entry in zip(alphabet, entries):
            restr[x] = _parse_word(entry, lineno)
        recursion[name] = (perm, restr)
    if alphabet is None:
        raise SelfSimError("missing 'alphabet:' declaration")
    # restriction words may only use declared generators
    for gen, (_, restr) in recursion.items():
        for x, w in restr.items():
            for g, _e in w:
                if g not in recursion:
                    raise SelfSimError(
                        f"restriction of {gen!r} at {x!r} uses unknown "
                        f"generator {g!r}")
    return SelfSimilarGroup(alphabet, recursion, equality_depth=depth)


def _paren_groups(text, lineno):
    groups = []
    depth = 0
    buf = []
    for ch in text:
        if ch == "(":
            if depth:
                raise SelfSimError("nested parentheses", line=lineno)
            depth = 1
            buf = []
        elif ch == ")":
            if not depth:
                raise SelfSimError("unbalanced ')'", line=lineno)
            depth = 0
            groups.append("".join(buf))
        elif depth:
            buf.append(ch)
        elif not ch.isspace():
            raise SelfSimError(f"unexpected character {ch!r}", line=lineno)
    if depth:
        raise SelfSimError("unbalanced '('", line=lineno)
    return groups


def _parse_word(entry, lineno):
    entry = entry.replace("*", " ")
    word = []
    for token in entry.split():
        if token in ("e", "1"):
            continue
        exp = 1
        if token.endswith("^-1"):
            token = token[:-3]
            exp = -1
        word.append((token, exp))
    return tuple(word)


# ---------------------------------------------------------------------------
# The Nekrashevych correspondence
# ---------------------------------------------------------------------------

def nek_module(group, k=ZZ):
    """The permutational bimodule of a self-similar group over kG.

    X symbols are ("x", letter, canonical word) standing for x . g;
    dual symbols are ("xp", letter, canonical word).  The pairing is
    < x . g, y . h > = delta_{x,y} g^-1 h, the right action multiplies the
    group tail, and the left action is the wreath recursion.
    """
    ring = group.group_ring(k)
    one = k.one
    can = group.canonical

    def pairing(c, b):
        _, x, g = c
        _, y, h = b
        if x != y:
            return ring.zero()
        return ring.monomial(can(word_mul(word_inv(g), h)))

    def x_right(b, w):
        _, x, g = b
        return {("x", x, can(word_mul(g, w))): one}

    def x_left(w, b):
        _, x, g = b
        return {("x", group.act_letter(w, x),
                 can(word_mul(group.restrict_letter(w, x), g))): one}

    def xp_left(w, c):
        _, x, g = c
        return {("xp", x, can(word_mul(g, word_inv(w)))): one}

    def xp_right(c, w):
        _, x, g = c
        y = group.act_letter(word_inv(w), x)
        return {("xp", y, can(word_mul(
            word_inv(group.restrict_letter(w, y)), g))): one}

    def x_split(b):
        _, x, g = b
        return ("x", x, IDENTITY), ring.monomial(g)

    def xp_split(c):
        _, x, g = c
        return ring.monomial(can(word_inv(g))), ("xp", x, IDENTITY)

    def unit(_sym):
        return ring.monomial(IDENTITY)

    def fs_pairs_left(support):
        return [(("x", b[1], b[2]), ("xp", b[1], b[2])) for b in support]

    def fs_pairs_right(support):
        return [(("x", c[1], c[2]), ("xp", c[1], c[2])) for c in support]

    return FunctionalModule(
        ring=ring,
        x_basis=[("x", x, IDENTITY) for x in group.alphabet],
        xp_basis=[("xp", x, IDENTITY) for x in group.alphabet],
        pairing=pairing, x_right=x_right, xp_left=xp_left,
        x_left=x_left, xp_right=xp_right,
        x_split=x_split, xp_split=xp_split,
        x_left_support=unit, xp_left_support=unit,
        fs_pairs_left=fs_pairs_left, fs_pairs_right=fs_pairs_right,
        label=f"bimodule of {group.label}")


def nek_pairing(module, xi, eta):
    """The group-ring pairing of two formal sums over (letter, word) pairs.

    ``xi`` and ``eta`` map (letter, group word) pairs to coefficients;
    the value is the sum over matching letters of lambda_x mu_x g_x^-1 h_x.
    """
    pxi = {("xp", x, module.ring.canonicalize(reduce_word(g))): c
           for (x, g), c in xi.items()}
    peta = {("x", x, module.ring.canonicalize(reduce_word(g))): c
            for (x, g), c in eta.items()}
    return module.pair(pxi, peta)


def build_nek_correspondence(group, k=ZZ):
    """The correspondence of a self-similar group, checked on generators.

    Verifies the recursion tables are permutations, the left-module law
    g . x = g(x) . g|_x on all (generator, letter) pairs, adjointability of
    the left action against the pairing, and that each generator acts as a
    d x d matrix over the group ring (so the action is compact).
    """
    module = nek_module(group, k)
    ring = module.ring
    one = k.one
    d = len(group.alphabet)
    free = free_module(ring, list(group.alphabet))

    def U(b):
        _, x, g = b
        return {(x, g): one}

    def V(c):
        _, x, g = c
        return {(x, ring.canonicalize(word_inv(g))): one}

    hom = FunctionalHom(module, free, U, V, label="free hom")

    def delta_compact_rule(relt):
        terms = []
        for w, coeff in relt.terms.items():
            for y in group.alphabet:
                terms.append((
                    {("x", group.act_letter(w, y),
                      ring.canonicalize(group.restrict_letter(w, y))): coeff},
                    {("xp", y, IDENTITY): one}))
        return CompactOperator(module, terms)

    corr = Correspondence(module, hom, list(group.alphabet),
                          delta_compact_rule=delta_compact_rule,
                          label=f"Nekrashevych correspondence of {group.label}")

    # left-module law on (generator, letter) pairs
    for gen in group.generators:
        w = group.gen_word(gen)
        relt = ring.monomial(ring.canonicalize(w))
        for x in group.alphabet:
            got = module.act_left(relt, {("x", x, IDENTITY): one})
            want = {("x", group.act_letter(w, x),
                     ring.canonicalize(group.restrict_letter(w, x))): one}
            if got != want:
                raise SelfSimError(
                    f"left-module law fails for {gen} at {x}")
        # compactness: the action is a d x d matrix over the group ring
        op = corr.delta_compact(relt)
        for x in group.alphabet:
            vec = {("x", x, IDENTITY): one}
            if op.apply(vec) != module.act_left(relt, vec):
                raise SelfSimError(
                    f"compact form of {gen} disagrees with the left action")
        if len(op.terms) != d:
            raise SelfSimError(f"left action of {gen} is not a {d}x{d} matrix")
        # adjointability against the pairing on basis pairs
        for x in group.alphabet:
            for y in group.alphabet:
                c = ("xp", x, IDENTITY)
                b = ("x", y, IDENTITY)
                lhs = module.pair({c: one}, module.act_left(relt, {b: one}))
                rhs = module.pair(module.act_xp_right({c: one}, relt), {b: one})
                if lhs != rhs:
                    raise SelfSimError(
                        f"adjoint law fails for {gen} at ({x}, {y})")
    return corr
