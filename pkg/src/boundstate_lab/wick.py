"""Wick contractions for products of elementary and composite field operators.

A composite annihilator phi_a(z) is expanded as sum phi_a*(y) psi2(z.2) psi1(z.1)
and a creator phi+_a(z) as sum phi_a(y) psi1+(z.1) psi2+(z.2), where
(z.1, z.2) runs over the constituent sites whose anchor is z.  A vacuum
expectation is the signed sum over complete contractions of an annihilator
with a creator to its right (operators stamped +0 against -0).

Text grammar, whitespace separated: ``psi1(x)``, ``psi2+(y)``,
``phi[a](z)``, ``phi+[b](w)``.
"""

from dataclasses import dataclass, field
from itertools import product as cartesian
import re
import string

import numpy as np

from .errors import ParseError, UnboundVariable, ValidationError

KINDS = ("psi1", "psi2", "psi1_dag", "psi2_dag", "phi", "phi_dag")
_TOKEN = re.compile(r"^(psi1|psi2|phi)(\+)?(?:\[(\w+)\])?\((\w+)\)$")


@dataclass(frozen=True)
class OpSymbol:
    kind: str
    arg: str
    label: str | None = None
    slot: int = 0
    probed: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown operator kind {self.kind!r}")
        composite = self.kind.startswith("phi")
        if composite and self.label is None:
            raise ValidationError("composite operators need a label")
        if not composite and self.label is not None:
            raise ValidationError("elementary operators carry no label")

    @property
    def dagger(self):
        return self.kind.endswith("_dag")

    @property
    def composite(self):
        return self.kind.startswith("phi")

    @property
    def time_tag(self):
        """+1 for annihilators (time +0), -1 for creators (time -0), 0 if probed."""
        if self.probed:
            return 0
        return -1 if self.dagger else 1

    def __str__(self):
        base = self.kind.replace("_dag", "+")
        lab = f"[{self.label}]" if self.label is not None else ""
        if self.composite:
            base = "phi+" if self.dagger else "phi"
        return f"{base}{lab}({self.arg})"


def parse_product(text):
    """Parse ``psi1(x) psi2+(y) phi[a](z) ...`` into a list of OpSymbol."""
    tokens = text.split()
    if not tokens:
        raise ParseError("empty operator product")
    out = []
    for slot, tok in enumerate(tokens):
        m = _TOKEN.match(tok)
        if m is None:
            raise ParseError(f"cannot parse operator {tok!r}")
        name, dag, label, arg = m.groups()
        if name == "phi" and label is None:
            raise ParseError(f"composite {tok!r} needs a label in brackets")
        if name != "phi" and label is not None:
            raise ParseError(f"elementary operator {tok!r} takes no label")
        kind = name + ("_dag" if dag else "")
        out.append(OpSymbol(kind, arg, label, slot))
    return out


def _with_slots(product):
    return [OpSymbol(o.kind, o.arg, o.label, i, o.probed) for i, o in enumerate(product)]


# --------------------------------------------------------------------------
# expansion and enumeration


@dataclass(frozen=True)
class _Elem:
    species: int
    dagger: bool
    slot: int
    part: int  # 0 for elementary, 1 or 2 for a composite constituent


def _expand(product):
    seq = []
    for op in product:
        if op.kind in ("psi1", "psi2", "psi1_dag", "psi2_dag"):
            seq.append(_Elem(int(op.kind[3]), op.dagger, op.slot, 0))
        elif op.kind == "phi":
            seq += [_Elem(2, False, op.slot, 2), _Elem(1, False, op.slot, 1)]
        else:
            seq += [_Elem(1, True, op.slot, 1), _Elem(2, True, op.slot, 2)]
    return seq


def _matchings(ann, cre):
    """All bijections annihilator -> creator with the creator to the right."""
    if not ann:
        yield []
        return
    first, rest = ann[0], ann[1:]
    for k, c in enumerate(cre):
        if c > first:
            for tail in _matchings(rest, cre[:k] + cre[k + 1:]):
                yield [(first, c)] + tail


def _parity(order):
    order = list(order)
    sign = 1
    seen = [False] * len(order)
    for i in range(len(order)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = order[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


@dataclass(frozen=True)
class ContractionDiagram:
    """One complete contraction.

    ``pairings`` holds slot pairs (a composite slot can appear twice);
    ``links`` holds the same pairs at the level of constituents,
    ((slot, part), (slot, part)).
    """

    pairings: tuple
    links: tuple
    sign: int
    kernel: str
    suppressed: bool = False
    diagram_class: str | None = None


def _node(product, elem):
    return product[elem.slot]


def _render_kernel(product, links):
    ops = {o.slot: o for o in product}
    factors = []
    partner = {}
    for a, b in links:
        partner[a] = b
        partner[b] = a

    def name(ref):
        slot, part = ref
        op = ops[slot]
        return op.arg if part == 0 else f"{op.arg}.{part}"

    double = set()
    for op in product:
        if not op.composite:
            continue
        p1, p2 = partner[(op.slot, 1)], partner[(op.slot, 2)]
        if p1[0] == p2[0] and p1[1] == 1 and p2[1] == 2 and ops[p1[0]].composite:
            other = ops[p1[0]]
            key = tuple(sorted((op.slot, other.slot)))
            if key not in double:
                double.add(key)
                factors.append(f"delta_{op.label}{other.label} delta({op.arg}-{other.arg})")
    for a, b in links:
        if a[1] == 0 and b[1] == 0:
            factors.append(f"delta({name(a)}-{name(b)})")
    for op in product:
        if op.composite and not any(op.slot in k for k in double):
            star = "" if op.dagger else "*"
            p1, p2 = partner[(op.slot, 1)], partner[(op.slot, 2)]
            factors.append(f"phi_{op.label}{star}({name(p1)},{name(p2)};{op.arg})")
    return " ".join(factors) if factors else "1"


def _components(product, links):
    parent = {o.slot: o.slot for o in product}

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a, b in links:
        ra, rb = find(a[0]), find(b[0])
        if ra != rb:
            parent[ra] = rb
    groups = {}
    for o in product:
        groups.setdefault(find(o.slot), []).append(o.slot)
    return list(groups.values())


def _classify(product, links, probe):
    """A1..A5 for a probed pair psi1+(u) psi1(v) given by its two slots."""
    if probe is None:
        return None
    su, sv = probe
    ops = {o.slot: o for o in product}
    partner = {}
    for a, b in links:
        partner[a] = b
        partner[b] = a
    pu, pv = partner[(su, 0)], partner[(sv, 0)]
    cu, cv = ops[pu[0]].composite, ops[pv[0]].composite
    if not cu and not cv:
        return "A1"
    if not cu and cv:
        return "A2"
    if cu and not cv:
        return "A3"
    spect = partner[(pu[0], 2)]
    return "A4" if spect == (pv[0], 2) else "A5"


def enumerate_contractions(product, probe=None, chain_limit=3):
    """Every complete time-ordered contraction of ``product``.

    Parameters
    ----------
    product : list of OpSymbol or str
    probe : (slot_u, slot_v), optional
        Slots of a normal-ordered pair psi1+(u) psi1(v); no contraction is
        made between them and each diagram is assigned a class A1..A5.
    chain_limit : int
        Diagrams whose connected piece links this many composites or more
        are flagged ``suppressed``.

    Returns
    -------
    list of ContractionDiagram
    """
    if isinstance(product, str):
        product = parse_product(product)
    if not product:
        raise ValidationError("empty operator product")
    product = _with_slots(product)
    if probe is None:
        marked = [o.slot for o in product if o.probed]
        if len(marked) == 2:
            probe = tuple(marked)
    seq = _expand(product)
    if len(seq) % 2:
        return []
    per_species = []
    for s in (1, 2):
        ann = [i for i, e in enumerate(seq) if e.species == s and not e.dagger]
        cre = [i for i, e in enumerate(seq) if e.species == s and e.dagger]
        if len(ann) != len(cre):
            return []
        per_species.append(list(_matchings(ann, cre)))
    forbidden = set(probe) if probe is not None else set()
    out = []
    for m1, m2 in cartesian(*per_species):
        pairs = sorted(m1 + m2)
        if probe is not None and any(
            {seq[i].slot, seq[j].slot} == forbidden for i, j in pairs
        ):
            continue
        order = [k for p in pairs for k in p]
        sign = _parity(order)
        links = tuple(((seq[i].slot, seq[i].part), (seq[j].slot, seq[j].part)) for i, j in pairs)
        slots = tuple((a[0], b[0]) for a, b in links)
        n_comp = max(
            sum(1 for s in comp if product[s].composite) for comp in _components(product, links)
        )
        out.append(ContractionDiagram(
            pairings=slots,
            links=links,
            sign=sign,
            kernel=_render_kernel(product, links),
            suppressed=n_comp >= chain_limit,
            diagram_class=_classify(product, links, probe),
        ))
    return out


# --------------------------------------------------------------------------
# numeric evaluation


@dataclass(frozen=True)
class KernelValue:
    value: complex
    n_diagrams: int
    n_suppressed: int = 0


def _composite_tables(config, spectrum, nsites):
    """F[label][X] = L x L table phi(x1 - x2) [anchor(x1, x2) == X]."""
    anchors = np.array([[config.anchor(x1, x2) for x2 in range(nsites)] for x1 in range(nsites)])
    rel = (np.arange(nsites)[:, None] - np.arange(nsites)[None, :]) % nsites
    tables = {}
    for st in spectrum.states:
        vals = st.phi[rel]
        tables[st.label] = [np.where(anchors == X, vals, 0.0) for X in range(nsites)]
    return tables


def evaluate_vev(product, positions, spectrum, config, labels=None, include_suppressed=True,
                 diagrams=None):
    """Vacuum expectation value as a signed sum of contraction diagrams.

    Parameters
    ----------
    product : list of OpSymbol or str
    positions : dict
        Site of every position variable.
    spectrum : PairSpectrum
        Supplies the pair wavefunctions phi_alpha(y).
    config : LatticeConfig
        Ring length and the anchor rule of the composites.
    labels : dict, optional
        Pair-state index of every label variable; integer-looking labels
        bind to themselves.
    include_suppressed : bool
        Include diagrams with long composite chains.

    Raises
    ------
    UnboundVariable
    """
    if isinstance(product, str):
        product = parse_product(product)
    product = _with_slots(product)
    labels = dict(labels or {})
    L = config.sites
    site = {}
    lab = {}
    for op in product:
        if op.arg not in positions:
            raise UnboundVariable(f"position variable {op.arg!r} is unbound")
        site[op.slot] = int(positions[op.arg]) % L
        if op.composite:
            if op.label in labels:
                lab[op.slot] = int(labels[op.label])
            elif op.label.isdigit():
                lab[op.slot] = int(op.label)
            else:
                raise UnboundVariable(f"label variable {op.label!r} is unbound")
    diagrams = enumerate_contractions(product) if diagrams is None else diagrams
    tables = _composite_tables(config, spectrum, L) if any(o.composite for o in product) else {}
    letters = string.ascii_letters
    total = 0j
    n_supp = 0
    for d in diagrams:
        if d.suppressed:
            n_supp += 1
            if not include_suppressed:
                continue
        # union the constituent references joined by each contraction
        parent = {}

        def find(r):
            parent.setdefault(r, r)
            while parent[r] != r:
                parent[r] = parent[parent[r]]
                r = parent[r]
            return r

        for a, b in d.links:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
        fixed = {}
        ok = True
        for op in product:
            if not op.composite:
                root = find((op.slot, 0))
                if root in fixed and fixed[root] != site[op.slot]:
                    ok = False
                    break
                fixed[root] = site[op.slot]
        if not ok:
            continue
        free = {}
        operands, subs = [], []
        for op in product:
            if not op.composite:
                continue
            tab = tables[lab[op.slot]][site[op.slot]]
            if not op.dagger:
                tab = tab.conj()
            idx = []
            sl = []
            for part in (1, 2):
                root = find((op.slot, part))
                if root in fixed:
                    sl.append(fixed[root])
                else:
                    if root not in free:
                        free[root] = letters[len(free)]
                    sl.append(slice(None))
                    idx.append(free[root])
            operands.append(tab[tuple(sl)])
            subs.append("".join(idx))
        if operands:
            val = np.einsum(",".join(subs) + "->", *operands) if free else np.prod([complex(o) for o in operands])
        else:
            val = 1.0
        total += d.sign * complex(val)
    return KernelValue(complex(total), len(diagrams), n_supp)


def dense_vev(product, positions, spectrum, space, labels=None):
    """Same expectation value from exact sparse matrices (oracle route)."""
    from .fockspace import composite_operator, field_operator

    if isinstance(product, str):
        product = parse_product(product)
    labels = dict(labels or {})
    v = space.vacuum()
    for op in reversed(product):
        x = int(positions[op.arg]) % space.config.sites
        if op.composite:
            lab = int(labels[op.label]) if op.label in labels else int(op.label)
            m = composite_operator(space, spectrum, lab, x, op.dagger)
        else:
            m = field_operator(space, int(op.kind[3]), x, op.dagger)
        v = m @ v
    return complex(space.vacuum().conj() @ v)


# --------------------------------------------------------------------------
# symbolic tilde map


@dataclass(frozen=True)
class SymOp:
    """chi1, chi1+, chi2, chi2+ (fermions) or pair fields phi(x1, x2), phi+(x1, x2)."""

    name: str
    args: tuple

    @property
    def fermion(self):
        return self.name.startswith("chi")

    @property
    def rank(self):
        # normal order: fermion creators, boson creators, boson annihilators, fermion annihilators
        return {"chi1+": 0, "chi2+": 0, "phi+": 1, "phi": 2, "chi1": 3, "chi2": 3}[self.name]

    def __str__(self):
        return f"{self.name}({','.join(self.args)})"


@dataclass(frozen=True)
class SymTerm:
    coef: int
    sums: tuple
    deltas: tuple
    ops: tuple
    kernels: tuple = ()

    def __str__(self):
        s = "-" if self.coef < 0 else "+"
        parts = []
        if abs(self.coef) != 1:
            parts.append(str(abs(self.coef)))
        if self.sums:
            parts.append("sum_" + ",".join(self.sums))
        parts += [f"delta({a}-{b})" for a, b in self.deltas]
        parts += list(self.kernels)
        parts += [str(o) for o in self.ops]
        return f"{s} " + " ".join(parts or ["1"])


@dataclass
class SymExpr:
    terms: list = field(default_factory=list)

    def __add__(self, other):
        return SymExpr(self.terms + other.terms)

    def __neg__(self):
        return SymExpr([SymTerm(-t.coef, t.sums, t.deltas, t.ops, t.kernels) for t in self.terms])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        out = []
        for a in self.terms:
            for b in other.terms:
                b = _rename_apart(b, a)
                out.append(SymTerm(a.coef * b.coef, a.sums + b.sums, a.deltas + b.deltas,
                                   a.ops + b.ops, a.kernels + b.kernels))
        return SymExpr(out)

    def __str__(self):
        return " ".join(str(t) for t in self.terms) if self.terms else "0"

    @property
    def is_zero(self):
        return not self.terms


_counter = [0]


def _fresh(base="y"):
    _counter[0] += 1
    return f"{base}{_counter[0]}"


def _subst(term, mapping):
    f = lambda a: mapping.get(a, a)
    return SymTerm(
        term.coef,
        tuple(f(s) for s in term.sums),
        tuple((f(a), f(b)) for a, b in term.deltas),
        tuple(SymOp(o.name, tuple(f(x) for x in o.args)) for o in term.ops),
        tuple(_subst_kernel(k, mapping) for k in term.kernels),
    )


def _subst_kernel(k, mapping):
    name, args = k.split("(", 1)
    args = args.rstrip(")").split(",")
    return f"{name}({','.join(mapping.get(a, a) for a in args)})"


def _rename_apart(b, a):
    clash = set(b.sums) & (set(a.sums) | {x for o in a.ops for x in o.args})
    return _subst(b, {s: _fresh() for s in clash}) if clash else b


def tilde_map(op_kind, arg):
    """Symbolic image of psi1, psi2 (or their adjoints, suffix '+') on the auxiliary space.

    psi~1(v) = chi1(v) + sum_y phi(v, y) chi2+(y)
    psi~2(v) = chi2(v) - sum_y chi1+(y) phi(y, v)
    """
    y = _fresh()
    if op_kind == "psi1":
        return SymExpr([SymTerm(1, (), (), (SymOp("chi1", (arg,)),)),
                        SymTerm(1, (y,), (), (SymOp("phi", (arg, y)), SymOp("chi2+", (y,))))])
    if op_kind == "psi2":
        return SymExpr([SymTerm(1, (), (), (SymOp("chi2", (arg,)),)),
                        SymTerm(-1, (y,), (), (SymOp("chi1+", (y,)), SymOp("phi", (y, arg))))])
    if op_kind == "psi1+":
        return SymExpr([SymTerm(1, (), (), (SymOp("chi1+", (arg,)),)),
                        SymTerm(1, (y,), (), (SymOp("chi2", (y,)), SymOp("phi+", (arg, y))))])
    if op_kind == "psi2+":
        return SymExpr([SymTerm(1, (), (), (SymOp("chi2+", (arg,)),)),
                        SymTerm(-1, (y,), (), (SymOp("phi+", (y, arg)), SymOp("chi1", (y,))))])
    raise ValidationError(f"tilde_map is defined for psi1, psi2, psi1+, psi2+; got {op_kind!r}")


def tilde_product(kinds_args):
    """Factorwise image of a product, e.g. [('psi1+', 'u'), ('psi1', 'v')]."""
    out = SymExpr([SymTerm(1, (), (), ())])
    for kind, arg in kinds_args:
        out = out * tilde_map(kind, arg)
    return out


def _swap(a, b):
    """Return (sign, extra) with a b = sign * b a + extra (extra: list of (coef, delta, kernel))."""
    if a.fermion and b.fermion:
        extra = []
        sa, sb = a.name[3], b.name[3]
        if sa == sb and (a.name.endswith("+") != b.name.endswith("+")):
            extra.append((1, (a.args[0], b.args[0]), None))
        return -1, extra
    if a.name == "phi" and b.name == "phi+":
        return 1, [(1, None, f"K({a.args[0]},{a.args[1]},{b.args[0]},{b.args[1]})")]
    if a.name == "phi+" and b.name == "phi":
        return 1, [(-1, None, f"K({b.args[0]},{b.args[1]},{a.args[0]},{a.args[1]})")]
    return 1, []


def _normal_order_term(t):
    ops = list(t.ops)
    for i in range(len(ops) - 1):
        a, b = ops[i], ops[i + 1]
        if (a.rank, a.name, a.args) > (b.rank, b.name, b.args):
            sign, extra = _swap(a, b)
            out = [SymTerm(t.coef * sign, t.sums, t.deltas, tuple(ops[:i] + [b, a] + ops[i + 2:]), t.kernels)]
            for c, delta, kern in extra:
                rest = tuple(ops[:i] + ops[i + 2:])
                out.append(SymTerm(
                    t.coef * c, t.sums,
                    t.deltas + ((delta,) if delta else ()),
                    rest,
                    t.kernels + ((kern,) if kern else ()),
                ))
            return out, True
        if a == b and a.fermion:
            return [], True
    return [t], False


def _reduce_deltas(t):
    sums = list(t.sums)
    deltas = []
    mapping = {}
    for a, b in t.deltas:
        a, b = mapping.get(a, a), mapping.get(b, b)
        if a == b:
            continue
        if b in sums:
            mapping = {k: (a if v == b else v) for k, v in mapping.items()}
            mapping[b] = a
            sums.remove(b)
        elif a in sums:
            mapping = {k: (b if v == a else v) for k, v in mapping.items()}
            mapping[a] = b
            sums.remove(a)
        else:
            deltas.append((a, b))
    t = SymTerm(t.coef, tuple(sums), tuple(deltas), t.ops, t.kernels)
    return _subst(t, mapping) if mapping else t


def _canonical(t):
    # rename bound variables in order of appearance
    order = []
    for o in t.ops:
        for x in o.args:
            if x in t.sums and x not in order:
                order.append(x)
    for k in t.kernels:
        for x in k.split("(", 1)[1].rstrip(")").split(","):
            if x in t.sums and x not in order:
                order.append(x)
    mapping = {s: f"s{i}" for i, s in enumerate(order)}
    t = _subst(t, mapping)
    return SymTerm(t.coef, tuple(sorted(t.sums)), tuple(sorted(tuple(sorted(d)) for d in t.deltas)),
                   t.ops, tuple(sorted(t.kernels)))


def normal_order(expr, max_steps=100000):
    """Normal-order with {chi, chi+} = delta and [phi, phi+] = K; merge equal terms."""
    pending = list(expr.terms)
    done = []
    steps = 0
    while pending:
        steps += 1
        if steps > max_steps:
            raise RuntimeError("normal ordering did not terminate")
        t = pending.pop()
        new, changed = _normal_order_term(t)
        if changed:
            pending.extend(new)
        else:
            done.append(_canonical(_reduce_deltas(t)))
    merged = {}
    for t in done:
        key = (t.sums, t.deltas, t.ops, t.kernels)
        merged[key] = merged.get(key, 0) + t.coef
    return SymExpr([SymTerm(c, *k) for k, c in sorted(merged.items(), key=lambda kv: str(kv[0])) if c != 0])


def anticommutator(a, b):
    """Symbolic {A, B} brought to normal order."""
    return normal_order(a * b + b * a)


def random_product(rng, nsites, n_labels=1, max_ops=8, n_swaps=2):
    """Random species-balanced product with mostly annihilators on the left.

    Returns (text, positions).  Products drawn this way usually have a
    nonzero vacuum expectation, which makes them useful as oracle probes.
    """
    while True:
        k = int(rng.integers(0, max_ops // 2 + 1))
        n_ann_c = int(rng.integers(0, k + 1))
        n_cre_c = int(rng.integers(max(0, n_ann_c - (k - n_ann_c)), k + 1)) if k else 0
        # species-1 and species-2 counts balance on both sides
        j = k - n_ann_c
        ann = ["phi"] * n_ann_c + ["psi1", "psi2"] * j
        extra = n_ann_c - n_cre_c
        cre = ["phi+"] * n_cre_c + ["psi1+", "psi2+"] * (j + extra)
        if 0 < len(ann) + len(cre) <= max_ops:
            break
    rng.shuffle(ann)
    rng.shuffle(cre)
    toks = ann + cre
    for _ in range(n_swaps):
        if len(toks) > 1:
            i = int(rng.integers(len(toks) - 1))
            toks[i], toks[i + 1] = toks[i + 1], toks[i]
    out = []
    for i, t in enumerate(toks):
        if t.startswith("phi"):
            t = f"{t}[{int(rng.integers(n_labels))}]"
        out.append(f"{t}(x{i})")
    positions = {f"x{i}": int(rng.integers(nsites)) for i in range(len(toks))}
    return " ".join(out), positions
