"""Greedy construction of balanced sign functions on a tree atom.

Starting from an atom A, the construction repeatedly looks at the maximal
light-children members strictly inside the current region, walks them in the
canonical order (level, mass descending, build order), and splits them into a
"+1" prefix, one crossing member kept for the next round, and a "-1" tail.
The crossing member is chosen so the accumulated +1 mass stays at most half
of A while the +1 mass plus the crossing member reaches at least half.

If the members available inside the current region cannot reach the half
mark (their total plus the accumulated +1 mass falls short), the run
truncates: a minimal prefix of the available members is promoted to +1 so
that what remains of the region is small, and that remainder becomes the
final region.  The final region receives a constant value that makes the
whole function integrate to zero exactly.

Bottom atoms along the heaviest-child spine of each refined region belong to
no walked member; together with the final region they make up the residual
set, which receives the balancing constant.  Because the +1 mass and the -1
mass each stay at most half of A while the +1 mass plus the final region
reaches at least half, the balancing constant always lies in [-1, 1].
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from haartype.families import (
    AtomCollection,
    Member,
    first_generation,
    light_children,
    union_mass,
)
from haartype.functions import SimpleFunction, average, scalar_space, variation_sum
from haartype.tree import Atom, FiltrationTree


@dataclass(eq=False)
class Region:
    """A union of disjoint leaf intervals left over after a truncation."""

    intervals: tuple[tuple[int, int], ...]
    p: Fraction
    level: int          # level of the atom the region was carved from

    @property
    def is_atom(self) -> bool:
        return False

    def leaf_range(self):
        for lo, hi in self.intervals:
            yield from range(lo, hi)


@dataclass
class StepRecord:
    index: int
    branch: str                         # "crossing" or "truncation"
    region_level: int
    available: int                      # members inside the region
    available_mass: Fraction
    plus_added: Fraction
    minus_added: Fraction
    note: str = ""


@dataclass
class ProtoHaar:
    tree: FiltrationTree
    atom: Atom
    eps: Fraction
    k: int
    steps: list[StepRecord]
    tau: int
    truncated: bool
    plus_parts: list[list[Member]]      # per step
    minus_parts: list[list[Member]]
    y_seq: list[Atom | Region]          # refined regions Y_1..Y_tau
    c0: Fraction
    h: SimpleFunction
    u_mass: Fraction
    v_mass: Fraction
    y_mass: Fraction                    # mass of the tracked final region
    residual_mass: Fraction             # everything in A carrying c0

    @property
    def plus_mass(self) -> Fraction:
        return self.u_mass + (self.residual_mass if self.c0 == 1 else 0)

    @property
    def minus_mass(self) -> Fraction:
        return self.v_mass + (self.residual_mass if self.c0 == -1 else 0)


def default_steps(eps: Fraction) -> int:
    """Smallest j with 2**-j <= eps, plus one."""
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    j = 0
    w = Fraction(1)
    while w > eps:
        w /= 2
        j += 1
    return j + 1


def _member_mass(tree: FiltrationTree, m) -> Fraction:
    return m.p


def covering_share(coll: AtomCollection, atom: Atom, k: int) -> Fraction:
    """Mass share of the atom kept by the k-fold generation of the collection."""
    current: list = [atom]
    for _ in range(k):
        nxt: list = []
        for r in current:
            nxt.extend(first_generation(coll, r))
        current = nxt
        if not current:
            return Fraction(0)
    return union_mass(coll.tree, current) / atom.p


def construct_protohaar(
    tree: FiltrationTree,
    atom: Atom,
    eps: Fraction,
    k: int | None = None,
    collection: AtomCollection | None = None,
) -> ProtoHaar:
    eps = Fraction(eps)
    if not 0 < eps < Fraction(1, 2):
        raise ValueError("eps must lie in (0, 1/2)")
    if k is None:
        k = default_steps(eps)
    if Fraction(1, 1 << k) >= eps:
        raise ValueError(f"k={k} too small for eps={eps}: need 2^-k < eps")
    if collection is None:
        collection = light_children(tree)
    share = covering_share(collection, atom, k)
    if share <= 1 - eps / 2:
        raise ValueError(
            f"covering precondition fails on {atom.path_str()}: "
            f"generation {k} keeps {share}, needs more than {1 - eps / 2}"
        )

    half = atom.p / 2
    plus_parts: list[list[Member]] = []
    minus_parts: list[list[Member]] = []
    y_seq: list[Atom | Region] = []
    steps: list[StepRecord] = []
    u_mass = Fraction(0)

    current: Atom | Region = atom
    tau = k
    truncated = False

    for m in range(k):
        gen = first_generation(collection, current)
        total = sum((b.p for b in gen), Fraction(0))
        if u_mass + total > half:
            # the half mark is reachable: split around the crossing member
            cum = u_mass
            pos: list[Member] = []
            cross = None
            neg: list[Member] = []
            for b in gen:
                if cross is None:
                    if cum + b.p >= half:
                        cross = b
                    else:
                        cum += b.p
                        pos.append(b)
                else:
                    neg.append(b)
            assert cross is not None
            plus_parts.append(pos)
            minus_parts.append(neg)
            y_seq.append(cross)
            steps.append(
                StepRecord(
                    index=m + 1,
                    branch="crossing",
                    region_level=getattr(current, "level", atom.level),
                    available=len(gen),
                    available_mass=total,
                    plus_added=cum - u_mass,
                    minus_added=sum((b.p for b in neg), Fraction(0)),
                )
            )
            u_mass = cum
            current = cross
        else:
            # short of the half mark: promote a minimal prefix, keep the rest
            target = total - (eps / 2) * atom.p
            cum = Fraction(0)
            pos = []
            for b in gen:
                if cum > target:
                    break
                cum += b.p
                pos.append(b)
            note = "no members available" if not gen else ""
            region = _carve(tree, current, pos)
            plus_parts.append(pos)
            minus_parts.append([])
            y_seq.append(region)
            steps.append(
                StepRecord(
                    index=m + 1,
                    branch="truncation",
                    region_level=getattr(current, "level", atom.level),
                    available=len(gen),
                    available_mass=total,
                    plus_added=cum,
                    minus_added=Fraction(0),
                    note=note,
                )
            )
            u_mass += cum
            tau = m + 1
            truncated = True
            current = region
            break

    y_final = y_seq[-1]
    y_mass = y_final.p
    v_mass = sum(
        (b.p for part in minus_parts for b in part), Fraction(0)
    )
    # the residual (final region plus every spine bottom shed on the way)
    # carries the constant that makes the integral vanish
    residual_mass = atom.p - u_mass - v_mass
    c0 = (v_mass - u_mass) / residual_mass if residual_mass else Fraction(0)

    values = [Fraction(0)] * len(tree.leaves)
    for i in range(atom.lo, atom.hi):
        values[i] = c0
    for part in plus_parts:
        for b in part:
            for i in range(b.lo, b.hi):
                values[i] = Fraction(1)
    for part in minus_parts:
        for b in part:
            for i in range(b.lo, b.hi):
                values[i] = Fraction(-1)
    h = SimpleFunction(tree, values)

    return ProtoHaar(
        tree=tree,
        atom=atom,
        eps=eps,
        k=k,
        steps=steps,
        tau=tau,
        truncated=truncated,
        plus_parts=plus_parts,
        minus_parts=minus_parts,
        y_seq=y_seq,
        c0=c0,
        h=h,
        u_mass=u_mass,
        v_mass=v_mass,
        y_mass=y_mass,
        residual_mass=residual_mass,
    )


def _carve(tree: FiltrationTree, region: Atom | Region, removed: Sequence[Member]) -> Region:
    """Remove the members' intervals from the region, keeping what is left."""
    if isinstance(region, Region):
        base = list(region.intervals)
        level = region.level
    else:
        base = [(region.lo, region.hi)]
        level = region.level
    cut = sorted((b.lo, b.hi) for b in removed)
    out: list[tuple[int, int]] = []
    for lo, hi in base:
        cur = lo
        for clo, chi in cut:
            if chi <= cur or clo >= hi:
                continue
            if clo > cur:
                out.append((cur, clo))
            cur = max(cur, chi)
        if cur < hi:
            out.append((cur, hi))
    p = sum((tree.interval_mass(lo, hi) for lo, hi in out), Fraction(0))
    return Region(intervals=tuple(out), p=p, level=level)


# -- certificate ------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    ok: bool
    witness: str

    def __repr__(self) -> str:
        flag = "ok" if self.ok else "FAIL"
        return f"[{flag}] {self.name}: {self.witness}"


@dataclass
class ProtoHaarCertificate:
    checks: list[CheckResult]

    @property
    def all_ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def certify(ph: ProtoHaar) -> ProtoHaarCertificate:
    """Exact verification of the structural properties of a construction."""
    tree, a = ph.tree, ph.atom
    checks: list[CheckResult] = []

    # 1. structure: +-1 pieces disjoint and inside A; the rest of A carries
    #    the balancing constant; everything outside A is 0
    covered = [0] * len(tree.leaves)
    ok = True
    wit = "pieces disjoint, inside the atom, values as assigned"
    for part, val in ((ph.plus_parts, Fraction(1)), (ph.minus_parts, Fraction(-1))):
        for members in part:
            for b in members:
                if b.lo < a.lo or b.hi > a.hi:
                    ok, wit = False, f"member [{b.lo},{b.hi}) leaves the atom"
                for i in range(b.lo, b.hi):
                    covered[i] += 1
                    if ph.h.values[i][0] != val:
                        ok, wit = False, f"leaf {i} has {ph.h.values[i][0]}, wanted {val}"
    resid = Fraction(0)
    for i, c in enumerate(covered):
        inside = a.lo <= i < a.hi
        if c > 1:
            ok, wit = False, f"leaf {i} covered {c} times"
        if c == 1 and not inside:
            ok, wit = False, f"leaf {i} assigned outside the atom"
        if c == 0:
            expect = ph.c0 if inside else Fraction(0)
            if ph.h.values[i][0] != expect:
                ok, wit = False, f"leaf {i} has {ph.h.values[i][0]}, wanted {expect}"
            if inside:
                resid += tree.leaves[i].p
    if resid != ph.residual_mass:
        ok, wit = False, f"residual mass {resid} != recorded {ph.residual_mass}"
    checks.append(CheckResult("structure", ok, wit))

    # 2. exact zero mean
    integ = ph.h.integral()[0]
    checks.append(CheckResult("mean_zero", integ == 0, f"integral = {integ}"))

    # 3. amplitude of the final-region value
    checks.append(CheckResult("amplitude", abs(ph.c0) <= 1, f"c0 = {ph.c0}"))

    # 4. half-mass window: +1 mass and -1 mass each at most half of the atom,
    #    while +1 mass plus the final region reaches at least half
    half = a.p / 2
    ok4 = ph.u_mass <= half and ph.v_mass <= half and ph.u_mass + ph.y_mass >= half
    checks.append(
        CheckResult(
            "half_mass",
            ok4,
            f"plus={ph.u_mass}, minus={ph.v_mass}, final={ph.y_mass}, half={half}",
        )
    )

    # 5. the residual set is small (or absorbed into a full +-1 value)
    ok5 = ph.residual_mass <= ph.eps * a.p or abs(ph.c0) == 1
    checks.append(
        CheckResult(
            "residual",
            ok5,
            f"residual mass {ph.residual_mass} vs eps*P(A) = {ph.eps * a.p}",
        )
    )

    # 6. geometric decay of the refined regions along crossing steps
    ok6, wit6 = True, "P(Y_m) <= 2^-m P(A) at every crossing step"
    bound = a.p
    for m, yreg in enumerate(ph.y_seq, start=1):
        bound = bound / 2
        if isinstance(yreg, Region):
            prev = ph.y_seq[m - 2] if m >= 2 else a
            if yreg.p > prev.p:
                ok6, wit6 = False, f"truncated region grew at step {m}"
        elif yreg.p > bound:
            ok6, wit6 = False, f"step {m}: P(Y)={yreg.p} > {bound}"
    checks.append(CheckResult("stepwise_decay", ok6, wit6))

    # 7. summed bottom-level variation of the conditional expectations
    var = variation_sum(ph.h, scalar_space())
    checks.append(
        CheckResult("variation", var <= 6 * a.p, f"sum of diff L1 norms = {var}, cap = {6 * a.p}")
    )

    return ProtoHaarCertificate(checks)


def check_larcon(ph: ProtoHaar, eps_g: Fraction) -> bool:
    """Both full-sign sets carry at least (1/2 - eps_g) of the atom's mass."""
    eps_g = Fraction(eps_g)
    floor = (Fraction(1, 2) - eps_g) * ph.atom.p
    return ph.plus_mass >= floor and ph.minus_mass >= floor


def verify_monotone_projections(ph: ProtoHaar) -> list[str]:
    """Within each refinement round, along the ancestor chain of every +1
    member, the conditional expectations of the function never increase with
    depth until the member's own level, where the value is exactly one.

    Returns a list of human-readable violations (empty when the property
    holds).  Rounds whose region is a carved remainder are skipped: only
    rounds refining a genuine atom carry the ordered-prefix structure.
    """
    out: list[str] = []
    for j, part in enumerate(ph.plus_parts, start=1):
        region = ph.atom if j == 1 else ph.y_seq[j - 2]
        if isinstance(region, Region):
            break
        base = region.level
        for mem in part:
            if not isinstance(mem, Atom):
                continue
            # averages at levels base..mem.level-1 along the ancestor chain
            anc = mem.parent
            chain: list[Atom] = []
            while anc is not None and anc.level >= base:
                chain.append(anc)
                anc = anc.parent
            chain.reverse()
            if not chain or chain[0].lo > mem.lo or chain[0].hi < mem.hi:
                out.append(f"round {j}: member {mem!r} not inside its region")
                continue
            avgs = [average(ph.h, c)[0] for c in chain]
            for i in range(len(avgs) - 1):
                if avgs[i] < avgs[i + 1]:
                    out.append(
                        f"round {j}, member {mem.path_str()}: projection rose "
                        f"from level {chain[i].level} to {chain[i + 1].level} "
                        f"({avgs[i]} -> {avgs[i + 1]})"
                    )
            if any(ph.h.values[i][0] != 1 for i in range(mem.lo, mem.hi)):
                out.append(f"round {j}: member {mem.path_str()} is not constant one")
    return out


def spine_partition_identity(ph: ProtoHaar, j: int) -> bool:
    """For a crossing round j, the heaviest-child chain atom one level above
    the round's kept member is exactly: the +1 members of that round at the
    member's level, the kept member, the -1 members of the round, and the
    single bottom atom at the end of the heaviest-child chain."""
    if not 1 <= j <= ph.tau:
        raise ValueError("round out of range")
    kept = ph.y_seq[j - 1]
    if isinstance(kept, Region):
        raise ValueError("round ended in truncation")
    region = ph.atom if j == 1 else ph.y_seq[j - 2]
    p = kept.level
    # heaviest-child chain atom of the region at level p-1
    spine = region
    while spine.level < p - 1:
        spine = spine.first_child
    # bottom of the heaviest-child chain of the region
    tip = region
    while not tip.is_leaf:
        tip = tip.first_child
    want = set(range(spine.lo, spine.hi))
    got: set[int] = set(range(kept.lo, kept.hi))
    got.update(range(tip.lo, tip.hi))
    for mem in ph.plus_parts[j - 1]:
        if mem.level == p:
            got.update(range(mem.lo, mem.hi))
    for mem in ph.minus_parts[j - 1]:
        got.update(range(mem.lo, mem.hi))
    return got == want
