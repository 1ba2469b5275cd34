"""Enumerative invariant classes of semistable quiver moduli.

For an acyclic quiver q, a weak stability condition tau, and a nonzero
effective dimension vector d, invariant(q, tau, d) is a class of the
rigidified moduli stack in homological degree 2 - 2 euler_form(q, d, d)
(the zero class when that is negative).  The algorithm:

  1. fix an increasing reference slope (values grow along every edge);
     against it the invariant of a unit vector is the unit class and
     every other invariant vanishes;
  2. enumerate the ordered tuples of unit vectors summing to d and form
     the free word sum with u_coeff(tuple; reference, tau) weights;
  3. normalize the sum to iterated bracket words (Dynkin projection,
     which also certifies that the sum is a Lie element);
  4. evaluate each bracket word with lie_bracket on unit classes and add
     up.

The result does not depend on the chosen increasing reference slope;
this is a theorem, and the optional reference argument exists so the
property can be tested rather than assumed.

wallcross_transform expresses the same classes at a new stability
condition as bracket words of the classes at an old one, with
u-coefficients for the pair of conditions; the transform of a full
invariant table must agree with direct computation.

induced_pl_map is the map of rigidified homology attached to a quiver
morphism: cap with the Euler class of the correction bundle, then push
forward.  It is a morphism of graded Lie algebras, and the factorial
identity checked by check_morphism_identity says

    prod_v d(v)! * induced_pl_map(invariant at pulled-back tau)
        = prod_v' d'(v')! * invariant on the target at tau.

pair_invariant_check verifies the framed-moduli identity: on the quiver
framed by one extra vertex with framing[v] edges to each v, the
invariant of (d, 1) at a slope perturbed upward equals

    sum over decompositions d = d_1 + ... + d_n, all slope(d_i) =
    slope(d), of (-1)^n / n! [[...[unit at (0,1), i(inv d_1)], ...],
    i(inv d_n)]

with i the inclusion pushforward, and the bracket with the framing unit
is injective on the computed classes when every framing multiplicity is
positive.

Computed classes can persist in a content-addressed disk cache keyed by
(quiver, stability token, d); cache writes are atomic and idempotent,
reads verify the stored canonical coordinates against the stored
representative.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from math import factorial
from pathlib import Path
from typing import Mapping

from sympy.utilities.iterables import multiset_permutations

from .charclass import (
    ChernRing,
    correction_top_class,
    monomial_string,
    parse_monomial_string,
)
from .quiver import (
    DimVector,
    Quiver,
    QuiverMorphism,
    all_decompositions,
    euler_form,
    frame_quiver,
    subvectors,
    unit_vector,
)
from .stability import (
    SlopeStability,
    WeakStability,
    fraction_str,
    framed_slope,
    is_increasing,
    parse_fraction,
    pullback_stability,
    reference_increasing_slope,
    slope_stability,
)
from .vertexalg import (
    HClass,
    PlClass,
    canonical_coordinates,
    cap,
    lie_bracket,
    merge_pushforward,
    pl_equal,
    pl_is_zero,
    unit_pl,
    zero_class,
    zero_pl,
)
from .wallcoeff import LieWord, lie_normalize, u_coeff

DEFAULT_MAX_SIZE = 8


def natural_degree(q: Quiver, d: DimVector) -> int:
    """Representative degree of an invariant class of dimension vector d."""
    return 2 - 2 * euler_form(q, d, d)


def _check_class(q: Quiver, d) -> DimVector:
    d = q.check_dimvec(DimVector(d))
    if d.is_zero():
        raise ValueError("invariant classes are defined for nonzero vectors only")
    if not d.is_effective():
        raise ValueError(f"dimension vector must be effective, got {d!r}")
    return d


def _check_size(d: DimVector, max_size: int) -> None:
    if d.total() > max_size:
        raise ValueError(
            f"|d| = {d.total()} exceeds the size cap {max_size};"
            " pass a larger max_size to compute anyway"
        )


# bracket words of unit classes recur across invariants of nearby classes,
# so evaluated prefixes are memoized per quiver
_WORD_MEMO: dict[tuple, PlClass] = {}


def _unit_word_class(q: Quiver, letters: tuple[str, ...]) -> PlClass:
    key = (q.key(), letters)
    hit = _WORD_MEMO.get(key)
    if hit is not None:
        return hit
    if len(letters) == 1:
        cls = unit_pl(q, unit_vector(letters[0]))
    else:
        prefix = _unit_word_class(q, letters[:-1])
        cls = lie_bracket(prefix, unit_pl(q, unit_vector(letters[-1])))
    _WORD_MEMO[key] = cls
    return cls


def _word_vertices(lw: LieWord) -> tuple[str, ...]:
    out = []
    for letter in lw.letters:
        v = letter.as_unit()
        if v is None:
            raise ValueError(f"expected a unit-vector letter, got {letter!r}")
        out.append(v)
    return tuple(out)


def _eval_unit_word_payload(payload: tuple) -> tuple[int, list]:
    """Worker for parallel word evaluation; JSON-flat in and out."""
    quiver_json, letters = payload
    q = Quiver.from_json(quiver_json)
    rep = _unit_word_class(q, tuple(letters)).rep
    items = sorted(rep.functional.items())
    return rep.degree, [[monomial_string(m), fraction_str(c)] for m, c in items]


def invariant_increasing(q: Quiver, mu: WeakStability, d) -> PlClass:
    """Invariant class for an increasing slope: unit for unit vectors, else 0."""
    d = _check_class(q, d)
    if not is_increasing(q, mu):
        raise ValueError("stability condition is not increasing on this quiver")
    if d.as_unit() is not None:
        return unit_pl(q, d)
    return zero_pl(q, d, natural_degree(q, d))


def invariant(
    q: Quiver,
    tau: WeakStability,
    d,
    *,
    reference: WeakStability | None = None,
    cache: "CacheStore | None" = None,
    jobs: int = 1,
    max_size: int = DEFAULT_MAX_SIZE,
) -> PlClass:
    """Invariant class of the semistable moduli of class d at tau.

    reference overrides the increasing slope the word sum is built from;
    any increasing slope gives the same class.
    """
    d = _check_class(q, d)
    _check_size(d, max_size)
    q.topological_order()  # CycleError when no increasing slope exists
    if reference is None:
        reference = reference_increasing_slope(q)
    elif not is_increasing(q, reference):
        raise ValueError("reference stability condition must be increasing")

    if cache is not None:
        hit = cache.get(q, tau, d)
        if hit is not None:
            return hit

    degree = natural_degree(q, d)
    letters = [v for v, n in d.items() for _ in range(n)]
    words: dict[tuple, Fraction] = {}
    for perm in multiset_permutations(letters):
        tup = tuple(unit_vector(v) for v in perm)
        c = u_coeff(tup, reference, tau)
        if c:
            words[tup] = c

    acc = zero_class(q, (d,), degree)
    if words:
        lie_words = lie_normalize(words)
        if jobs > 1 and len(lie_words) > 1:
            qjson = q.to_json()
            payloads = [(qjson, list(_word_vertices(lw))) for lw in lie_words]
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_eval_unit_word_payload, payloads))
            ring = ChernRing((d,))
            for lw, (deg, items) in zip(lie_words, results):
                functional = {
                    parse_monomial_string(s, ring): parse_fraction(c) for s, c in items
                }
                acc = acc + HClass(q, ring, deg, functional).scale(lw.coefficient)
        else:
            for lw in lie_words:
                rep = _unit_word_class(q, _word_vertices(lw)).rep
                acc = acc + rep.scale(lw.coefficient)
    result = PlClass(acc)

    if cache is not None:
        cache.put(q, tau, d, result)
    return result


class InvariantTable:
    """Computed invariant classes at one stability condition."""

    def __init__(self, quiver: Quiver, stability: WeakStability, classes: Mapping[DimVector, PlClass]):
        self.quiver = quiver
        self.stability = stability
        self.classes: dict[DimVector, PlClass] = dict(classes)

    @property
    def token(self) -> tuple:
        return self.stability.token

    def __contains__(self, d: DimVector) -> bool:
        return DimVector(d) in self.classes

    def __getitem__(self, d: DimVector) -> PlClass:
        try:
            return self.classes[DimVector(d)]
        except KeyError:
            raise ValueError(f"missing table entry for {DimVector(d)!r}") from None

    def items(self):
        return sorted(self.classes.items(), key=lambda kv: kv[0].sort_key())


def build_invariant_table(
    q: Quiver,
    tau: WeakStability,
    d,
    *,
    cache: "CacheStore | None" = None,
    jobs: int = 1,
    max_size: int = DEFAULT_MAX_SIZE,
) -> InvariantTable:
    """Invariants at tau for every nonzero e <= d componentwise."""
    d = _check_class(q, d)
    _check_size(d, max_size)
    classes = {
        e: invariant(q, tau, e, cache=cache, jobs=jobs, max_size=max_size)
        for e in subvectors(d)
    }
    return InvariantTable(q, tau, classes)


def wallcross_transform(
    q: Quiver,
    table: InvariantTable,
    to_stab: WeakStability,
    d,
    *,
    max_size: int = DEFAULT_MAX_SIZE,
) -> PlClass:
    """Invariant at to_stab as a bracket sum of table classes.

    The sum runs over ordered decompositions of d weighted by the
    u-coefficients of the pair (table condition, to_stab); the result
    must agree with the directly computed invariant at to_stab.
    """
    d = _check_class(q, d)
    _check_size(d, max_size)
    if table.quiver != q:
        raise ValueError("table belongs to a different quiver")

    words: dict[tuple, Fraction] = {}
    for parts in all_decompositions(d):
        c = u_coeff(parts, table.stability, to_stab)
        if c:
            words[parts] = c

    degree = natural_degree(q, d)
    acc = zero_class(q, (d,), degree)
    if words:
        for lw in lie_normalize(words):
            cls = table[lw.letters[0]]
            for letter in lw.letters[1:]:
                cls = lie_bracket(cls, table[letter])
            acc = acc + cls.rep.scale(lw.coefficient)
    return PlClass(acc)


def check_wallcross(
    q: Quiver,
    from_stab: WeakStability,
    to_stab: WeakStability,
    d,
    *,
    cache: "CacheStore | None" = None,
    jobs: int = 1,
    max_size: int = DEFAULT_MAX_SIZE,
) -> bool:
    """Transformed invariants agree with directly computed ones."""
    d = _check_class(q, d)
    table = build_invariant_table(q, from_stab, d, cache=cache, jobs=jobs, max_size=max_size)
    lhs = wallcross_transform(q, table, to_stab, d, max_size=max_size)
    rhs = invariant(q, to_stab, d, cache=cache, jobs=jobs, max_size=max_size)
    return pl_equal(lhs, rhs)


def induced_pl_map(lam: QuiverMorphism, x: PlClass) -> PlClass:
    """Map of rigidified homology induced by a quiver morphism.

    Cap with the Euler class of the correction bundle, then push the
    functional forward along the induced map of stacks.  Preserves the
    shifted degree: the representative degree drops by twice the
    correction_form of the class with itself.
    """
    if x.quiver != lam.source:
        raise ValueError("class does not live on the morphism source")
    d = x.dimvec
    if lam.pushforward(d).is_zero():
        raise ValueError("pushforward dimension vector is zero")
    capped = cap(x.rep, correction_top_class(lam, x.rep.ring))
    return PlClass(merge_pushforward(lam, capped))


def check_morphism_identity(
    lam: QuiverMorphism,
    tau_target: WeakStability,
    d,
    *,
    cache: "CacheStore | None" = None,
    jobs: int = 1,
    max_size: int = DEFAULT_MAX_SIZE,
) -> bool:
    """Factorial identity between invariants on the two ends of a morphism.

    With tau the pullback of tau_target,

        prod_v d(v)! * induced_pl_map(lam, invariant(source, tau, d))

    equals prod_v' d'(v')! * invariant(target, tau_target, d') for
    d' the pushforward of d.
    """
    d = _check_class(lam.source, d)
    tau = pullback_stability(lam, tau_target)
    x = invariant(lam.source, tau, d, cache=cache, jobs=jobs, max_size=max_size)
    lhs_factor = 1
    for _, n in d.items():
        lhs_factor *= factorial(n)
    lhs = induced_pl_map(lam, x).scale(lhs_factor)

    dprime = lam.pushforward(d)
    y = invariant(lam.target, tau_target, dprime, cache=cache, jobs=jobs, max_size=max_size)
    rhs_factor = 1
    for _, n in dprime.items():
        rhs_factor *= factorial(n)
    rhs = y.scale(rhs_factor)
    return pl_equal(lhs, rhs)


def pair_invariant_report(
    q: Quiver,
    mu,
    d,
    framing: Mapping[str, int],
    *,
    frame_vertex: str = "inf",
    cache: "CacheStore | None" = None,
    jobs: int = 1,
    max_size: int = DEFAULT_MAX_SIZE,
) -> dict:
    """Framed-moduli identity and leading-term injectivity, with details.

    mu is a slope condition on q (a SlopeStability or a vertex-to-rational
    mapping).  Every vertex needs framing multiplicity >= 1; otherwise the
    bracket with the framing unit is not injective and the check refuses
    to run.
    """
    d = _check_class(q, d)
    if not isinstance(mu, SlopeStability):
        mu = slope_stability(q, mu)
    for v in q.vertices:
        n = framing.get(v, 0)
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise ValueError(
                f"framing multiplicity at {v!r} must be a positive integer;"
                " the framing bracket is injective only then"
            )

    framed, inclusion = frame_quiver(q, framing, frame_vertex)
    dtil = d + unit_vector(frame_vertex)
    _check_size(dtil, max_size)
    perturbed = framed_slope(framed, mu.mu, d, +1, frame_vertex)

    lhs = invariant(framed, perturbed, dtil, cache=cache, jobs=jobs, max_size=max_size)

    mu_d = mu.value(d)
    parts_pool = [e for e in subvectors(d) if mu.value(e) == mu_d]
    embedded: dict[DimVector, PlClass] = {}
    for e in parts_pool:
        x = invariant(q, mu, e, cache=cache, jobs=jobs, max_size=max_size)
        embedded[e] = induced_pl_map(inclusion, x)

    unit_frame = unit_pl(framed, unit_vector(frame_vertex))
    acc = zero_class(framed, (dtil,), natural_degree(framed, dtil))
    for parts in all_decompositions(d):
        if any(p not in embedded for p in parts):
            continue
        n = len(parts)
        cls = unit_frame
        for p in parts:
            cls = lie_bracket(cls, embedded[p])
        acc = acc + cls.rep.scale(Fraction((-1) ** n, factorial(n)))
    rhs = PlClass(acc)

    equal = pl_equal(lhs, rhs)
    injective = True
    for e in parts_pool:
        if pl_is_zero(embedded[e]):
            continue
        if pl_is_zero(lie_bracket(embedded[e], unit_frame)):
            injective = False
            break

    return {
        "equal": equal,
        "injective": injective,
        "ok": equal and injective,
        "epsilon": perturbed.epsilon,
        "framed_slope": perturbed,
        "framed_quiver": framed,
        "framed_class": dtil,
        "lhs": lhs,
        "rhs": rhs,
    }


def pair_invariant_check(
    q: Quiver,
    mu,
    d,
    framing: Mapping[str, int],
    *,
    frame_vertex: str = "inf",
    cache: "CacheStore | None" = None,
    jobs: int = 1,
    max_size: int = DEFAULT_MAX_SIZE,
) -> bool:
    report = pair_invariant_report(
        q, mu, d, framing,
        frame_vertex=frame_vertex, cache=cache, jobs=jobs, max_size=max_size,
    )
    return report["ok"]


def pl_class_json(x: PlClass) -> dict:
    """Serializable form: dimension vector, degree, canonical coordinates."""
    canonical = [
        {"basis_index": k, "value": fraction_str(c)}
        for k, c in enumerate(canonical_coordinates(x))
        if c
    ]
    return {
        "dimvec": x.dimvec.to_json(),
        "degree": x.degree,
        "canonical": canonical,
        "basis": "weight0-rref-gradedlex-v1",
    }


def _representative_json(x: PlClass) -> dict[str, str]:
    return {
        monomial_string(m): fraction_str(c)
        for m, c in sorted(x.rep.functional.items())
    }


def _token_json(obj):
    if isinstance(obj, tuple):
        return [_token_json(x) for x in obj]
    if isinstance(obj, Fraction):
        return fraction_str(obj)
    if isinstance(obj, (str, int, bool)) or obj is None:
        return obj
    raise ValueError(f"stability token contains unserializable part {obj!r}")


_CACHE_FORMAT = "invariant-cache-v1"


class CacheStore:
    """Content-addressed store of invariant classes on disk.

    One JSON file per (quiver, stability token, dimension vector), named
    by the SHA-256 of the canonical key serialization.  Files carry the
    canonical coordinates plus the full representative so cached classes
    support every downstream operation; loads cross-check the two.
    """

    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, q: Quiver, stab: WeakStability, d: DimVector) -> Path:
        key = json.dumps(
            {
                "format": _CACHE_FORMAT,
                "quiver": q.to_json(),
                "stability": _token_json(stab.token),
                "dimvec": d.to_json(),
            },
            sort_keys=True,
            separators=(",", ":"),
        )
        return self.root / (hashlib.sha256(key.encode()).hexdigest() + ".json")

    def get(self, q: Quiver, stab: WeakStability, d: DimVector) -> PlClass | None:
        path = self._path(q, stab, d)
        if not path.exists():
            return None
        try:
            obj = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValueError(f"unreadable cache entry {path.name}: {exc}") from exc
        if obj.get("format") != _CACHE_FORMAT:
            raise ValueError(f"cache entry {path.name} has unknown format")
        ring = ChernRing((d,))
        functional = {
            parse_monomial_string(s, ring): parse_fraction(c)
            for s, c in obj["representative"].items()
        }
        cls = PlClass(HClass(q, ring, int(obj["degree"]), functional))
        if pl_class_json(cls)["canonical"] != obj["canonical"]:
            raise ValueError(
                f"cache entry {path.name} is corrupt:"
                " canonical coordinates do not match the representative"
            )
        return cls

    def put(self, q: Quiver, stab: WeakStability, d: DimVector, cls: PlClass) -> None:
        payload = pl_class_json(cls)
        payload["format"] = _CACHE_FORMAT
        payload["quiver"] = q.to_json()
        payload["stability"] = _token_json(stab.token)
        payload["representative"] = _representative_json(cls)
        text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        path = self._path(q, stab, d)
        fd, tmp = tempfile.mkstemp(dir=self.root, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as handle:
                handle.write(text)
            os.replace(tmp, path)  # atomic; concurrent writers agree byte for byte
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)


def _selftest_quivers() -> dict[str, Quiver]:
    return {
        "a2": Quiver(["v", "w"], [("e1", "v", "w")]),
        "k2": Quiver(["v", "w"], [("e1", "v", "w"), ("e2", "v", "w")]),
        "k3": Quiver(["v", "w"], [("e1", "v", "w"), ("e2", "v", "w"), ("e3", "v", "w")]),
    }


def selftest(max_size: int = 4, jobs: int = 1, cache: "CacheStore | None" = None) -> dict:
    """Property battery at a size budget; every check reports pass or fail."""
    qs = _selftest_quivers()
    checks: list[dict] = []

    def run(name: str, fn) -> None:
        try:
            ok = bool(fn())
        except Exception as exc:  # a crash is a failure, not an abort
            checks.append({"name": name, "ok": False, "error": f"{type(exc).__name__}: {exc}"})
            return
        checks.append({"name": name, "ok": ok})

    def base_case() -> bool:
        for q in (qs["a2"], qs["k2"]):
            mu = reference_increasing_slope(q)
            for d in subvectors(DimVector({"v": 2, "w": 2})):
                if d.total() > max_size:
                    continue
                got = invariant(q, mu, d, cache=cache, jobs=jobs, max_size=max_size)
                want = invariant_increasing(q, mu, d)
                if not pl_equal(got, want):
                    return False
        return True

    def kronecker_points() -> bool:
        if max_size < 2:
            return True
        from .charclass import Poly

        d = DimVector({"v": 1, "w": 1})
        for m in (1, 2, 3):
            q = Quiver(["v", "w"], [(f"e{i}", "v", "w") for i in range(1, m + 1)])
            hi = slope_stability(q, {"v": 1, "w": 0})
            cls = invariant(q, hi, d, cache=cache, jobs=jobs, max_size=max_size)
            ring = cls.rep.ring
            gens = Poly.generator(ring, (0, "w", 1)) - Poly.generator(ring, (0, "v", 1))
            probe = Poly.one(ring)
            for _ in range(m - 1):
                probe = probe * gens
            if cls.rep.pair(probe) != 1:
                return False
            lo = slope_stability(q, {"v": 0, "w": 1})
            if not pl_is_zero(invariant(q, lo, d, cache=cache, jobs=jobs, max_size=max_size)):
                return False
        return True

    def identity_transform() -> bool:
        q = qs["k2"]
        tau = slope_stability(q, {"v": 1, "w": 0})
        bound = min(max_size, 3)
        for d in subvectors(DimVector({"v": 2, "w": 2})):
            if d.total() > bound:
                continue
            table = build_invariant_table(q, tau, d, cache=cache, jobs=jobs, max_size=max_size)
            lhs = wallcross_transform(q, table, tau, d, max_size=max_size)
            if not pl_equal(lhs, table[d]):
                return False
        return True

    def wallcross_small() -> bool:
        if max_size < 2:
            return True
        q = qs["k3"]
        a = slope_stability(q, {"v": 1, "w": 0})
        b = slope_stability(q, {"v": 0, "w": 1})
        bound = min(max_size, 3)
        for d in subvectors(DimVector({"v": 2, "w": 2})):
            if d.total() > bound:
                continue
            if not check_wallcross(q, a, b, d, cache=cache, jobs=jobs, max_size=max_size):
                return False
        return True

    def dual_procedures() -> bool:
        q = qs["k2"]
        tau = slope_stability(q, {"v": 1, "w": 0})
        seen = []
        for d in subvectors(DimVector({"v": 2, "w": 1})):
            if d.total() > max_size:
                continue
            seen.append(invariant(q, tau, d, cache=cache, jobs=jobs, max_size=max_size))
        for x in seen:
            zero = zero_pl(x.quiver, x.dimvec, x.degree)
            if pl_is_zero(x) != (canonical_coordinates(x) == canonical_coordinates(zero)):
                return False
        return True

    def antisymmetry() -> bool:
        if max_size < 2:
            return True
        q = qs["k2"]
        x = unit_pl(q, unit_vector("v"))
        y = unit_pl(q, unit_vector("w"))
        return pl_equal(lie_bracket(x, y), lie_bracket(y, x).scale(-1))

    def morphism_edge_deletion() -> bool:
        if max_size < 2:
            return True
        from .quiver import edge_deletion_morphism

        q = qs["k2"]
        lam = edge_deletion_morphism(q, ["e2"])
        tau = slope_stability(lam.target, {"v": 1, "w": 0})
        return check_morphism_identity(
            lam, tau, DimVector({"v": 1, "w": 1}),
            cache=cache, jobs=jobs, max_size=max_size,
        )

    def pair_small() -> bool:
        if max_size < 3:
            return True
        q = qs["a2"]
        return pair_invariant_check(
            q, {"v": 1, "w": 0}, DimVector({"v": 1, "w": 1}), {"v": 1, "w": 1},
            cache=cache, jobs=jobs, max_size=max_size,
        )

    run("increasing-base-case", base_case)
    run("kronecker-point-classes", kronecker_points)
    run("identity-transform", identity_transform)
    run("wallcross-two-vertex", wallcross_small)
    run("dual-zero-procedures", dual_procedures)
    run("bracket-antisymmetry", antisymmetry)
    run("edge-deletion-identity", morphism_edge_deletion)
    run("framed-pair-identity", pair_small)

    return {"ok": all(c["ok"] for c in checks), "max_size": max_size, "checks": checks}
