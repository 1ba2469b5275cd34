"""Command line front end with deterministic JSON input and output.

All numbers cross the interface as exact rational strings; output objects
are serialized with fixed key order and separators, so identical inputs
give byte-identical output regardless of parallelism.

Exit codes: 0 success, 2 malformed input, 3 acyclicity violation,
4 failed check or internal assertion.  Failed checks still print their
report before exiting.  The invariant cache directory comes from --cache
or the QUIVERINV_CACHE environment variable.
"""

from __future__ import annotations

import json
import os
import sys

import click

from .invariants import (
    CacheStore,
    build_invariant_table,
    check_morphism_identity,
    invariant,
    pair_invariant_report,
    pl_class_json,
    selftest,
    wallcross_transform,
)
from .quiver import CycleError, DimVector, Quiver, QuiverMorphism, StructureError, all_decompositions
from .stability import fraction_str, slope_stability
from .vertexalg import pl_equal
from .wallcoeff import LieElementError, lie_normalize, s_coeff, u_coeff


def _echo(obj: dict) -> None:
    click.echo(json.dumps(obj, separators=(",", ":")))


def _load_json_file(path: str, what: str) -> object:
    try:
        with open(path, "r") as handle:
            return json.load(handle)
    except OSError as exc:
        raise ValueError(f"cannot read {what} file {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"{what} file {path!r} is not valid JSON: {exc}") from exc


def _parse_inline(text: str, what: str) -> object:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{what} is not valid JSON: {exc}") from exc


def _quiver_from(path: str) -> Quiver:
    return Quiver.from_json(_load_json_file(path, "quiver"))


def _dimvec_from(text: str) -> DimVector:
    return DimVector.from_json(_parse_inline(text, "dimension vector"))


def _slope_from(q: Quiver, text: str, what: str = "slope"):
    obj = _parse_inline(text, what)
    if not isinstance(obj, dict):
        raise ValueError(f"{what} must be a JSON object of vertex weights")
    return slope_stability(q, obj)


def _cache_from(path: str | None) -> CacheStore | None:
    path = path or os.environ.get("QUIVERINV_CACHE")
    return CacheStore(path) if path else None


quiver_option = click.option("--quiver", "quiver_path", required=True, metavar="FILE")
dimvec_option = click.option("--dimvec", required=True, metavar="JSON")
slope_option = click.option("--slope", required=True, metavar="JSON")
slope2_option = click.option("--slope2", required=True, metavar="JSON")
cache_option = click.option("--cache", "cache_path", default=None, metavar="DIR")
jobs_option = click.option("--jobs", default=1, show_default=True, metavar="N")
max_size_option = click.option("--max-size", "max_size", default=8, show_default=True, metavar="K")


@click.group()
def cli() -> None:
    """Exact invariant classes of quiver moduli and their wall-crossing."""


@cli.command()
@quiver_option
@dimvec_option
@click.option("--dimvec2", default=None, metavar="JSON", help="Second argument; defaults to --dimvec.")
def euler(quiver_path: str, dimvec: str, dimvec2: str | None) -> int:
    """Euler pairing, its symmetrization, and the sign twist."""
    from .quiver import euler_form, sign_epsilon, sym_euler_form

    q = _quiver_from(quiver_path)
    d = q.check_dimvec(_dimvec_from(dimvec))
    e = q.check_dimvec(_dimvec_from(dimvec2)) if dimvec2 else d
    _echo(
        {
            "chi_Q": str(euler_form(q, d, e)),
            "chi": str(sym_euler_form(q, d, e)),
            "epsilon": str(sign_epsilon(q, d, e)),
        }
    )
    return 0


@cli.command()
@quiver_option
@dimvec_option
@slope_option
@slope2_option
@max_size_option
def ucoeff(quiver_path: str, dimvec: str, slope: str, slope2: str, max_size: int) -> int:
    """Coefficient table over the ordered decompositions of a class.

    For each ordered decomposition of --dimvec, the sign coefficient and
    the transformation coefficient for the pair (--slope, --slope2), plus
    the bracket-word normalization of the whole weighted sum.
    """
    q = _quiver_from(quiver_path)
    d = q.check_dimvec(_dimvec_from(dimvec))
    if d.is_zero():
        raise ValueError("coefficients are defined for nonzero classes only")
    if d.total() > max_size:
        raise ValueError(f"|d| = {d.total()} exceeds the size cap {max_size}")
    from_stab = _slope_from(q, slope, "slope")
    to_stab = _slope_from(q, slope2, "slope2")

    entries = []
    words = {}
    for parts in all_decompositions(d):
        s = s_coeff(parts, from_stab, to_stab)
        u = u_coeff(parts, from_stab, to_stab)
        entries.append(
            {
                "tuple": [p.to_json() for p in parts],
                "S": str(s),
                "U": fraction_str(u),
            }
        )
        if u:
            words[parts] = u
    lie_words = [
        {"letters": [p.to_json() for p in lw.letters], "coefficient": fraction_str(lw.coefficient)}
        for lw in lie_normalize(words)
    ]
    _echo({"entries": entries, "lie_words": lie_words})
    return 0


@cli.command("invariant")
@quiver_option
@dimvec_option
@slope_option
@cache_option
@jobs_option
@max_size_option
def invariant_cmd(
    quiver_path: str, dimvec: str, slope: str, cache_path: str | None, jobs: int, max_size: int
) -> int:
    """Invariant class of the semistable moduli, as canonical coordinates."""
    q = _quiver_from(quiver_path)
    d = _dimvec_from(dimvec)
    tau = _slope_from(q, slope)
    cls = invariant(q, tau, d, cache=_cache_from(cache_path), jobs=jobs, max_size=max_size)
    _echo(pl_class_json(cls))
    return 0


@cli.command("wallcross-check")
@quiver_option
@dimvec_option
@slope_option
@slope2_option
@cache_option
@jobs_option
@max_size_option
def wallcross_check_cmd(
    quiver_path: str,
    dimvec: str,
    slope: str,
    slope2: str,
    cache_path: str | None,
    jobs: int,
    max_size: int,
) -> int:
    """Transform invariants from --slope to --slope2 and compare."""
    q = _quiver_from(quiver_path)
    d = _dimvec_from(dimvec)
    from_stab = _slope_from(q, slope, "slope")
    to_stab = _slope_from(q, slope2, "slope2")
    cache = _cache_from(cache_path)
    table = build_invariant_table(q, from_stab, d, cache=cache, jobs=jobs, max_size=max_size)
    lhs = wallcross_transform(q, table, to_stab, d, max_size=max_size)
    rhs = invariant(q, to_stab, d, cache=cache, jobs=jobs, max_size=max_size)
    equal = pl_equal(lhs, rhs)
    _echo(
        {
            "equal": equal,
            "dimvec": d.to_json(),
            "from": from_stab.to_json(),
            "to": to_stab.to_json(),
            "class": pl_class_json(rhs),
        }
    )
    return 0 if equal else 4


@cli.command("morphism-check")
@click.option("--morphism", "morphism_path", required=True, metavar="FILE")
@dimvec_option
@slope_option
@cache_option
@jobs_option
@max_size_option
def morphism_check_cmd(
    morphism_path: str, dimvec: str, slope: str, cache_path: str | None, jobs: int, max_size: int
) -> int:
    """Factorial identity for a quiver morphism; --slope lives on the target."""
    from math import factorial

    lam = QuiverMorphism.from_json(_load_json_file(morphism_path, "morphism"))
    d = lam.source.check_dimvec(_dimvec_from(dimvec))
    tau = _slope_from(lam.target, slope)
    equal = check_morphism_identity(
        lam, tau, d, cache=_cache_from(cache_path), jobs=jobs, max_size=max_size
    )
    dprime = lam.pushforward(d)
    source_factor = 1
    for _, n in d.items():
        source_factor *= factorial(n)
    target_factor = 1
    for _, n in dprime.items():
        target_factor *= factorial(n)
    _echo(
        {
            "equal": equal,
            "dimvec": d.to_json(),
            "pushforward": dprime.to_json(),
            "source_factor": str(source_factor),
            "target_factor": str(target_factor),
        }
    )
    return 0 if equal else 4


@cli.command("pair-check")
@quiver_option
@dimvec_option
@slope_option
@click.option("--framing", required=True, metavar="JSON")
@cache_option
@jobs_option
@max_size_option
def pair_check_cmd(
    quiver_path: str,
    dimvec: str,
    slope: str,
    framing: str,
    cache_path: str | None,
    jobs: int,
    max_size: int,
) -> int:
    """Framed-moduli identity and leading-term injectivity."""
    q = _quiver_from(quiver_path)
    d = _dimvec_from(dimvec)
    mu = _slope_from(q, slope)
    framing_obj = _parse_inline(framing, "framing")
    if not isinstance(framing_obj, dict):
        raise ValueError("framing must be a JSON object of vertex multiplicities")
    report = pair_invariant_report(
        q, mu, d, framing_obj, cache=_cache_from(cache_path), jobs=jobs, max_size=max_size
    )
    _echo(
        {
            "equal": report["equal"],
            "injective": report["injective"],
            "ok": report["ok"],
            "dimvec": d.to_json(),
            "framed_class": report["framed_class"].to_json(),
            "epsilon": fraction_str(report["epsilon"]),
            "framed_slope": report["framed_slope"].to_json(),
        }
    )
    return 0 if report["ok"] else 4


@cli.command("selftest")
@cache_option
@jobs_option
@click.option("--max-size", "max_size", default=4, show_default=True, metavar="K")
def selftest_cmd(cache_path: str | None, jobs: int, max_size: int) -> int:
    """Run the property battery at a size budget."""
    report = selftest(max_size=max_size, jobs=jobs, cache=_cache_from(cache_path))
    _echo(report)
    return 0 if report["ok"] else 4


def main(argv: list[str] | None = None) -> int:
    """Entry point with error-to-exit-code mapping; returns the exit code."""
    try:
        rv = cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        _echo({"error": exc.format_message(), "kind": "input"})
        return 2
    except click.ClickException as exc:
        _echo({"error": exc.format_message(), "kind": "input"})
        return 2
    except click.exceptions.Abort:
        _echo({"error": "aborted", "kind": "input"})
        return 2
    except CycleError as exc:
        _echo({"error": str(exc), "kind": "acyclicity"})
        return 3
    except StructureError as exc:
        _echo({"error": str(exc), "kind": "input"})
        return 2
    except (LieElementError, AssertionError) as exc:
        _echo({"error": str(exc), "kind": "internal"})
        return 4
    except (ValueError, KeyError) as exc:
        _echo({"error": str(exc), "kind": "input"})
        return 2
    return int(rv) if isinstance(rv, int) else 0


if __name__ == "__main__":
    sys.exit(main())
