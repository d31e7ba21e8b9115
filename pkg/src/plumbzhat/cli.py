"""Command line front end.

Exit codes: 0 success, 1 mathematical failure (not negative definite,
identity mismatch), 2 usage or parse error.
"""

from __future__ import annotations

import sys
from fractions import Fraction

import click

from . import dagcat, graphio, kgroup
from .plumbing import (
    NotNegativeDefiniteError,
    bareiss_determinant,
    is_negative_definite,
    theta_form,
)
from .qseries import equal_to_order
from .treenest import default_parameter_structure, zhat_nested
from .zhat import zhat_bosonic


def _load(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    try:
        return graphio.parse_plumbing(text)
    except graphio.PlumbingParseError as exc:
        click.echo(f"parse error: {exc}", err=True)
        sys.exit(2)


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise click.UsageError(f"bad rational number {text!r}")


@click.group()
def main():
    """Exact series invariants of negative definite plumbed trees."""


@main.command()
@click.argument("input_path", metavar="FILE")
def check(input_path):
    """Validate a plumbing file and report its structure."""
    pg = _load(input_path)
    tree = pg.tree
    leaves, mids, nodes = tree.degree_partition()
    w = pg.linking_matrix()
    nd = is_negative_definite(w)
    click.echo(f"vertices: {len(tree.vertices)}")
    click.echo(f"edges: {len(tree.edges)}")
    click.echo(f"leaves: {' '.join(sorted(leaves)) or '-'}")
    click.echo(f"degree-2: {' '.join(sorted(mids)) or '-'}")
    click.echo(f"nodes: {' '.join(sorted(nodes)) or '-'}")
    click.echo(f"centers: {' '.join(sorted(tree.centers()))}")
    if pg.rooting is not None:
        click.echo(f"root: {pg.rooting.root} "
                   f"(centered: {'yes' if pg.rooting.is_centered() else 'no'})")
    else:
        click.echo("root: none")
    click.echo(f"det W: {bareiss_determinant(w)}")
    click.echo(f"negative definite: {'yes' if nd else 'no'}")
    if nd and (len(tree.vertices) - len(leaves)) > 0:
        form = theta_form(pg)
        click.echo(f"S over {' '.join(form.vertices)}:")
        for row in form.matrix:
            click.echo("  " + " ".join(str(x) for x in row))
    if not nd:
        click.echo("diagnosis: some leading principal minor of -W is <= 0",
                   err=True)
        sys.exit(1)


def _nested_series(pg, order):
    rooting = pg.rooting
    if rooting is None:
        from .plumbing import RootedTree

        center = sorted(pg.tree.centers())[0]
        rooting = RootedTree(pg.tree, center)
    ps = default_parameter_structure(rooting)
    return zhat_nested(pg, ps, order)


@main.command()
@click.argument("input_path", metavar="FILE")
@click.option("--order", "-N", default="20", help="truncation order (rational)")
@click.option("--method", type=click.Choice(["direct", "nested", "both"]),
              default="direct")
@click.option("--format", "fmt", type=click.Choice(["json", "plain"]),
              default="json")
def zhat(input_path, order, method, fmt):
    """Compute the series of a plumbing file."""
    pg = _load(input_path)
    n = _fraction(order)

    def render(series):
        if fmt == "json":
            return graphio.serialize_series(series)
        return "\n".join(f"{c} q^{e}" for e, c in series.items_sorted()) or "0"

    try:
        if method == "direct":
            click.echo(render(zhat_bosonic(pg, n)))
        elif method == "nested":
            click.echo(render(_nested_series(pg, n)))
        else:
            direct = zhat_bosonic(pg, n)
            nested = _nested_series(pg, n)
            click.echo("direct: " + render(direct))
            click.echo("nested: " + render(nested))
            if not equal_to_order(direct, nested, n):
                click.echo("MISMATCH between the two computation paths", err=True)
                sys.exit(1)
            click.echo("paths agree")
    except (NotNegativeDefiniteError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


_STAR_CASES = [(w, m, 14 if m == 3 else 20)
               for w in "+-" for m in (1, 2, 3)]
_TREE_CASES = [(1,), (2,), (1, 1), (2, 1), (2, 2), (1, 1, 1)]


@main.command()
@click.option("--suite", type=click.Choice(["star", "tree", "felder", "defrag", "all"]),
              default="all")
@click.option("--m", "m_cap", type=int, default=None,
              help="override the number of recursion coordinates")
@click.option("--n", "--N", "depth_cap", type=int, default=None,
              help="override the depth bound")
def verify(suite, m_cap, depth_cap):
    """Run the character identity suites; prints one line per case."""
    failures = 0

    def report(ok, label):
        nonlocal failures
        click.echo(f"{'PASS' if ok else 'FAIL'} {label}")
        failures += 0 if ok else 1

    if suite in ("star", "all"):
        cases = _STAR_CASES if m_cap is None else [
            (w, m_cap, depth_cap or 20) for w in "+-"]
        for word, m, depth in cases:
            depth = depth_cap or depth
            lam = dagcat.Bits.from_word(word)
            ok = kgroup.verify_star_identity(lam, m, depth)
            report(ok, f"star lambda={word} m={m} N={depth}")
    if suite in ("tree", "all"):
        for shape in _TREE_CASES:
            if m_cap is not None and max(shape) > m_cap:
                continue
            depth = depth_cap or 14
            m_vec = {f"v{i}": m for i, m in enumerate(shape)}
            ok = kgroup.verify_tree_identity(m_vec, depth)
            report(ok, f"tree m={','.join(map(str, shape))} N={depth}")
    if suite in ("felder", "all"):
        depth = depth_cap or 16
        for word in "+-":
            lam = dagcat.Bits.from_word(word)
            lo = -6 if (6 - lam.weight) % 2 == 0 else -5
            hi = 6 if (6 - lam.weight) % 2 == 0 else 5
            ok = kgroup.verify_felder(lam, lo, hi, depth)
            report(ok, f"felder lambda={word} window=[{lo},{hi}] N={depth}")
    if suite in ("defrag", "all"):
        depth = depth_cap or 12
        top = m_cap or 3
        for m in range(1, top + 1):
            for mask in range(1 << m):
                coords = [i + 1 for i in range(m) if mask >> i & 1]
                ok = kgroup.verify_defrag(m, coords, depth)
                label = "{" + ",".join(map(str, coords)) + "}"
                report(ok, f"defrag m={m} I={label} N={depth}")

    if failures:
        click.echo(f"{failures} case(s) failed", err=True)
        sys.exit(1)
    click.echo("all cases passed")


def _parse_dag_spec(spec: str):
    tokens = spec.split()
    if not tokens:
        raise click.UsageError("empty dag spec")
    name, args = tokens[0], {}
    for tok in tokens[1:]:
        key, _, value = tok.partition("=")
        if not value:
            raise click.UsageError(f"bad spec token {tok!r}")
        args[key] = value

    def bits_arg():
        raw = args.get("bits", args.get("lambda", args.get("λ")))
        if raw is None:
            raise click.UsageError("fragment needs bits=<word of + and ->")
        return dagcat.Bits.from_word(raw)

    if name == "hypercube":
        m = int(args.get("m", "1"))
        return dagcat.hypercube(dagcat.all_bits(m), dagcat.all_bits(m))
    if name == "fragment":
        word = bits_arg()
        depth = int(args.get("depth", "6"))
        base = dagcat.chain(depth + 2 * len(word))
        return dagcat.fragment_left(base, word, depth)
    if name == "product":
        m = int(args.get("m", "1"))
        n = int(args.get("n", "1"))
        return dagcat.product(
            dagcat.hypercube(dagcat.all_bits(m), dagcat.all_bits(m)),
            dagcat.hypercube(dagcat.all_bits(n), dagcat.all_bits(n)),
        )
    raise click.UsageError(f"unknown constructor {name!r}")


@main.command()
@click.option("--spec", required=True,
              help='e.g. "hypercube m=1", "fragment bits=+ depth=6", "product m=1 n=1"')
@click.option("--out", "out_path", required=True, type=click.Path())
def dag(spec, out_path):
    """Construct a colored DAG and write it as DOT."""
    built = _parse_dag_spec(spec)
    text = graphio.emit_dot(built)
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(text)
    click.echo(f"wrote {out_path} ({built.node_count()} nodes, "
               f"{built.edge_count()} edges)")


if __name__ == "__main__":
    main()
