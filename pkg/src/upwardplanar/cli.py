"""Command line interface: decide / oracle / fixed / feasible.

Graph files are UTF-8 edge lists ("tail head" per line, '#' comments) or a
DOT subset (digraph { a -> b; }). Reports are "key: value" lines, or JSON
with --json. Exit codes: 0 upward planar, 1 not upward planar, 2 error.
"""

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from . import oracle as oracle_mod
from .digraph import block_cut_tree, expand, validate_dag
from .embedding import PlanarEmbedding, fixed_embedding_test
from .errors import ParseError, UpwardPlanarityError
from .framework import (
    biconnected_feasible,
    decide_upward_planar,
    resolve_subprocedure,
    tau_window,
)
from .spqr import build_spqr


def parse_digraph_file(path):
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_digraph_text(text)


def parse_digraph_text(text):
    stripped = text.strip()
    if stripped.startswith("digraph"):
        return _parse_dot(stripped)
    edges = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected 'tail head', got {line!r}", lineno)
        edges.append((parts[0], parts[1]))
    try:
        return validate_dag(edges)
    except UpwardPlanarityError:
        raise


def _parse_dot(text):
    open_ix = text.index("{")
    close_ix = text.rindex("}")
    body = text[open_ix + 1:close_ix]
    edges = []
    for stmt in body.replace("\n", ";").split(";"):
        stmt = stmt.strip()
        if not stmt:
            continue
        if "->" not in stmt:
            raise ParseError(f"unsupported DOT statement {stmt!r}")
        chain = [t.strip() for t in stmt.split("->")]
        for a, b in zip(chain, chain[1:]):
            edges.append((a, b))
    return validate_dag(edges)


def parse_embedding_file(path, g):
    """Embedding format: 'rot <v> <n1> <n2> ...' lines (clockwise neighbor
    order) and one 'outer <v0> <v1> ... <v0>' line for the outer face walk."""
    rotation = {}
    outer = None
    eset = g.edge_set()

    def edge_between(v, w):
        if (v, w) in eset:
            return (v, w)
        if (w, v) in eset:
            return (w, v)
        raise ParseError(f"no edge between {v} and {w}")

    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] == "rot":
                v = parts[1]
                rotation[v] = [edge_between(v, w) for w in parts[2:]]
            elif parts[0] == "outer":
                walk = parts[1:]
                if len(walk) >= 2 and walk[0] == walk[-1]:
                    walk = walk[:-1]
                outer = walk
            else:
                raise ParseError(f"unknown directive {parts[0]!r}", lineno)
    if set(rotation) != set(g.vertices):
        missing = set(g.vertices) - set(rotation)
        raise ParseError(f"rotation missing for vertices {sorted(missing)}")
    emb = PlanarEmbedding(rotation)
    if outer is not None:
        emb.outer = emb.face_of_walk(outer)
    return emb


def format_report(pairs):
    return "".join(f"{k}: {v}\n" for k, v in pairs)


def parse_report(text):
    out = {}
    for line in text.splitlines():
        if ": " in line:
            k, v = line.split(": ", 1)
            out[k.strip()] = v.strip()
    return out


def _spqr_stats(g):
    eg = expand(g)
    counts = {"q": 0, "s": 0, "p": 0, "r": 0}
    if eg.m == 0:
        return counts
    bct = block_cut_tree(eg)
    for b in bct.blocks:
        tree = build_spqr(b, sorted(b.edges)[0])
        for n in tree.nodes():
            counts[n.kind.lower()] += 1
    return counts


def _decide_one(path, args):
    t0 = time.time()
    g = parse_digraph_file(path)
    dec = decide_upward_planar(
        g, subprocedure=args.subprocedure, tau_policy=args.tau_policy)
    wall = int((time.time() - t0) * 1000)
    counts = _spqr_stats(g)
    pairs = [
        ("file", path),
        ("verdict", "upward-planar" if dec.verdict else "not-upward-planar"),
        ("sources", dec.sigma),
        ("vertices", g.n),
        ("edges", g.m),
        ("blocks", dec.stats.get("blocks", 0)),
        ("cut-vertices", dec.stats.get("cut_vertices", 0)),
        ("spqr-q", counts["q"]),
        ("spqr-s", counts["s"]),
        ("spqr-p", counts["p"]),
        ("spqr-r", counts["r"]),
        ("backend", args.subprocedure),
        ("tau-policy", args.tau_policy),
        ("wall-ms", wall),
    ]
    witness_text = None
    if dec.verdict and args.witness:
        witness_text = _witness_text(g, dec, args)
    return dec.verdict, pairs, witness_text


def _witness_text(g, dec, args):
    eg = expand(g)
    lines = []
    if dec.rooting is None:
        return "trivial\n"
    root_bi, per_block = dec.rooting
    bct = block_cut_tree(eg)
    sub = resolve_subprocedure(args.subprocedure, dec.sigma)
    for bi in sorted(per_block):
        edge, shape = per_block[bi]
        block = bct.blocks[bi]
        lines.append(f"block {bi}{' (root)' if bi == root_bi else ''}")
        lines.append(f"root-edge {edge[0]} {edge[1]}")
        lines.append(f"root-shape {shape}")
        lo, hi = tau_window(block, args.tau_policy)
        fs, tree = biconnected_feasible(block, edge, sub, lo, hi, return_tree=True)
        for n in tree.nodes():
            chosen = min(n.feasible.shapes(), key=str) if n.feasible else None
            lines.append(f"node kind={n.kind} poles=({n.poles[0]},{n.poles[1]}) shape={chosen}")
            wit = n.note.get("tw_witnesses")
            if wit and chosen in wit:
                flip_index, alpha, beta = wit[chosen]
                lines.append(f"  tw-flip {flip_index}")
                for w, tgt in sorted(alpha.items()):
                    lines.append(f"  alpha {w} -> {tgt}")
                for ci, s in sorted(beta.items()):
                    lines.append(f"  beta slot{ci} -> {s}")
        if block.m <= oracle_mod.EDGE_GUARD:
            found = None
            for emb in oracle_mod.enumerate_embeddings(block):
                walk = emb.faces[emb.outer]
                k = len(walk)
                sides = {(walk[i], walk[(i + 1) % k]) for i in range(k)}
                if edge not in sides and (edge[1], edge[0]) not in sides:
                    continue
                asg = fixed_embedding_test(block, emb)
                if asg is not None:
                    found = (emb, asg)
                    break
            if found:
                emb, asg = found
                for v in sorted(emb.rotation):
                    nbrs = " ".join(e[1] if e[0] == v else e[0]
                                    for e in emb.rotation[v])
                    lines.append(f"rot {v} {nbrs}")
                outer_walk = emb.faces[emb.outer]
                lines.append("outer " + " ".join(outer_walk + [outer_walk[0]]))
                for (fi, i), val in sorted(asg.items()):
                    lines.append(f"angle {fi} {i} {val}")
        lines.append("")
    return "\n".join(lines)


def cmd_decide(args):
    files = args.files
    if args.jobs > 1 and len(files) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_decide_worker,
                                    [(f, _args_dict(args)) for f in files]))
    else:
        results = [_decide_worker((f, _args_dict(args))) for f in files]
    worst = 0
    for verdict, pairs, witness_text in results:
        _emit(pairs, args)
        if witness_text is not None and args.witness:
            with open(args.witness, "w", encoding="utf-8") as fh:
                fh.write(witness_text)
        worst = max(worst, 0 if verdict else 1)
    return worst


def _args_dict(args):
    return {
        "subprocedure": args.subprocedure,
        "tau_policy": args.tau_policy,
        "witness": args.witness,
        "json": args.json,
    }


def _decide_worker(item):
    path, d = item
    ns = argparse.Namespace(
        subprocedure=d["subprocedure"], tau_policy=d["tau_policy"],
        witness=d["witness"], json=d["json"])
    return _decide_one(path, ns)


def cmd_oracle(args):
    g = parse_digraph_file(args.file)
    verdict, witness = oracle_mod.brute_force_upward_planar(g)
    pairs = [
        ("file", args.file),
        ("verdict", "upward-planar" if verdict else "not-upward-planar"),
        ("method", "oracle"),
    ]
    _emit(pairs, args)
    if verdict and witness is not None:
        emb, asg = witness
        for v in sorted(emb.rotation):
            nbrs = " ".join(e[1] if e[0] == v else e[0] for e in emb.rotation[v])
            print(f"rot {v} {nbrs}")
        walk = emb.faces[emb.outer]
        print("outer " + " ".join(walk + [walk[0]]))
    return 0 if verdict else 1


def cmd_fixed(args):
    g = parse_digraph_file(args.graph)
    emb = parse_embedding_file(args.embedding, g)
    asg = fixed_embedding_test(g, emb)
    pairs = [
        ("file", args.graph),
        ("embedding", args.embedding),
        ("verdict", "upward-planar" if asg is not None else "not-upward-planar"),
        ("method", "fixed-embedding"),
    ]
    _emit(pairs, args)
    if asg is not None:
        for (fi, i), val in sorted(asg.items()):
            print(f"angle {fi} {i} {val}")
    return 0 if asg is not None else 1


def cmd_feasible(args):
    g = parse_digraph_file(args.file)
    eg = expand(g)
    if args.root:
        u, v = args.root.split(",")
        root_edge = (u, v) if (u, v) in eg.edge_set() else (v, u)
        if root_edge not in eg.edge_set():
            raise ParseError(f"root edge {args.root} not found (after expansion)")
    else:
        root_edge = sorted(eg.edges)[0]
    bct = block_cut_tree(eg)
    cands = [b for b in bct.blocks if root_edge in b.edge_set()]
    if not cands:
        raise ParseError("root edge not inside any block")
    block = cands[0]
    lo, hi = tau_window(block, args.tau_policy)
    sub = resolve_subprocedure(args.subprocedure, len(eg.sources()))
    fs, tree = biconnected_feasible(block, root_edge, sub, lo, hi, return_tree=True)
    print(f"block-of {root_edge[0]},{root_edge[1]} tau-range [{lo},{hi}]")

    def rec(node, depth):
        skel = ""
        if node.kind in ("S", "P", "R"):
            skel = " skeleton-edges=[" + ", ".join(f"({x},{y})" for x, y in node.skeleton) + "]"
        shapes = "{" + ", ".join(str(s) for s in node.feasible) + "}" if node.feasible is not None else "{}"
        print("  " * depth + f"node kind={node.kind} poles=({node.poles[0]},{node.poles[1]})"
              + skel + " feasible=" + shapes)
        for c in node.children:
            rec(c, depth + 1)

    rec(tree.root, 0)
    return 0 if fs else 1


def _emit(pairs, args):
    if getattr(args, "json", False):
        print(json.dumps(dict(pairs)))
    else:
        sys.stdout.write(format_report(pairs))


def build_parser():
    p = argparse.ArgumentParser(prog="upt", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("decide", help="decide upward planarity")
    d.add_argument("files", nargs="+")
    d.add_argument("--subprocedure", choices=["auto", "sources", "treewidth"],
                   default="auto")
    d.add_argument("--tau-policy", choices=["sources", "safe"], default="sources")
    d.add_argument("--witness", metavar="PATH")
    d.add_argument("--json", action="store_true")
    d.add_argument("--trace-flow", action="store_true")
    d.add_argument("--trace-dp", action="store_true")
    d.add_argument("--jobs", type=int, default=1)
    d.set_defaults(func=cmd_decide)

    o = sub.add_parser("oracle", help="brute-force decision (small graphs)")
    o.add_argument("file")
    o.add_argument("--json", action="store_true")
    o.set_defaults(func=cmd_oracle)

    f = sub.add_parser("fixed", help="test a prescribed embedding")
    f.add_argument("graph")
    f.add_argument("embedding")
    f.add_argument("--json", action="store_true")
    f.set_defaults(func=cmd_fixed)

    fe = sub.add_parser("feasible", help="dump the SPQR tree with feasible sets")
    fe.add_argument("file")
    fe.add_argument("--root", metavar="U,V")
    fe.add_argument("--subprocedure", choices=["auto", "sources", "treewidth"],
                    default="auto")
    fe.add_argument("--tau-policy", choices=["sources", "safe"], default="sources")
    fe.set_defaults(func=cmd_feasible)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "trace_flow", False):
        from . import rnode_flow
        rnode_flow.TRACE = sys.stderr
    if getattr(args, "trace_dp", False):
        from . import rnode_tw
        rnode_tw.TRACE = sys.stderr
    try:
        return args.func(args)
    except UpwardPlanarityError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
