"""Independent combinatorial oracles for decorated trees."""
import itertools
from fractions import Fraction

from hybridwc.graphs import DecoratedTree


def prufer_edges(seq, V):
    """Edge list of the labelled tree with Pruefer sequence seq."""
    degree = [1] * V
    for x in seq:
        degree[x] += 1
    edges = []
    for x in seq:
        leaf = min(i for i in range(V) if degree[i] == 1)
        edges.append((leaf, x))
        degree[leaf] -= 1
        degree[x] -= 1
    u, w = [i for i in range(V) if degree[i] == 1]
    edges.append((u, w))
    return edges


def labelled_objects(n, beta, p, V, sectors):
    """Every labelled decorated tree on vertex set {0..V-1} with the given mark sectors."""
    N = p.num_polys
    shapes = [[]] if V == 1 else [prufer_edges(s, V) for s in itertools.product(range(V), repeat=V - 2)]
    if V == 2:
        shapes = [[(0, 1)]]
    for ends in shapes:
        for js in itertools.product(range(1, N + 1), repeat=V):
            if any(js[a] == js[b] for a, b in ends):
                continue
            for split in _splits(beta - len(ends), V + len(ends)):
                betas = split[:V]
                edges = [(a, b, 1 + x) for (a, b), x in zip(ends, split[V:])]
                for marks in itertools.product(range(V), repeat=n):
                    tree = DecoratedTree.build(js, betas, edges, marks, sectors, p, validate=False)
                    if tree.is_valid() and all(k is not None for k in tree.kinds(p)):
                        key = (js, betas, frozenset((frozenset((a, b)), be) for a, b, be in edges), marks)
                        yield key, tree


def _splits(total, parts):
    if total < 0:
        return
    for cut in itertools.combinations(range(total + parts - 1), parts - 1):
        prev, out = -1, []
        for c in cut + (total + parts - 1,):
            out.append(c - prev - 1)
            prev = c
        yield tuple(out)


def orbit_counts(n, beta, p, V, sectors):
    """Map canonical code -> number of distinct labelled representatives."""
    seen = {}
    for key, tree in labelled_objects(n, beta, p, V, sectors):
        seen.setdefault(tree.canonical_code(), set()).add(key)
    return {code: len(keys) for code, keys in seen.items()}


def selection_rule_holds(tree_json, d) -> bool:
    """Re-check the vertex and edge rules from the serialized form alone."""
    verts, edges = tree_json["vertices"], tree_json["edges"]
    flags = {(f["vertex"], f["edge"]): Fraction(f["sector"], d) for f in tree_json["flags"]}
    marks = tree_json["marks"]
    for e, edge in enumerate(edges):
        a, b = edge["ends"]
        if (Fraction(edge["beta"], d) - flags[(a, e)] - flags[(b, e)]).denominator != 1:
            return False
    for v, vert in enumerate(verts):
        inc = [e for e, edge in enumerate(edges) if v in edge["ends"]]
        here = [mk for mk in marks if mk["vertex"] == v]
        val = len(inc) + len(here)
        total = Fraction(-vert["beta"] + val - 2, d) - sum(flags[(v, e)] for e in inc)
        total -= sum(Fraction(mk["sector"], d) for mk in here)
        if total.denominator != 1:
            return False
    return True
