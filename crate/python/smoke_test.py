"""Smoke test for the pgtower Python extension.

Build and install first:
    pip install --no-build-isolation ./crates/pgtower-py
"""

import itertools
import json
import sys

import pgtower


def check(cond, msg):
    if not cond:
        print(f"FAIL: {msg}")
        sys.exit(1)
    print(f"ok: {msg}")


def main():
    # Abelian group of type (9, 3): multiplication is vector addition with carries into the power generator.
    g = pgtower.PcGroup.abelian(3, [2, 1])
    check(g.order() == 27 and g.is_consistent(), "abelian group of order 27 is consistent")
    elems = list(itertools.product(range(3), repeat=g.ngens))

    def as_int(v):
        # generators a, a^3, b: value (a-part mod 9, b mod 3)
        return ((v[0] + 3 * v[1]) % 9, v[2] % 3)

    for x in elems:
        for y in elems:
            z = g.multiply(list(x), list(y))
            ax, bx = as_int(x)
            ay, by = as_int(y)
            check_ok = as_int(z) == ((ax + ay) % 9, (bx + by) % 3)
            if not check_ok:
                check(False, f"product {x}*{y}")
    check(True, "multiplication agrees with Z/9 x Z/3 arithmetic")
    for x in elems:
        inv = g.inverse(list(x))
        check_ok = g.multiply(list(x), inv) == [0, 0, 0]
        if not check_ok:
            check(False, f"inverse of {x}")
    check(True, "inverses")

    tree = pgtower.DescendantTree.build(pgtower.PcGroup.elementary_abelian(3, 2), 5)
    orders = [tree.node(l)["order_exponent"] for l in tree.labels()]
    check(orders.count(3) == 2 and orders.count(4) == 4, "descendants of C3 x C3: two of order 27, four of order 81")
    roots = [l for l in tree.labels() if tree.node(l)["order_exponent"] == 5 and tree.node(l)["coclass"] == 2]
    kappas = {tree.group(l).artin_pattern()[0] for l in roots}
    check(len(roots) == 7, "seven coclass-2 groups of order 3^5")
    check(len(kappas) == len(roots), "their kernel types are pairwise distinct")

    again = pgtower.DescendantTree.from_json(tree.to_json())
    check(again.labels() == tree.labels(), "JSON round trip keeps labels")
    check("digraph" in tree.to_dot(), "DOT export")

    c18 = pgtower.DescendantTree.pruned("c.18", 7)
    mainline = c18.mainline()
    check(c18.node(mainline[1])["mu"] == 4, "order 3^6 mainline vertex has relation rank 4")
    cov = c18.cover(mainline[1])
    check(len(cov["members"]) == 3, "cover of the order 3^6 mainline vertex has three members")
    cov0 = c18.cover(mainline[1], ctx="real-quadratic")
    check(len(cov0["members"]) == 2, "real-quadratic filter removes the anchor")

    rows = c18.identify("bundled/c18_ground")
    split = {}
    for r in rows:
        split.setdefault(r["record"]["item"], set()).add(tuple(r["result"]["matched_labels"]))
    check(all(len(v) == 1 for v in split.values()) and len(split) == 2, "ground-state fields split into two groups")
    check(sorted(sum(1 for r in rows if r["record"]["item"] == i) for i in (1, 2)) == [10, 18], "10/18 split")

    check(pgtower.shafarevich_bound("real-quadratic", 2) == (2, 3), "rank window for real quadratic fields")
    check(pgtower.gs_infinite_test(3, 2), "Golod-Shafarevich criterion")
    print(json.dumps({"vertices": len(tree), "c18": len(c18)}))


if __name__ == "__main__":
    main()
