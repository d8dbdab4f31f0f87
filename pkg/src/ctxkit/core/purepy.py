"""Pure-Python kernels.

Rows of a GF(2) matrix are Python ints used as bitsets: bit ``j`` is column ``j``.
"""


def rref(rows, ncols):
    """Reduced row echelon form of ``rows`` under ascending column order.

    Returns a list of ``(pivot_column, row)`` pairs sorted by pivot column.
    The result is unique for a given row space, so the pivoting strategy does
    not affect it.  ``ncols`` is accepted for signature parity with the
    compiled kernel.
    """
    piv = {}
    for row in rows:
        while row:
            low = (row & -row).bit_length() - 1
            p = piv.get(low)
            if p is None:
                piv[low] = row
                break
            row ^= p
    cols = sorted(piv)
    mask = 0
    for c in cols:
        mask |= 1 << c
    for c in reversed(cols):
        r = piv[c]
        own = 1 << c
        extra = (r & mask) ^ own
        while extra:
            r ^= piv[extra.bit_length() - 1]
            extra = (r & mask) ^ own
        piv[c] = r
    return [(c, piv[c]) for c in cols]


def search_family(order, allowed, links):
    """Backtracking search for compatible families over integer tables.

    ``order`` lists context indices in branching order; ``allowed[c]`` is the
    initial bitmask of admissible sections of context ``c``; ``links[c]`` is a
    list of ``(d, masks)`` where ``masks[p]`` is the bitmask of sections of
    ``d`` compatible with section ``p`` of ``c``.  Yields each family as a list
    of section indices indexed by context.
    """
    n = len(allowed)
    domains = list(allowed)
    choice = [-1] * n

    def rec(pos):
        if pos == len(order):
            yield list(choice)
            return
        c = order[pos]
        dom = domains[c]
        while dom:
            low = dom & -dom
            p = low.bit_length() - 1
            dom ^= low
            saved = []
            ok = True
            for d, masks in links[c]:
                if choice[d] >= 0:
                    continue
                new = domains[d] & masks[p]
                if new != domains[d]:
                    saved.append((d, domains[d]))
                    domains[d] = new
                    if not new:
                        ok = False
                        break
            if ok:
                choice[c] = p
                yield from rec(pos + 1)
                choice[c] = -1
            for d, old in reversed(saved):
                domains[d] = old

    return rec(0)
