"""Pure-Python oracle kernels.  ``_kernels.pyx`` mirrors these line for line."""


def partition_search(weights):
    """Gray-code walk over subsets containing item 0.

    ``weights`` are positive integers.  Returns the bitmask of the first
    balanced side found, or -1.
    """
    n = len(weights)
    w = [int(x) for x in weights]
    diff = w[0] - sum(w[1:])
    mask = 1
    if diff == 0:
        return mask
    for step in range(1, 1 << (n - 1)):
        # bit that flips between Gray codes step-1 and step
        j = (step & -step).bit_length()
        bit = 1 << j
        if mask & bit:
            diff -= 2 * w[j]
        else:
            diff += 2 * w[j]
        mask ^= bit
        if diff == 0:
            return mask
    return -1


def coloring_search(n, indptr, indices, k):
    """Backtracking in vertex order, colors in increasing order: the lexicographically first proper coloring.

    Only neighbours with a smaller index are checked.  Returns a list or None.
    """
    if n == 0:
        return []
    colors = [-1] * n
    v = 0
    while True:
        c = colors[v] + 1
        while c < k:
            ok = True
            for t in range(indptr[v], indptr[v + 1]):
                u = indices[t]
                if u < v and colors[u] == c:
                    ok = False
                    break
            if ok:
                break
            c += 1
        if c < k:
            colors[v] = c
            v += 1
            if v == n:
                return colors
        else:
            colors[v] = -1
            v -= 1
            if v < 0:
                return None


def one_in_k_search(n_vars, k, clause_vars, clause_signs, occ_ptr, occ_idx):
    """DFS from the last variable down, trying +1 before -1.

    The first hit minimises the integer whose bit ``v`` marks ``x_v = -1``.
    A clause is pruned once it has two false (-1) literals, or has none
    and no free variables.  Returns a list of +-1 or None.
    """
    m = len(clause_vars)
    neg = [0] * m
    free = [k] * m
    values = [0] * n_vars
    if n_vars == 0:
        return [] if m == 0 else None
    depth = 0
    while True:
        v = n_vars - 1 - depth
        # undo the previous value of v, if any
        prev = values[v]
        if prev != 0:
            for t in range(occ_ptr[v], occ_ptr[v + 1]):
                j = occ_idx[t]
                free[j] += 1
                for q in range(k):
                    if clause_vars[j][q] == v and prev * clause_signs[j][q] == -1:
                        neg[j] -= 1
        if prev == -1:
            values[v] = 0
            depth -= 1
            if depth < 0:
                return None
            continue
        val = 1 if prev == 0 else -1
        values[v] = val
        ok = True
        for t in range(occ_ptr[v], occ_ptr[v + 1]):
            j = occ_idx[t]
            free[j] -= 1
            for q in range(k):
                if clause_vars[j][q] == v and val * clause_signs[j][q] == -1:
                    neg[j] += 1
            if neg[j] > 1 or (neg[j] == 0 and free[j] == 0):
                ok = False
        if ok:
            depth += 1
            if depth == n_vars:
                return values
