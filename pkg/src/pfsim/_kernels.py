# _kernels.py
"""Numba kernels: sweep dynamics and mask-enumeration inner loops.

All randomness inside kernels comes from an explicit splitmix64 stream so
trajectories are byte-identical across runs and platforms for a fixed seed.
"""

import numba
import numpy as np
from numba import njit

U64 = np.uint64
_GOLDEN = U64(0x9E3779B97F4A7C15)


@njit(cache=True, inline="always")
def _next_u64(state):
    state[0] += _GOLDEN
    z = state[0]
    z = (z ^ (z >> U64(30))) * U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> U64(27))) * U64(0x94D049BB133111EB)
    return z ^ (z >> U64(31))


@njit(cache=True, inline="always")
def _next_double(state):
    return (_next_u64(state) >> U64(11)) * 1.1102230246251565e-16  # 2^-53


@njit(cache=True)
def heat_bath_sweep(colors, interior_flat, nbr_flat, q, exp_beta_counts, state):
    """One deterministic-order heat-bath sweep; returns the energy change.

    colors: int8 flat grid (boundary colors in place); exp_beta_counts[c] =
    exp(beta*c) for c in 0..6.
    """
    n = interior_flat.shape[0]
    w = np.empty(q, dtype=np.float64)
    counts = np.empty(q, dtype=np.int64)
    de_total = 0
    for t in range(n):
        f = interior_flat[t]
        for a in range(q):
            counts[a] = 0
        for c in range(6):
            col = colors[nbr_flat[t, c]]
            counts[col - 1] += 1
        tot = 0.0
        for a in range(q):
            w[a] = exp_beta_counts[counts[a]]
            tot += w[a]
        u = _next_double(state) * tot
        acc = 0.0
        new = q - 1
        for a in range(q):
            acc += w[a]
            if u < acc:
                new = a
                break
        old = colors[f] - 1
        de_total += counts[old] - counts[new]
        colors[f] = new + 1
    return de_total


@njit(cache=True, inline="always")
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True, inline="always")
def _union(parent, size, a, b):
    ra = _find(parent, a)
    rb = _find(parent, b)
    if ra == rb:
        return
    # union by size, lowest index as root on ties
    if size[ra] < size[rb] or (size[ra] == size[rb] and rb < ra):
        ra, rb = rb, ra
    parent[rb] = ra
    size[ra] += size[rb]


@njit(cache=True)
def sw_sweep(colors, interior_flat, edge_u_flat, edge_v_flat, edge_node_u,
             edge_node_v, class_nodes, class_colors, p, q, state):
    """Frozen-boundary Swendsen-Wang sweep.

    Nodes: interior sites 0..N-1 followed by one node per wiring class.
    Opens each monochromatic edge with probability p, then recolors free
    clusters uniformly; clusters holding a class node keep its color.
    """
    n = interior_flat.shape[0]
    n_nodes = n + class_nodes.shape[0]
    parent = np.empty(n_nodes, dtype=np.int64)
    size = np.ones(n_nodes, dtype=np.int64)
    for t in range(n_nodes):
        parent[t] = t
    ne = edge_u_flat.shape[0]
    for e in range(ne):
        if colors[edge_u_flat[e]] == colors[edge_v_flat[e]]:
            if _next_double(state) < p:
                _union(parent, size, edge_node_u[e], edge_node_v[e])
    comp_color = np.zeros(n_nodes, dtype=np.int8)
    for c in range(class_nodes.shape[0]):
        comp_color[_find(parent, class_nodes[c])] = class_colors[c]
    for t in range(n):
        r = _find(parent, t)
        if comp_color[r] == 0:
            comp_color[r] = 1 + int(_next_double(state) * q)
        colors[interior_flat[t]] = comp_color[r]


@njit(cache=True)
def energy_of(colors, edge_u_flat, edge_v_flat):
    e = 0
    for t in range(edge_u_flat.shape[0]):
        if colors[edge_u_flat[t]] != colors[edge_v_flat[t]]:
            e += 1
    return e


@njit(cache=True)
def couple_edges(colors, edge_u_flat, edge_v_flat, p, state):
    ne = edge_u_flat.shape[0]
    bits = np.zeros(ne, dtype=np.bool_)
    for e in range(ne):
        if colors[edge_u_flat[e]] == colors[edge_v_flat[e]]:
            if _next_double(state) < p:
                bits[e] = True
    return bits


@njit(cache=True)
def label_open_clusters(bits, edge_node_u, edge_node_v, n_nodes):
    """Union-find labels of the open-edge graph; root = lowest node index."""
    parent = np.empty(n_nodes, dtype=np.int64)
    size = np.ones(n_nodes, dtype=np.int64)
    for t in range(n_nodes):
        parent[t] = t
    for e in range(bits.shape[0]):
        if bits[e]:
            _union(parent, size, edge_node_u[e], edge_node_v[e])
    label = np.empty(n_nodes, dtype=np.int64)
    for t in range(n_nodes):
        label[t] = _find(parent, t)
    # canonicalize: lowest member index labels the component
    canon = np.full(n_nodes, -1, dtype=np.int64)
    for t in range(n_nodes):
        r = label[t]
        if canon[r] < 0:
            canon[r] = t
    for t in range(n_nodes):
        label[t] = canon[label[t]]
    return label


@njit(cache=True)
def fk_collapsed_scan(edge_node_u, edge_node_v, edge_class, n_classes,
                      n_nodes, red_node, blue_node):
    """Exact scan over all 2^E states of a collapsed-edge FK system.

    Returns (codes, feat) restricted to states satisfying disconnection.
    code: per interior node a digit in base n_int+2: 0 = in the red-node
    cluster, 1 = blue-node cluster, 2+c = free cluster c (numbered by
    first appearance).  feat packs the per-weight-class open-edge counts
    and kappa in base 64, so weights for any (p, q) can be reconstructed
    without rescanning.
    """
    ne = edge_node_u.shape[0]
    n_states = 1 << ne
    n_int = n_nodes - (2 if blue_node >= 0 else 1)
    codes = np.empty(n_states, dtype=np.int64)
    feat = np.empty(n_states, dtype=np.int64)
    parent = np.empty(n_nodes, dtype=np.int64)
    size = np.empty(n_nodes, dtype=np.int64)
    newlab = np.empty(n_nodes, dtype=np.int64)
    ccount = np.empty(n_classes, dtype=np.int64)
    base = np.int64(n_int + 2)
    n_ok = 0
    for s in range(n_states):
        for t in range(n_nodes):
            parent[t] = t
            size[t] = 1
        for c in range(n_classes):
            ccount[c] = 0
        for e in range(ne):
            if (s >> e) & 1:
                ccount[edge_class[e]] += 1
                _union(parent, size, edge_node_u[e], edge_node_v[e])
        rr = _find(parent, red_node)
        if blue_node >= 0:
            rb = _find(parent, blue_node)
            if rr == rb:
                continue  # disconnection violated
        else:
            rb = np.int64(-1)
        kappa = 1 if blue_node < 0 else 2
        for t in range(n_nodes):
            newlab[t] = -1
        nfree = np.int64(0)
        code = np.int64(0)
        mul = np.int64(1)
        for t in range(n_int):
            r = _find(parent, t)
            if r == rr:
                d = np.int64(0)
            elif r == rb:
                d = np.int64(1)
            else:
                if newlab[r] < 0:
                    newlab[r] = 2 + nfree
                    nfree += 1
                    kappa += 1
                d = newlab[r]
            code += d * mul
            mul *= base
        f = kappa
        for c in range(n_classes):
            f = f * 64 + ccount[n_classes - 1 - c]
        codes[n_ok] = code
        feat[n_ok] = f
        n_ok += 1
    return codes[:n_ok], feat[:n_ok]


@njit(cache=True)
def connected_event_sum(edge_node_u, edge_node_v, open_w, n_nodes, root,
                        n_required):
    """Sum of prod(open weights) over all edge masks for which every node
    0..n_required-1 is connected to `root` (closed weight 1 per edge)."""
    ne = edge_node_u.shape[0]
    n_states = 1 << ne
    parent = np.empty(n_nodes, dtype=np.int64)
    size = np.empty(n_nodes, dtype=np.int64)
    total = 0.0
    for s in range(n_states):
        for t in range(n_nodes):
            parent[t] = t
            size[t] = 1
        w = 1.0
        for e in range(ne):
            if (s >> e) & 1:
                w *= open_w[e]
                _union(parent, size, edge_node_u[e], edge_node_v[e])
        r = _find(parent, root)
        ok = True
        for t in range(n_required):
            if _find(parent, t) != r:
                ok = False
                break
        if ok:
            total += w
    return total


@njit(cache=True)
def fk_mask_scan(edge_node_u, edge_node_v, n_nodes, red_node, blue_node):
    """(kappa, disconnected) for every edge mask of a plain FK system."""
    ne = edge_node_u.shape[0]
    n_states = 1 << ne
    kappa = np.empty(n_states, dtype=np.int16)
    disc = np.empty(n_states, dtype=np.bool_)
    parent = np.empty(n_nodes, dtype=np.int64)
    size = np.empty(n_nodes, dtype=np.int64)
    for s in range(n_states):
        for t in range(n_nodes):
            parent[t] = t
            size[t] = 1
        nopen_merge = 0
        for e in range(ne):
            if (s >> e) & 1:
                ra = _find(parent, edge_node_u[e])
                rb = _find(parent, edge_node_v[e])
                if ra != rb:
                    _union(parent, size, ra, rb)
                    nopen_merge += 1
        kappa[s] = n_nodes - nopen_merge
        if blue_node >= 0:
            disc[s] = _find(parent, red_node) != _find(parent, blue_node)
        else:
            disc[s] = True
    return kappa, disc


@njit(cache=True)
def fk_poly_table(edge_node_u, edge_node_v, in_tilde, n_nodes):
    """Coefficient table N[a, b, k] = #masks with a open plain edges,
    b open tilde edges, kappa = k; plus Nb[a, b, k] weighted by b."""
    ne = edge_node_u.shape[0]
    na = ne + 1
    table = np.zeros((na, na, n_nodes + 1), dtype=np.float64)
    parent = np.empty(n_nodes, dtype=np.int64)
    size = np.empty(n_nodes, dtype=np.int64)
    n_states = 1 << ne
    for s in range(n_states):
        for t in range(n_nodes):
            parent[t] = t
            size[t] = 1
        a = 0
        b = 0
        merges = 0
        for e in range(ne):
            if (s >> e) & 1:
                if in_tilde[e]:
                    b += 1
                else:
                    a += 1
                ra = _find(parent, edge_node_u[e])
                rb = _find(parent, edge_node_v[e])
                if ra != rb:
                    _union(parent, size, ra, rb)
                    merges += 1
        table[a, b, n_nodes - merges] += 1.0
    return table
