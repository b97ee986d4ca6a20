"""Thorny branching trees.

A tree node copies the (in-degree, out-degree) profile of a node of the
bi-degree sequence: its in-degree is its number of offspring and all but one
of its outbound stubs are "thorns" pointing to an auxiliary node outside the
tree (the root keeps all of its outbound stubs as thorns). Nodes are stored in
breadth-first order, so every generation is a contiguous block and the
children of a generation appear in the order of their parents.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .degree_model import BiDegreeSequence
from .errors import DepthExceeded, EmptyGraph

GT_K = "gt_k"


@dataclass
class Tbt:
    parent: np.ndarray
    offspring: np.ndarray
    thorns: np.ndarray
    source: np.ndarray  # index in the bi-degree sequence this node copies
    gen_offsets: np.ndarray  # generation g occupies [gen_offsets[g], gen_offsets[g+1])

    @property
    def root(self) -> int:
        return int(self.source[0])

    @property
    def depth(self) -> int:
        return len(self.gen_offsets) - 2

    @property
    def size(self) -> int:
        return len(self.parent)

    def generation(self, g: int) -> range:
        return range(int(self.gen_offsets[g]), int(self.gen_offsets[g + 1]))

    def generations(self) -> list[list[int]]:
        return [list(self.generation(g)) for g in range(self.depth + 1)]

    def generation_sizes(self) -> np.ndarray:
        return np.diff(self.gen_offsets)

    def zhat(self) -> np.ndarray:
        """Offspring totals per generation, i.e. the size of the next generation."""
        return np.array([int(self.offspring[self.generation(g).start : self.generation(g).stop].sum()) for g in range(self.depth + 1)], dtype=np.int64)

    def vhat(self) -> np.ndarray:
        """Thorn totals per generation."""
        return np.array([int(self.thorns[self.generation(g).start : self.generation(g).stop].sum()) for g in range(self.depth + 1)], dtype=np.int64)

    def truncate(self, k: int) -> "Tbt":
        if k > self.depth:
            raise DepthExceeded(f"cannot truncate a depth-{self.depth} tree to depth {k}")
        m = int(self.gen_offsets[k + 1])
        return Tbt(self.parent[:m], self.offspring[:m], self.thorns[:m], self.source[:m], self.gen_offsets[: k + 2])

    def to_dict(self) -> dict:
        nodes = [
            {"id": i, "parent": p, "offspring": o, "thorns": t, "source": s}
            for i, (p, o, t, s) in enumerate(
                zip(self.parent.tolist(), self.offspring.tolist(), self.thorns.tolist(), self.source.tolist())
            )
        ]
        return {"root": self.root, "depth": self.depth, "nodes": nodes}

    def to_json(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True) + "\n")

    @classmethod
    def from_dict(cls, d: dict) -> "Tbt":
        nodes = sorted(d["nodes"], key=lambda x: x["id"])
        parent = np.array([x["parent"] for x in nodes], dtype=np.int64)
        depth_of = np.zeros(len(nodes), dtype=np.int64)
        for i in range(1, len(nodes)):
            depth_of[i] = depth_of[parent[i]] + 1
        counts = np.bincount(depth_of, minlength=d["depth"] + 1)
        return cls(
            parent,
            np.array([x["offspring"] for x in nodes], dtype=np.int64),
            np.array([x["thorns"] for x in nodes], dtype=np.int64),
            np.array([x.get("source", -1) for x in nodes], dtype=np.int64),
            np.concatenate([[0], np.cumsum(counts)]),
        )


@dataclass
class CouplingStats:
    """Bookkeeping of one coupled exploration.

    ``tau`` is the distance from the root of the node whose inbound stub first
    drew an already-attached (label 2) or already-paired (label 3) outbound
    stub, or ``None`` when no such draw happened while exploring to depth k.
    """

    tau: int | None
    Z: list
    Zhat: list
    Vhat: list
    root: int
    k: int
    extra: dict = field(default_factory=dict)

    def tau_at_least(self, k: int) -> bool:
        return self.tau is None or self.tau >= k

    def to_dict(self) -> dict:
        return {
            "tau": GT_K if self.tau is None else self.tau,
            "Z": [int(z) for z in self.Z],
            "Zhat": [int(z) for z in self.Zhat],
            "Vhat": [int(v) for v in self.Vhat],
            "root": int(self.root),
            "k": int(self.k),
        }

    def to_json(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True) + "\n")


def stub_owners(bideg: BiDegreeSequence) -> np.ndarray:
    return np.repeat(np.arange(bideg.n), bideg.out_degrees)


def sample_size_biased(bideg: BiDegreeSequence, rng: np.random.Generator, size=None):
    """Pick a node with probability D_k / L_n; return (node, N_k, D_k - 1).

    With ``size`` given, returns three arrays of that length.
    """
    L = bideg.total_stubs
    if L == 0:
        raise EmptyGraph("no outbound stubs to sample from")
    if size is None:
        s = int(rng.integers(L))
        node = int(np.searchsorted(np.cumsum(bideg.out_degrees), s, side="right"))
        return node, int(bideg.in_degrees[node]), int(bideg.out_degrees[node]) - 1
    nodes = stub_owners(bideg)[rng.integers(L, size=size)]
    return nodes, bideg.in_degrees[nodes], bideg.out_degrees[nodes] - 1


def size_biased_pmf(bideg: BiDegreeSequence) -> dict:
    """Exact joint law of (offspring, thorns) under size-biased node selection."""
    L = bideg.total_stubs
    if L == 0:
        raise EmptyGraph("no outbound stubs")
    pmf: dict = {}
    for i, j in zip(bideg.in_degrees.tolist(), bideg.out_degrees.tolist()):
        if j:
            pmf[(i, j - 1)] = pmf.get((i, j - 1), 0.0) + j / L
    return pmf


def grow_tbt(bideg: BiDegreeSequence, root_profile, k: int, rng: np.random.Generator, root_source: int = -1) -> Tbt:
    """Grow an uncoupled tree to depth k with i.i.d. size-biased individuals."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    off0, thorn0 = (int(x) for x in root_profile)
    if off0 < 0 or thorn0 < 0:
        raise ValueError("root profile must be nonnegative")
    parents = [np.array([-1])]
    offs = [np.array([off0])]
    thorns = [np.array([thorn0])]
    sources = [np.array([root_source])]
    sizes = [1]
    owners = None
    start = 0
    for g in range(k):
        total = int(offs[-1].sum())
        if total == 0:
            parents.append(np.empty(0, np.int64))
            offs.append(np.empty(0, np.int64))
            thorns.append(np.empty(0, np.int64))
            sources.append(np.empty(0, np.int64))
            sizes.append(0)
            continue
        if owners is None:
            if bideg.total_stubs == 0:
                raise EmptyGraph("no outbound stubs to sample from")
            owners = stub_owners(bideg)
        nodes = owners[rng.integers(len(owners), size=total)]
        ids = np.arange(start, start + sizes[-1])
        parents.append(np.repeat(ids, offs[-1]))
        offs.append(bideg.in_degrees[nodes])
        thorns.append(bideg.out_degrees[nodes] - 1)
        sources.append(nodes)
        start += sizes[-1]
        sizes.append(total)
    cat = lambda xs: np.concatenate(xs).astype(np.int64)  # noqa: E731
    return Tbt(cat(parents), cat(offs), cat(thorns), cat(sources), np.concatenate([[0], np.cumsum(sizes)]))


def tree_pagerank(tree: Tbt, c: float, k: int, r0: float = 1.0) -> float:
    """Root PageRank after k iterations, evaluated from generation k upwards.

    Each child j passes c * R_j / D_j to its parent, where D_j = thorns_j + 1
    counts the edge to the parent plus the thorns; thorn mass leaves the tree.
    """
    if k > tree.depth:
        raise DepthExceeded(f"k={k} exceeds tree depth {tree.depth}")
    if k < 0:
        raise ValueError("k must be nonnegative")
    off = tree.gen_offsets
    vals = np.full(int(off[k + 1] - off[k]), float(r0))
    for g in range(k - 1, -1, -1):
        lo, hi, chi = int(off[g]), int(off[g + 1]), int(off[g + 2])
        w = c * vals / (tree.thorns[hi:chi] + 1)
        vals = np.bincount(tree.parent[hi:chi] - lo, weights=w, minlength=hi - lo) + (1 - c)
    return float(vals[0])
