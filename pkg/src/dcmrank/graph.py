"""Directed configuration model by uniform stub matching.

Every node i carries N_i inbound and D_i outbound stubs; a uniformly random
perfect matching of inbound to outbound stubs gives a directed multigraph with
self-loops and parallel edges allowed. :func:`explore_and_couple` builds the
same random graph breadth-first from a uniform root while growing the coupled
thorny branching tree.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path

import numpy as np

from .degree_model import BiDegreeSequence
from .errors import ConfigError, DegreeMismatch
from .tbt import CouplingStats, Tbt


class StubLabel(IntEnum):
    UNATTACHED = 1  # owner not yet in the graph
    FREE = 2  # owner attached, stub unpaired
    PAIRED = 3


@dataclass(frozen=True, eq=False)
class MultiDigraph:
    """Edge list sorted by (src, dst) with multiplicities.

    ``src[e] -> dst[e]`` carries ``mult[e]`` parallel edges.
    """

    n: int
    src: np.ndarray
    dst: np.ndarray
    mult: np.ndarray
    in_degrees: np.ndarray
    out_degrees: np.ndarray
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_pairs(cls, n, src, dst, meta=None) -> "MultiDigraph":
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        keys, mult = np.unique(src * n + dst, return_counts=True)
        out_deg = np.bincount(src, minlength=n).astype(np.int64)
        in_deg = np.bincount(dst, minlength=n).astype(np.int64)
        return cls(n, keys // n, keys % n, mult.astype(np.int64), in_deg, out_deg, dict(meta or {}))

    @property
    def edges(self) -> dict:
        return {(s, d): m for s, d, m in zip(self.src.tolist(), self.dst.tolist(), self.mult.tolist())}

    @property
    def total_stubs(self) -> int:
        return int(self.mult.sum())

    def check_conservation(self) -> bool:
        out_sum = np.bincount(self.src, weights=self.mult, minlength=self.n)
        in_sum = np.bincount(self.dst, weights=self.mult, minlength=self.n)
        return bool(np.array_equal(out_sum, self.out_degrees) and np.array_equal(in_sum, self.in_degrees))

    def same_edges(self, other: "MultiDigraph") -> bool:
        return (
            self.n == other.n
            and np.array_equal(self.src, other.src)
            and np.array_equal(self.dst, other.dst)
            and np.array_equal(self.mult, other.mult)
        )

    def to_csv(self, path, sidecar: dict | None = None):
        path = Path(path)
        lines = ["src,dst,multiplicity"]
        lines += [f"{s},{d},{m}" for s, d, m in zip(self.src.tolist(), self.dst.tolist(), self.mult.tolist())]
        path.write_text("\n".join(lines) + "\n")
        meta = {"n": self.n, "L_n": self.total_stubs, **self.meta, **(sidecar or {})}
        path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")

    @classmethod
    def from_csv(cls, path, n: int | None = None) -> "MultiDigraph":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(str(path))
        meta = {}
        side = path.with_suffix(".json")
        if side.exists():
            meta = json.loads(side.read_text())
        data = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
        if data.size == 0:
            data = np.empty((0, 3), dtype=np.int64)
        if data.shape[1] != 3:
            raise ConfigError(f"{path}: expected columns src,dst,multiplicity")
        if n is None:
            n = int(meta.get("n", data[:, :2].max() + 1 if len(data) else 0))
        if n < 1:
            raise ConfigError(f"{path}: empty graph")
        if (data[:, 2] < 1).any() or (data[:, :2] < 0).any() or (data[:, :2] >= n).any():
            raise ConfigError(f"{path}: invalid edge rows")
        src = np.repeat(data[:, 0], data[:, 2])
        dst = np.repeat(data[:, 1], data[:, 2])
        return cls.from_pairs(n, src, dst, meta={k: v for k, v in meta.items() if k not in ("n", "L_n")})


def _check_balanced(bideg: BiDegreeSequence):
    if not bideg.balanced:
        raise DegreeMismatch(
            f"sum(N)={int(bideg.in_degrees.sum())} != sum(D)={int(bideg.out_degrees.sum())}"
        )


def build_dcm(bideg: BiDegreeSequence, rng: np.random.Generator) -> MultiDigraph:
    """Uniform perfect matching of inbound to outbound stubs."""
    _check_balanced(bideg)
    n = bideg.n
    out_owner = np.repeat(np.arange(n), bideg.out_degrees)
    in_owner = np.repeat(np.arange(n), bideg.in_degrees)
    return MultiDigraph.from_pairs(n, out_owner[rng.permutation(len(out_owner))], in_owner)


class _StubDraws:
    """Buffered i.i.d. uniform draws over all L outbound stubs."""

    def __init__(self, rng, L, chunk=4096):
        self.rng, self.L, self.chunk = rng, L, chunk
        self.buf, self.pos = [], 0

    def __call__(self) -> int:
        if self.pos == len(self.buf):
            self.buf, self.pos = self.rng.integers(self.L, size=self.chunk).tolist(), 0
        self.pos += 1
        return self.buf[self.pos - 1]


def explore_and_couple(
    bideg: BiDegreeSequence,
    k: int,
    rng: np.random.Generator,
    complete: bool = True,
    root: int | None = None,
    trace: list | None = None,
):
    """Build the graph breadth-first from a uniform root to depth k, coupled with a TBT.

    Each inbound stub of an explored node draws uniformly from all L_n outbound
    stubs. A label-1 draw attaches a new node in both graph and tree. A label-2
    draw closes a cycle in the graph and gives the tree an uncoupled copy; a
    label-3 draw gives the tree an uncoupled copy while the graph redraws until
    it hits an unpaired stub. Uncoupled tree nodes get i.i.d. size-biased
    offspring. Exploration covers distances 0..k-1; with ``complete`` the
    remaining stubs are matched uniformly in node order afterwards.

    Returns ``(graph, tree, stats)``; ``graph`` is ``None`` when ``complete`` is false.
    If ``trace`` is a list, every stub relabelling is appended to it as
    ``(stub, old_label, new_label)``.
    """
    _check_balanced(bideg)
    if k < 0:
        raise ValueError("k must be nonnegative")
    n, L = bideg.n, bideg.total_stubs
    N = bideg.in_degrees.tolist()
    D = bideg.out_degrees.tolist()
    if root is None:
        root = int(rng.integers(n))
    stub_start = np.concatenate([[0], np.cumsum(bideg.out_degrees)]).tolist()
    owner = np.repeat(np.arange(n), bideg.out_degrees).tolist()
    label = bytearray(b"\x01" * L)
    attached = bytearray(n)
    matched_in = [0] * n
    draw = _StubDraws(rng, L) if L else None

    def attach(v):
        attached[v] = 1
        for s in range(stub_start[v], stub_start[v + 1]):
            if trace is not None:
                trace.append((s, label[s], 2))
            label[s] = 2

    def pair(s, j, v):
        if trace is not None:
            trace.append((s, label[s], 3))
        label[s] = 3
        e_src.append(j)
        e_dst.append(v)

    e_src, e_dst = [], []

    def graph_pair(v):
        # rejection over all L stubs until an unpaired one comes up
        while True:
            s = draw()
            if label[s] != 3:
                break
        j = owner[s]
        if label[s] == 1:
            attach(j)
            next_graph.append(j)
        pair(s, j, v)

    attach(root)
    t_parent, t_off, t_thorn, t_src, t_coupled = [-1], [N[root]], [D[root]], [root], [True]
    gen_offsets = [0, 1]
    graph_level = [root]
    tau = None
    Z, Zhat, Vhat = [], [], []

    for g in range(k):
        lo, hi = gen_offsets[g], gen_offsets[g + 1]
        Z.append(sum(N[v] for v in graph_level))
        Zhat.append(sum(t_off[lo:hi]))
        Vhat.append(sum(t_thorn[lo:hi]))
        next_graph = []
        coupled_here = set()
        for t in range(lo, hi):
            if t_coupled[t]:
                v = t_src[t]
                coupled_here.add(v)
                for _ in range(N[v]):
                    s = draw()
                    j = owner[s]
                    lab = label[s]
                    if lab == 1:
                        attach(j)
                        next_graph.append(j)
                        pair(s, j, v)
                    else:
                        if tau is None:
                            tau = g
                        if lab == 2:
                            pair(s, j, v)
                        else:
                            graph_pair(v)
                    t_parent.append(t)
                    t_off.append(N[j])
                    t_thorn.append(D[j] - 1)
                    t_src.append(j)
                    t_coupled.append(lab == 1)
                matched_in[v] = N[v]
            else:
                for _ in range(t_off[t]):
                    j = owner[draw()]
                    t_parent.append(t)
                    t_off.append(N[j])
                    t_thorn.append(D[j] - 1)
                    t_src.append(j)
                    t_coupled.append(False)
        for v in graph_level:
            if v not in coupled_here:
                for _ in range(N[v]):
                    graph_pair(v)
                matched_in[v] = N[v]
        gen_offsets.append(len(t_parent))
        graph_level = next_graph

    lo, hi = gen_offsets[k], gen_offsets[k + 1]
    Z.append(sum(N[v] for v in graph_level))
    Zhat.append(sum(t_off[lo:hi]))
    Vhat.append(sum(t_thorn[lo:hi]))

    as_arr = lambda xs: np.asarray(xs, dtype=np.int64)  # noqa: E731
    tree = Tbt(as_arr(t_parent), as_arr(t_off), as_arr(t_thorn), as_arr(t_src), as_arr(gen_offsets))
    explored = sum(attached)
    stats = CouplingStats(tau=tau, Z=Z, Zhat=Zhat, Vhat=Vhat, root=root, k=k, extra={"explored_nodes": explored})

    graph = None
    if complete:
        free_out = np.flatnonzero(np.frombuffer(bytes(label), dtype=np.uint8) != 3)
        remaining_in = bideg.in_degrees - np.asarray(matched_in, dtype=np.int64)
        in_owner = np.repeat(np.arange(n), remaining_in)
        out_owner = np.repeat(np.arange(n), bideg.out_degrees)[free_out]
        src = np.concatenate([as_arr(e_src), out_owner[rng.permutation(len(out_owner))]])
        dst = np.concatenate([as_arr(e_dst), in_owner])
        graph = MultiDigraph.from_pairs(n, src, dst, meta={"root": root})
    return graph, tree, stats
