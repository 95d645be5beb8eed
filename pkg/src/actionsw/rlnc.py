"""Random linear network coding over GF(2^m).

Each link of integer capacity c is split into c parallel unit links, each
carrying one field element.  Link l emits

    Y_l = sum_i b[i, l] U_i   (inputs injected at o(l))
        + sum_k f[k, l] Y_k   (unit links entering o(l))

with every admissible coefficient uniform over the field (zero included).
With links in ancestral order F is strictly upper triangular and the map
from inputs to links is B (I - F)^{-1}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import networkx as nx
import numpy as np
from scipy.stats import binomtest

from .gf2m import ELEM, FieldSpec, invert_unitriangular, mat_mul
from .netgraph import Network, ancestral_order, min_cut

CONFIDENCE = 0.99
CHUNK = 8192
MESSAGE_BUDGET = 1 << 24


@dataclass(frozen=True)
class InputLayout:
    """How many field elements each source injects; s1's come first."""

    k1: int
    k2: int = 0

    def __post_init__(self):
        if self.k1 < 0 or self.k2 < 0:
            raise ValueError("input lengths must be >= 0")

    @property
    def size(self) -> int:
        return self.k1 + self.k2

    def origins(self, net: Network) -> np.ndarray:
        return np.array([net.s1] * self.k1 + [net.s2] * self.k2, dtype=int)

    def block(self, source: int, net: Network) -> slice:
        if source == net.s1:
            return slice(0, self.k1)
        if source == net.s2:
            return slice(self.k1, self.k1 + self.k2)
        raise ValueError(f"node {source} is not a source")


class Topology:
    """Unit-link expansion of a network plus the admissible coefficient positions."""

    def __init__(self, net: Network, layout: InputLayout):
        self.net = net
        self.layout = layout
        units = []
        for l in ancestral_order(net):
            o, d, c = net.links[l]
            if abs(c - round(c)) > 1e-9:
                raise ValueError(f"link {l} has non-integer capacity {c}; coding needs whole field elements")
            units += [(o, d)] * int(round(c))
        self.units = units
        self.origins = layout.origins(net)
        E = len(units)
        self.b_pos = [(i, l) for i in range(layout.size) for l in range(E) if self.origins[i] == units[l][0]]
        self.f_pos = [(k, l) for k in range(E) for l in range(k + 1, E) if units[k][1] == units[l][0]]
        # per link: which coefficient slots feed it
        self.b_in = [[(s, i) for s, (i, ll) in enumerate(self.b_pos) if ll == l] for l in range(E)]
        self.f_in = [[(s, k) for s, (k, ll) in enumerate(self.f_pos) if ll == l] for l in range(E)]

    @property
    def num_links(self) -> int:
        return len(self.units)

    def in_links(self, t: int) -> list[int]:
        return [l for l, (_, d) in enumerate(self.units) if d == t]

    def b_mask(self) -> np.ndarray:
        m = np.zeros((self.layout.size, self.num_links), dtype=bool)
        for i, l in self.b_pos:
            m[i, l] = True
        return m

    def f_mask(self) -> np.ndarray:
        m = np.zeros((self.num_links, self.num_links), dtype=bool)
        for k, l in self.f_pos:
            m[k, l] = True
        return m

    def draw(self, field: FieldSpec, trials: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """Admissible coefficients only: shapes (trials, |b_pos|), (trials, |f_pos|)."""
        b = field.random((trials, len(self.b_pos)), rng)
        f = field.random((trials, len(self.f_pos)), rng)
        return b, f

    def dense(self, b_vals: np.ndarray, f_vals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        lead = b_vals.shape[:-1]
        B = np.zeros(lead + (self.layout.size, self.num_links), dtype=ELEM)
        F = np.zeros(lead + (self.num_links, self.num_links), dtype=ELEM)
        if self.b_pos:
            i, l = np.array(self.b_pos).T
            B[..., i, l] = b_vals
        if self.f_pos:
            k, l = np.array(self.f_pos).T
            F[..., k, l] = f_vals
        return B, F

    def propagate(self, field: FieldSpec, u: np.ndarray, b_vals: np.ndarray, f_vals: np.ndarray) -> np.ndarray:
        """Link symbols for inputs ``u[..., K]`` under each coefficient draw.

        ``b_vals``/``f_vals`` have shape (T, slots); the result is (T, ..., E).
        """
        u = np.asarray(u, dtype=ELEM)
        T = b_vals.shape[0]
        extra = (1,) * (u.ndim - 1)
        y = np.zeros((T,) + u.shape[:-1] + (self.num_links,), dtype=ELEM)
        for l in range(self.num_links):
            acc = np.zeros((T,) + u.shape[:-1], dtype=ELEM)
            for s, i in self.b_in[l]:
                acc ^= field.mul_array(b_vals[:, s].reshape((T,) + extra), u[..., i])
            for s, k in self.f_in[l]:
                acc ^= field.mul_array(f_vals[:, s].reshape((T,) + extra), y[..., k])
            y[..., l] = acc
        return y


@dataclass(frozen=True, eq=False)
class CodingCoefficients:
    B: np.ndarray
    F: np.ndarray
    field: FieldSpec
    topology: Topology
    seed: int | None = None

    @cached_property
    def G(self) -> np.ndarray:
        eye = np.eye(self.F.shape[-1], dtype=ELEM)
        return invert_unitriangular(self.field, eye ^ self.F)


def sample_coefficients(net: Network, layout: InputLayout, field: FieldSpec, seed: int) -> CodingCoefficients:
    """One coefficient draw, reproducible from ``seed``."""
    topo = Topology(net, layout)
    b, f = topo.draw(field, 1, np.random.default_rng(seed))
    B, F = topo.dense(b[0], f[0])
    return CodingCoefficients(B, F, field, topo, seed)


@dataclass(frozen=True, eq=False)
class TransferOperator:
    terminal: int
    links: tuple[int, ...]
    matrix: np.ndarray  # inputs x in-links of the terminal


def transfer_operator(coeffs: CodingCoefficients, terminal: int) -> TransferOperator:
    """M_t = B (I - F)^{-1} restricted to the unit links entering ``terminal``."""
    cols = coeffs.topology.in_links(terminal)
    full = mat_mul(coeffs.field, coeffs.B, coeffs.G)
    return TransferOperator(terminal, tuple(cols), full[:, cols])


def max_path_length(net: Network, sources, t: int) -> int:
    """Longest directed path, counted in links, from any of ``sources`` to ``t`` (0 if none)."""
    g = nx.DiGraph()
    g.add_nodes_from(range(net.num_nodes))
    g.add_edges_from((o, d) for o, d, c in net.links if c > 0)
    best = {s: 0 for s in sources}
    for v in nx.topological_sort(g):
        if v not in best:
            continue
        for w in g.successors(v):
            best[w] = max(best.get(w, -1), best[v] + 1)
    return best.get(t, 0) if t not in sources else 0


def lemma1_bound(net: Network, w_sources, t: int, field_bits: int) -> float:
    """(L / 2^n)^C with L the longest W-to-t path and C the W-to-t min cut; 1 when vacuous."""
    if field_bits < 1:
        raise ValueError("field bits must be >= 1")
    cut = min_cut(net, w_sources, t)
    L = max_path_length(net, w_sources, t)
    q = 2.0 ** field_bits
    if cut == 0 or L >= q:
        return 1.0
    return float((L / q) ** cut)


@dataclass(frozen=True)
class CollisionEstimate:
    hits: int
    trials: int
    low: float
    high: float

    @property
    def estimate(self) -> float:
        return self.hits / self.trials


def clopper_pearson(hits: int, trials: int, confidence: float = CONFIDENCE) -> tuple[float, float]:
    ci = binomtest(hits, trials).proportion_ci(confidence, method="exact")
    return float(ci.low), float(ci.high)


def collision_counts(
    net: Network,
    layout: InputLayout,
    diffs: np.ndarray,
    terminals,
    field: FieldSpec,
    trials: int,
    seed: int,
) -> np.ndarray:
    """Collision counts for several input differences at once.

    ``diffs`` has shape (D, K); returns an int array (D, len(terminals)).
    Chunk c of the trials uses ``default_rng([seed, c])``.
    """
    topo = Topology(net, layout)
    diffs = np.atleast_2d(np.asarray(diffs, dtype=ELEM))
    cols = [topo.in_links(t) for t in terminals]
    hits = np.zeros((diffs.shape[0], len(cols)), dtype=np.int64)
    done, chunk = 0, 0
    while done < trials:
        size = min(CHUNK, trials - done)
        b, f = topo.draw(field, size, np.random.default_rng([seed, chunk]))
        y = topo.propagate(field, diffs, b, f)
        for j, c in enumerate(cols):
            hits[:, j] += np.all(y[..., c] == 0, axis=-1).sum(axis=0)
        done += size
        chunk += 1
    return hits


def difference_vectors(net: Network, layout: InputLayout, field: FieldSpec, rng: np.random.Generator):
    """One random input difference per source set, nonzero on every source in the set."""
    out = {}
    for label in ("s1", "s2", "s1,s2"):
        d = np.zeros(layout.size, dtype=ELEM)
        for s in net.source_nodes(label):
            blk = layout.block(s, net)
            width = blk.stop - blk.start
            if width == 0:
                raise ValueError(f"source {s} injects no elements")
            while True:
                v = field.random(width, rng)
                if v.any():
                    break
            d[blk] = v
        out[label] = d
    return out


def collision_probability_estimate(
    net: Network,
    layout: InputLayout,
    u,
    v,
    t: int,
    field: FieldSpec,
    trials: int,
    seed: int,
    confidence: float = CONFIDENCE,
) -> CollisionEstimate:
    """Fraction of coefficient draws under which u and v look the same at ``t``."""
    u = np.asarray(u, dtype=ELEM)
    v = np.asarray(v, dtype=ELEM)
    if u.shape != (layout.size,) or v.shape != u.shape:
        raise ValueError("inputs must match the layout length")
    if np.array_equal(u, v):
        raise ValueError("inputs must differ")
    if trials < 1:
        raise ValueError("need at least one trial")
    hits = int(collision_counts(net, layout, u ^ v, [t], field, trials, seed)[0, 0])
    lo, hi = clopper_pearson(hits, trials, confidence)
    return CollisionEstimate(hits, trials, lo, hi)


@dataclass(frozen=True)
class MulticastResult:
    errors: int
    trials: int
    messages: int
    elements: int
    bound: float

    @property
    def error_rate(self) -> float:
        return self.errors / self.trials


def multicast_simulate(
    net: Network,
    source: int,
    rate: float,
    field_bits: int,
    trials: int,
    seed: int,
    field: FieldSpec | None = None,
) -> MulticastResult:
    """Send one of round(2^{nR}) messages from ``source``; decode every terminal by exhaustive search.

    A trial fails if some terminal sees more than one message consistent
    with what it received.  ``bound`` is the union bound
    sum over terminals of L^C 2^{n(R - C)}, capped at 1.
    """
    field = field or FieldSpec(field_bits)
    if field.m != field_bits:
        raise ValueError("field does not match field_bits")
    if rate < 0:
        raise ValueError("rate must be >= 0")
    if field_bits * rate > 24:
        raise ValueError(f"2^(nR) = 2^{field_bits * rate:g} messages exceeds the 2^24 enumeration budget")
    n_msg = int(round(2.0 ** (field_bits * rate)))
    k = max(1, math.ceil(rate))
    if source == net.s1:
        layout = InputLayout(k, 0)
    elif source == net.s2:
        layout = InputLayout(0, k)
    else:
        raise ValueError("multicast source must be s1 or s2")
    topo = Topology(net, layout)
    q = field.size
    digits = (np.arange(n_msg, dtype=ELEM)[:, None] // (q ** np.arange(k, dtype=ELEM))) % q
    digits_full = np.zeros((n_msg, layout.size), dtype=ELEM)
    digits_full[:, layout.block(source, net)] = digits

    rng = np.random.default_rng(seed)
    truth = rng.integers(0, n_msg, size=trials)
    errors = 0
    for i in range(trials):
        b, f = topo.draw(field, 1, np.random.default_rng([seed, i]))
        B, F = topo.dense(b[0], f[0])
        G = invert_unitriangular(field, np.eye(topo.num_links, dtype=ELEM) ^ F)
        M = mat_mul(field, B, G)
        for t in net.terminals:
            Mt = M[:, topo.in_links(t)]
            # image of every message, built digit by digit from per-element tables
            img = np.zeros((n_msg, Mt.shape[1]), dtype=ELEM)
            vals = np.arange(q, dtype=ELEM)[:, None]
            for j in range(layout.size):
                if not np.any(Mt[j]):
                    continue
                table = field.mul_array(vals, Mt[j][None, :])
                img ^= table[digits_full[:, j]]
            z = img[truth[i]]
            if np.count_nonzero(np.all(img == z, axis=1)) != 1:
                errors += 1
                break
    bound = 0.0
    for t in net.terminals:
        c = min_cut(net, [source], t)
        L = max_path_length(net, [source], t)
        bound += L ** c * 2.0 ** (field_bits * (rate - c))
    return MulticastResult(errors, trials, n_msg, k, min(1.0, bound))
