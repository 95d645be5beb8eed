"""Rate regions for correlated sources with actions.

Three scenarios are covered: actions chosen at the decoder (``A``), at the
first encoder (``B``), and before X is observed, i.e. independent of X
(``C``).  For a fixed joint each scenario gives three lower bounds on
(R_X, R_Y, R_X + R_Y); the optimal region is the convex closure of the union
of those polyhedra over all policies P(A|X) meeting the cost budget.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

from .info import ActionModel, Joint3, action_terms, binary_entropy, joint_batch

NONNEG_TOL = 1e-9
INDEPENDENCE_TOL = 1e-9
COST_TOL = 1e-12


class Scenario(enum.Enum):
    DECODER = "A"
    ENCODER = "B"
    INDEPENDENT = "C"

    @classmethod
    def parse(cls, value) -> "Scenario":
        if isinstance(value, Scenario):
            return value
        key = str(value).strip().upper()
        aliases = {
            "A": cls.DECODER, "DECODER": cls.DECODER, "DECODERACTIONS": cls.DECODER,
            "B": cls.ENCODER, "ENCODER": cls.ENCODER, "ENCODERACTIONS": cls.ENCODER,
            "C": cls.INDEPENDENT, "INDEPENDENT": cls.INDEPENDENT, "ACTIONSINDEPENDENTOFX": cls.INDEPENDENT,
        }
        try:
            return aliases[key.replace("_", "").replace("-", "")]
        except KeyError:
            raise ValueError(f"unknown scenario {value!r}; expected A, B or C") from None


class InfeasibleBudget(ValueError):
    """No policy on the grid meets the cost budget."""


@dataclass(frozen=True)
class RateConstraints:
    """Lower bounds R_X >= rx_min, R_Y >= ry_min, R_X + R_Y >= sum_min."""

    rx_min: float
    ry_min: float
    sum_min: float

    def __post_init__(self):
        for name in ("rx_min", "ry_min", "sum_min"):
            if np.any(np.asarray(getattr(self, name)) < -NONNEG_TOL):
                raise ValueError(f"{name} is negative")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.rx_min, self.ry_min, self.sum_min)

    def contains(self, rx: float, ry: float, slack: float = NONNEG_TOL) -> bool:
        return rx >= self.rx_min - slack and ry >= self.ry_min - slack and rx + ry >= self.sum_min - slack

    def vertices(self) -> tuple[tuple[float, float], tuple[float, float]]:
        """The two corner points of the polyhedron (they coincide if the sum bound is slack)."""
        rx, ry, s = self.rx_min, self.ry_min, self.sum_min
        return (rx, max(ry, s - rx)), (max(rx, s - ry), ry)


def constraint_arrays(p: np.ndarray, scenario, clamp: bool = True) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised (rx_min, ry_min, sum_min) for joints ``p[..., x, a, y]``."""
    sc = Scenario.parse(scenario)
    t = action_terms(p)
    ry = t["H(Y|X,A)"]
    if sc is Scenario.INDEPENDENT:
        return t["H(X|Y,A)"], ry, t["H(X,Y|A)"]
    rx = t["H(X|Y,A)"] + t["I(X;A)"]
    s = t["H(X,Y|A)"] + t["I(X;A)"]
    if sc is Scenario.ENCODER:
        rx = rx - t["I(Y;A)"]
        if clamp:
            rx = np.maximum(rx, 0.0)
    return rx, ry, s


@dataclass(frozen=True)
class _RawConstraints(RateConstraints):
    """Unchecked triple; the unclamped encoder-side R_X bound may be negative."""

    def __post_init__(self):
        pass


def _triple(j: Joint3, scenario, clamp: bool = True) -> RateConstraints:
    rx, ry, s = constraint_arrays(j.probs, scenario, clamp=clamp)
    if not clamp:
        return _RawConstraints(float(rx), float(ry), float(s))
    return RateConstraints(float(rx), float(ry), float(s))


def constraints_case_a(j: Joint3) -> RateConstraints:
    """Actions taken at the decoder."""
    return _triple(j, Scenario.DECODER)


def constraints_case_b(j: Joint3, clamp: bool = True) -> RateConstraints:
    """Actions taken at the encoder.

    With ``clamp=False`` the R_X bound is returned as the raw information
    expression, which can be negative when I(Y;A) exceeds the rest.
    """
    return _triple(j, Scenario.ENCODER, clamp=clamp)


def constraints_case_c(j: Joint3) -> RateConstraints:
    """Actions independent of X (time sharing)."""
    i_xa = float(action_terms(j.probs)["I(X;A)"])
    if i_xa >= INDEPENDENCE_TOL:
        raise ValueError(f"case C needs A independent of X, but I(X;A) = {i_xa:.3g}")
    return _triple(j, Scenario.INDEPENDENT)


def constraints(j: Joint3, scenario) -> RateConstraints:
    sc = Scenario.parse(scenario)
    return {
        Scenario.DECODER: constraints_case_a,
        Scenario.ENCODER: constraints_case_b,
        Scenario.INDEPENDENT: constraints_case_c,
    }[sc](j)


def corner_points(j: Joint3, scenario) -> tuple[tuple[float, float], tuple[float, float]]:
    """Corner points of the region at a fixed joint.

    Encoder side: (I(X;A) - I(Y;A) + H(X|Y,A), H(Y)) and (H(X), H(Y|X,A)).
    Decoder side: the two vertices of its polyhedron, which work out to
    (H(X|Y,A) + I(X;A), H(Y|A)) and (H(X), H(Y|X,A)).
    """
    sc = Scenario.parse(scenario)
    t = {k: float(v) for k, v in action_terms(j.probs).items()}
    if sc is Scenario.ENCODER:
        return (
            (t["I(X;A)"] - t["I(Y;A)"] + t["H(X|Y,A)"], t["H(Y)"]),
            (t["H(X)"], t["H(Y|X,A)"]),
        )
    if sc is Scenario.DECODER:
        return constraints_case_a(j).vertices()
    raise ValueError("corner points are defined for scenarios A and B only")


def simplex_grid(k: int, resolution: int) -> np.ndarray:
    """All pmfs on k symbols whose entries are multiples of 1/(resolution-1)."""
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    steps = resolution - 1
    if k == 1:
        return np.ones((1, 1))
    if k == 2:
        q = np.arange(resolution) / steps
        return np.column_stack([1.0 - q, q])
    pts = [c for c in itertools.product(range(resolution), repeat=k - 1) if sum(c) <= steps]
    arr = np.array(pts, dtype=float)
    return np.column_stack([arr, steps - arr.sum(axis=1)]) / steps


def policy_grid(nx: int, na: int, resolution: int, independent: bool = False) -> np.ndarray:
    """Grid of conditional policies, shape (P, nx, na).

    For binary X and A the grid is the (alpha, beta) square with
    alpha = P(A=1|X=0) and beta = P(A=0|X=1), both on ``resolution`` points.
    """
    rows = simplex_grid(na, resolution)
    if independent:
        return np.repeat(rows[:, None, :], nx, axis=1)
    if nx == 2 and na == 2:
        q = np.arange(resolution) / (resolution - 1)
        alpha, beta = np.meshgrid(q, q, indexing="ij")
        pol = np.empty((resolution, resolution, 2, 2))
        pol[..., 0, 0] = 1.0 - alpha
        pol[..., 0, 1] = alpha
        pol[..., 1, 0] = beta
        pol[..., 1, 1] = 1.0 - beta
        return pol.reshape(-1, 2, 2)
    idx = np.array(list(itertools.product(range(len(rows)), repeat=nx)))
    return rows[idx]


@dataclass(frozen=True, eq=False)
class Frontier:
    """Lower-left boundary of the convexified region, R_X ascending."""

    points: np.ndarray
    policies: np.ndarray
    scenario: Scenario
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.points)

    @property
    def rx(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def ry(self) -> np.ndarray:
        return self.points[:, 1]

    def ry_at(self, rx) -> np.ndarray:
        """Smallest achievable R_Y at each R_X (inf left of the region)."""
        rx = np.asarray(rx, dtype=float)
        out = np.interp(rx, self.rx, self.ry)
        return np.where(rx < self.rx[0], np.inf, out)

    def contains(self, rx: float, ry: float, slack: float = NONNEG_TOL) -> bool:
        return bool(ry >= self.ry_at(rx + slack) - slack)

    def rows(self):
        """(R_X, R_Y, alpha, beta, scenario) rows; alpha/beta are None unless the policy is binary."""
        for (x, y), pol in zip(self.points, self.policies):
            if pol.shape == (2, 2):
                a, b = float(pol[0, 1]), float(pol[1, 0])
            else:
                a = b = None
            yield float(x), float(y), a, b, self.scenario.value


def lower_left_hull(points: np.ndarray) -> np.ndarray:
    """Indices of the Pareto-minimal vertices of the convex hull, R_X ascending."""
    pts = np.asarray(points, dtype=float)
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    ys = pts[order, 1]
    runmin = np.minimum.accumulate(ys)
    keep = np.ones(len(ys), dtype=bool)
    keep[1:] = ys[1:] < runmin[:-1] - 1e-13
    stair = order[keep]
    hull: list[int] = []
    for i in stair:
        px, py = pts[i]
        while len(hull) >= 2:
            ox, oy = pts[hull[-2]]
            ax, ay = pts[hull[-1]]
            if (ax - ox) * (py - oy) - (ay - oy) * (px - ox) <= 1e-15:
                hull.pop()
            else:
                break
        hull.append(int(i))
    return np.array(hull, dtype=int)


def feasible_policies(model: ActionModel, scenario, resolution: int) -> np.ndarray:
    sc = Scenario.parse(scenario)
    nx, na, _ = model.sizes
    pols = policy_grid(nx, na, resolution, independent=sc is Scenario.INDEPENDENT)
    pa = np.einsum("x,pxa->pa", model.px.probs, pols)
    ok = pa @ model.cost_per_action <= model.budget + COST_TOL
    if not np.any(ok):
        raise InfeasibleBudget(
            f"no policy meets budget {model.budget}; cheapest action costs {model.cost_per_action.min()}"
        )
    return pols[ok]


def trace_frontier(model: ActionModel, scenario, resolution: int = 512, chunk: int = 1 << 16) -> Frontier:
    """Grid search over policies, union of polyhedra, then lower convex hull."""
    sc = Scenario.parse(scenario)
    pols = feasible_policies(model, sc, resolution)
    channel = model.py_given_xa.table
    px = model.px.probs
    verts, owner = [], []
    for start in range(0, len(pols), chunk):
        p = joint_batch(px, pols[start:start + chunk], channel)
        rx, ry, s = constraint_arrays(p, sc)
        v1 = np.column_stack([rx, np.maximum(ry, s - rx)])
        v2 = np.column_stack([np.maximum(rx, s - ry), ry])
        ids = np.arange(start, start + len(rx))
        verts += [v1, v2]
        owner += [ids, ids]
    verts = np.concatenate(verts)
    owner = np.concatenate(owner)
    hull = lower_left_hull(verts)
    meta = {"budget": model.budget, "resolution": resolution, "policies_feasible": int(len(pols))}
    return Frontier(verts[hull], pols[owner[hull]], sc, meta)


# closed forms for the two binary examples; used as independent oracles


def _weighted_hb(weight, numer):
    """weight * H_b(numer / weight), with 0 * H_b(0/0) = 0."""
    w = np.asarray(weight, dtype=float)
    n = np.asarray(numer, dtype=float)
    safe = np.where(w > 0, w, 1.0)
    ratio = np.clip(np.where(w > 0, n / safe, 0.0), 0.0, 1.0)
    return w * binary_entropy(ratio)


def _scalarise(*vals):
    out = tuple(float(v) if np.ndim(v) == 0 else np.asarray(v) for v in vals)
    return out


def example1_closed_form(alpha, beta, gamma, case):
    """Example 1 bounds as printed, plus a cost-feasibility flag.

    For case C ``alpha`` is P(A=1) and ``beta`` is ignored.
    Returns ``(RateConstraints, feasible)``.
    """
    sc = Scenario.parse(case)
    a = np.asarray(alpha, dtype=float)
    b = np.asarray(beta, dtype=float)
    abar, bbar = 1.0 - a, 1.0 - b
    if sc is Scenario.INDEPENDENT:
        triple = (abar, abar, 1.0 + abar)
        feasible = a <= gamma + COST_TOL
    else:
        ry = 0.5 * (abar + b)
        s = 1.0 + 0.5 * (abar + b)
        if sc is Scenario.DECODER:
            rx = 1.0 - _weighted_hb(0.5 * (a + bbar), 0.5 * a)
        else:
            rx = 1.0 - binary_entropy(0.5 * a + 0.25 * (b + abar)) + 0.5 * (abar + b)
        triple = (rx, ry, s)
        feasible = 0.5 * (a + bbar) <= gamma + COST_TOL
    rx, ry, s = _scalarise(*triple)
    return RateConstraints(rx, ry, s), (bool(feasible) if np.ndim(feasible) == 0 else feasible)


def example2_closed_form(alpha, beta, delta, case, gamma=None):
    """Example 2 bounds as printed, plus a cost-feasibility flag.

    Returns ``(RateConstraints, feasible)``; ``feasible`` is True when no
    budget is given.  Case C does not depend on the policy.
    """
    sc = Scenario.parse(case)
    a = np.asarray(alpha, dtype=float)
    b = np.asarray(beta, dtype=float)
    abar, bbar = 1.0 - a, 1.0 - b
    hd = binary_entropy(delta)
    if sc is Scenario.INDEPENDENT:
        shape = np.broadcast(a, b).shape
        rx = np.full(shape, _weighted_hb(0.5 * (1.0 + delta), 0.5))
        triple = (rx, np.full(shape, 0.5 * hd), np.full(shape, 1.0 + 0.5 * hd))
    else:
        ry = 0.5 * (a + b) * hd
        s = 1.0 + ry
        if sc is Scenario.DECODER:
            rx = (
                1.0
                - _weighted_hb(0.5 * (a + bbar), 0.5 * bbar)
                - _weighted_hb(0.5 * (b + abar), 0.5 * abar)
                + _weighted_hb(0.5 * (abar + b * delta), 0.5 * abar)
                + _weighted_hb(0.5 * (bbar + a * delta), 0.5 * bbar)
            )
        else:
            rx = 1.0 + 0.5 * (a + b) * hd - binary_entropy(0.5 * (1.0 + a * delta - b * delta))
        triple = (rx, ry, s)
    feasible = True if gamma is None else 0.5 * (a + bbar) <= gamma + COST_TOL
    rx, ry, s = _scalarise(*triple)
    return RateConstraints(rx, ry, s), (bool(feasible) if np.ndim(feasible) == 0 else feasible)
