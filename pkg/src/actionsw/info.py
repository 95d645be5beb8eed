"""Finite-alphabet probability tables and information measures (bits).

Joint distributions over (X, A, Y) are stored as arrays indexed
``probs[x, a, y]``.  The batch helpers at the bottom accept any array whose
last three axes are (X, A, Y), so a whole grid of action policies can be
evaluated in one call.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Union

import numpy as np

SUM_TOL = 1e-12
COND_SKIP = 1e-15
VARIABLES = ("X", "A", "Y")

VarSpec = Union[str, Iterable[str]]


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Pmf:
    probs: np.ndarray

    def __post_init__(self):
        p = _frozen(self.probs)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("a pmf is a non-empty 1-d vector")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("pmf entries must be finite and nonnegative")
        if abs(p.sum() - 1.0) > SUM_TOL:
            raise ValueError(f"pmf sums to {p.sum()!r}, not 1")
        object.__setattr__(self, "probs", p)

    @property
    def alphabet_size(self) -> int:
        return self.probs.size

    def __len__(self):
        return self.probs.size

    def __getitem__(self, i):
        return self.probs[i]


@dataclass(frozen=True, eq=False)
class CondPmf:
    """Conditional pmf; ``table[*inputs, out]``, one valid pmf per input tuple."""

    table: np.ndarray

    def __post_init__(self):
        t = _frozen(self.table)
        if t.ndim < 2:
            raise ValueError("a conditional pmf needs at least one input axis")
        if np.any(t < 0) or not np.all(np.isfinite(t)):
            raise ValueError("conditional pmf entries must be finite and nonnegative")
        bad = np.abs(t.sum(axis=-1) - 1.0) > SUM_TOL
        if np.any(bad):
            raise ValueError(f"rows {np.argwhere(bad).tolist()} do not sum to 1")
        object.__setattr__(self, "table", t)

    @property
    def input_sizes(self) -> tuple[int, ...]:
        return self.table.shape[:-1]

    @property
    def output_size(self) -> int:
        return self.table.shape[-1]

    def row(self, *inputs) -> Pmf:
        return Pmf(self.table[tuple(inputs)])


@dataclass(frozen=True, eq=False)
class Joint3:
    """Joint pmf of (X, A, Y)."""

    probs: np.ndarray

    def __post_init__(self):
        p = _frozen(self.probs)
        if p.ndim != 3:
            raise ValueError("Joint3 needs a 3-d array indexed [x, a, y]")
        if np.any(p < 0) or abs(p.sum() - 1.0) > SUM_TOL:
            raise ValueError("Joint3 must be nonnegative and sum to 1")
        object.__setattr__(self, "probs", p)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.probs.shape

    def marginal(self, variables: VarSpec) -> np.ndarray:
        """Marginal table over ``variables``, axes kept in (X, A, Y) order."""
        return _marginal(self.probs, _axes(variables))


def _axes(variables: VarSpec) -> tuple[int, ...]:
    names = list(variables.upper()) if isinstance(variables, str) else [str(v).upper() for v in variables]
    try:
        axes = sorted({VARIABLES.index(v) for v in names})
    except ValueError:
        raise ValueError(f"unknown variable in {variables!r}; use X, A, Y") from None
    if not axes:
        raise ValueError("empty variable set")
    return tuple(axes)


def _marginal(p: np.ndarray, keep: tuple[int, ...]) -> np.ndarray:
    # axes counted from the end so leading batch dims pass through
    drop = tuple(ax - 3 for ax in range(3) if ax not in keep)
    return p.sum(axis=drop) if drop else p


def _plogp(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)


def _entropy_last(p: np.ndarray, k: int) -> np.ndarray:
    """Entropy over the last ``k`` axes."""
    return -_plogp(p).sum(axis=tuple(range(-k, 0)))


def binary_entropy(p):
    """H_b(p) in bits; accepts scalars or arrays."""
    arr = np.asarray(p, dtype=np.float64)
    if np.any((arr < 0) | (arr > 1)) or np.any(np.isnan(arr)):
        raise ValueError("binary entropy needs 0 <= p <= 1")
    h = -_plogp(arr) - _plogp(1.0 - arr)
    return float(h) if h.ndim == 0 else h


def entropy(p) -> float:
    probs = p.probs if isinstance(p, Pmf) else Pmf(p).probs
    return float(_entropy_last(probs, 1))


def joint_entropy(j: Joint3, variables: VarSpec) -> float:
    keep = _axes(variables)
    return float(_entropy_last(_marginal(j.probs, keep), len(keep)))


def cond_entropy(j: Joint3, target: VarSpec, given: VarSpec = ()) -> float:
    """H(target | given).  ``target`` may be a pair such as ``"XY"``."""
    t = _axes(target)
    g = _axes(given) if (given and len(given)) else ()
    if set(t) & set(g):
        raise ValueError("target and conditioning sets overlap")
    return float(_cond_entropy_batch(j.probs, t, g))


def _cond_entropy_batch(p: np.ndarray, target: tuple[int, ...], given: tuple[int, ...]) -> np.ndarray:
    keep = tuple(sorted(set(target) | set(given)))
    ptg = _marginal(p, keep)
    if not given:
        return _entropy_last(ptg, len(keep))
    pg = _marginal(p, given)
    # broadcast P(g) back onto the (t, g) table
    shape = list(pg.shape[: pg.ndim - len(given)])
    gi = 0
    for ax in keep:
        if ax in given:
            shape.append(pg.shape[pg.ndim - len(given) + gi])
            gi += 1
        else:
            shape.append(1)
    pg_b = pg.reshape(shape)
    ok = (pg_b >= COND_SKIP) & (ptg > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(ok, ptg * np.log2(np.where(ok, ptg / np.where(ok, pg_b, 1.0), 1.0)), 0.0)
    return -terms.sum(axis=tuple(range(-len(keep), 0)))


def mutual_information(j: Joint3, a: VarSpec, b: VarSpec) -> float:
    sa, sb = _axes(a), _axes(b)
    if set(sa) & set(sb):
        raise ValueError("mutual information needs disjoint variable sets")
    ha = _entropy_last(_marginal(j.probs, sa), len(sa))
    return float(max(ha - _cond_entropy_batch(j.probs, sa, sb), 0.0))


def expected_cost(j: Joint3, cost_per_action) -> float:
    cost = np.asarray(cost_per_action, dtype=np.float64)
    pa = j.marginal("A")
    if cost.shape != pa.shape:
        raise ValueError("cost vector length must equal |A|")
    return float(pa @ cost)


def joint_from_factors(px: Pmf, pa_given_x: CondPmf, py_given_xa: CondPmf) -> Joint3:
    nx = px.alphabet_size
    if pa_given_x.input_sizes != (nx,):
        raise ValueError(f"P(A|X) inputs {pa_given_x.input_sizes} do not match |X|={nx}")
    na = pa_given_x.output_size
    if py_given_xa.input_sizes != (nx, na):
        raise ValueError(f"P(Y|X,A) inputs {py_given_xa.input_sizes} do not match (|X|, |A|)=({nx}, {na})")
    probs = px.probs[:, None, None] * pa_given_x.table[:, :, None] * py_given_xa.table
    # renormalise rounding drift only; inputs are already validated
    return Joint3(probs / probs.sum())


def joint_batch(px: np.ndarray, policies: np.ndarray, channel: np.ndarray) -> np.ndarray:
    """Joints for a stack of policies ``policies[..., x, a]``; returns ``[..., x, a, y]``."""
    return px[:, None, None] * policies[..., :, :, None] * channel


def action_terms(p: np.ndarray) -> dict[str, np.ndarray]:
    """Every information term the rate regions need, for joints ``p[..., x, a, y]``."""
    h_xay = _entropy_last(p, 3)
    h_xa = _entropy_last(p.sum(axis=-1), 2)
    h_ay = _entropy_last(p.sum(axis=-3), 2)
    h_x = _entropy_last(p.sum(axis=(-2, -1)), 1)
    h_a = _entropy_last(p.sum(axis=(-3, -1)), 1)
    h_y = _entropy_last(p.sum(axis=(-3, -2)), 1)
    return {
        "H(X)": h_x,
        "H(Y)": h_y,
        "H(X|Y,A)": np.maximum(h_xay - h_ay, 0.0),
        "H(Y|X,A)": np.maximum(h_xay - h_xa, 0.0),
        "H(X,Y|A)": np.maximum(h_xay - h_a, 0.0),
        "I(X;A)": np.maximum(h_x + h_a - h_xa, 0.0),
        "I(Y;A)": np.maximum(h_y + h_a - h_ay, 0.0),
    }


@dataclass(frozen=True, eq=False)
class ActionModel:
    """Source pmf, action policy, action-dependent channel, cost and budget."""

    px: Pmf
    pa_given_x: CondPmf
    py_given_xa: CondPmf
    cost_per_action: np.ndarray
    budget: float

    def __post_init__(self):
        cost = _frozen(self.cost_per_action)
        if cost.shape != (self.pa_given_x.output_size,):
            raise ValueError("cost vector length must equal |A|")
        if not np.all(np.isfinite(cost)):
            raise ValueError("action costs must be finite")
        if not (self.budget >= 0):
            raise ValueError("budget must be >= 0")
        object.__setattr__(self, "cost_per_action", cost)
        object.__setattr__(self, "budget", float(self.budget))
        joint_from_factors(self.px, self.pa_given_x, self.py_given_xa)

    @property
    def sizes(self) -> tuple[int, int, int]:
        return (self.px.alphabet_size, self.pa_given_x.output_size, self.py_given_xa.output_size)

    def joint(self) -> Joint3:
        return joint_from_factors(self.px, self.pa_given_x, self.py_given_xa)

    def with_policy(self, policy) -> "ActionModel":
        pol = policy if isinstance(policy, CondPmf) else CondPmf(policy)
        return ActionModel(self.px, pol, self.py_given_xa, self.cost_per_action, self.budget)

    def cost(self) -> float:
        return expected_cost(self.joint(), self.cost_per_action)

    def to_dict(self) -> dict:
        nx, na, ny = self.sizes
        return {
            "alphabet_sizes": {"x": nx, "a": na, "y": ny},
            "px": self.px.probs.tolist(),
            "pa_given_x": self.pa_given_x.table.tolist(),
            "py_given_xa": self.py_given_xa.table.tolist(),
            "cost": self.cost_per_action.tolist(),
            "budget": self.budget,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ActionModel":
        try:
            sizes = d["alphabet_sizes"]
            nx, na, ny = int(sizes["x"]), int(sizes["a"]), int(sizes["y"])
            px = np.asarray(d["px"], dtype=float).reshape(nx)
            pax = np.asarray(d["pa_given_x"], dtype=float).reshape(nx, na)
            pyxa = np.asarray(d["py_given_xa"], dtype=float).reshape(nx, na, ny)
            cost = np.asarray(d["cost"], dtype=float).reshape(na)
            budget = float(d["budget"])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed action model document: {exc}") from exc
        return cls(Pmf(px), CondPmf(pax), CondPmf(pyxa), cost, budget)

    def to_json(self, path: str | Path | None = None) -> str:
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text

    @classmethod
    def from_json(cls, source: str | Path) -> "ActionModel":
        text = str(source)
        if not text.lstrip().startswith("{"):
            text = Path(source).read_text()
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ValueError(f"model is not valid JSON: {exc}") from exc
