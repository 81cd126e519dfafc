"""Exact mutual-information analysis of intercept-resend attacks.

Everything here works in the fixed, public coin setting: Alice draws
``t_A`` from ``{0..nT-1}`` and ``(x_A, c_A)`` uniformly, the coin angles
are known to everyone, and Eve either measures directly (IR1) or first
undoes a guessed number of steps (IR2).

Figure-scale values (``MiResult.relative``) divide the information in bits
by ``log2(2N)``, the entropy of Alice's position-coin choice, so a fully
exposed preparation reads as 1.
"""
from dataclasses import dataclass
from fractions import Fraction
import csv
import io
import json
import math

import numpy as np

from . import kernels
from .walk import CoinParams, step_powers

__all__ = [
    "ParameterSpace",
    "JointTable",
    "MiResult",
    "joint_dist_ir1",
    "joint_dist_ir2",
    "marginal",
    "mutual_information",
    "information",
    "lm05_table",
    "lm05_mutual_information",
    "sweep",
    "detection_rate",
    "FIGURE_PRESETS",
    "sweep_csv",
    "sweep_json",
    "LM05_REFERENCE",
]

IR2_AXES = ("t_A", "x_A", "c_A", "t_E", "x_E", "c_E")
IR1_AXES = ("t_A", "x_A", "c_A", "x_E", "c_E")
LM05_REFERENCE = 0.5
TABLE_ATOL = 1e-9


@dataclass(frozen=True)
class ParameterSpace:
    """Public finite sets of the analysis: cycle length, step-set size, coin."""

    N: int
    nT: int
    coin: CoinParams = CoinParams(math.pi / 4, math.pi / 4, math.pi / 4)

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"N must be >= 2, got {self.N}")
        if self.nT < 1:
            raise ValueError(f"nT must be >= 1, got {self.nT}")

    def replace(self, **kw):
        fields = {"N": self.N, "nT": self.nT, "coin": self.coin}
        if "theta" in kw:
            kw["coin"] = CoinParams(kw.pop("theta"), self.coin.xi, self.coin.zeta)
        fields.update(kw)
        return ParameterSpace(**fields)

    def to_dict(self):
        return {"N": self.N, "nT": self.nT, "coin": self.coin.to_dict()}


@dataclass(frozen=True, eq=False)
class JointTable:
    probs: np.ndarray
    axes: tuple
    strategy: str = None
    space: ParameterSpace = None

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != len(self.axes):
            raise ValueError("one axis label is needed per table dimension")
        if len(set(self.axes)) != len(self.axes):
            raise ValueError("axis labels must be distinct")
        if np.any(p < 0):
            raise ValueError("probabilities must be non-negative")
        if abs(p.sum() - 1.0) > TABLE_ATOL:
            raise ValueError(f"table sums to {p.sum()!r}, not 1")
        object.__setattr__(self, "probs", p)

    def axis_index(self, axis):
        if isinstance(axis, (int, np.integer)):
            if not 0 <= axis < len(self.axes):
                raise ValueError(f"axis {axis} out of range")
            return int(axis)
        try:
            return self.axes.index(axis)
        except ValueError:
            raise ValueError(f"unknown axis {axis!r}; table has {self.axes}") from None


@dataclass(frozen=True)
class MiResult:
    value: float
    strategy: str
    space: ParameterSpace = None

    @property
    def scale(self):
        """Bits corresponding to full knowledge of Alice's ``(x, c)``."""
        return math.log2(2 * self.space.N) if self.space is not None else 1.0

    @property
    def relative(self):
        return self.value / self.scale

    def to_dict(self):
        return {
            "strategy": self.strategy,
            "bits": self.value,
            "relative": self.relative,
            "space": None if self.space is None else self.space.to_dict(),
        }


def joint_dist_ir2(space):
    """``p(t_A,x_A,c_A,t_E,x_E,c_E) = |<x_E c_E| U^-t_E U^t_A |x_A c_A>|^2 / (2N nT^2)``."""
    N, nT = space.N, space.nT
    P = step_powers(N, space.coin, nT)
    K = kernels.ir2_kernel(P).reshape(nT, N, 2, nT, N, 2)
    return JointTable(K / (2 * N * nT * nT), IR2_AXES, "IR2", space)


def joint_dist_ir1(space):
    """``p(t_A,x_A,c_A,x_E,c_E) = |<x_E c_E| U^t_A |x_A c_A>|^2 / (2N nT)``."""
    N, nT = space.N, space.nT
    P = step_powers(N, space.coin, nT)
    K = kernels.ir1_kernel(P).reshape(nT, N, 2, N, 2)
    return JointTable(K / (2 * N * nT), IR1_AXES, "IR1", space)


def marginal(table, axis):
    """Distribution of one axis (or a tuple of axes, in the given order)."""
    if isinstance(axis, (tuple, list)):
        keep = [table.axis_index(a) for a in axis]
    else:
        keep = [table.axis_index(axis)]
    if len(set(keep)) != len(keep):
        raise ValueError("repeated axis")
    others = tuple(i for i in range(table.probs.ndim) if i not in keep)
    m = table.probs.sum(axis=others)
    order = np.argsort(np.argsort(keep))
    return np.transpose(m, order) if m.ndim > 1 else m


def mutual_information(table, group_a, group_b, denominator="singles"):
    """Information shared by two groups of axes, in bits.

    ``denominator="singles"`` divides by the product of every single-axis
    marginal; ``"groups"`` uses the two group marginals (ordinary mutual
    information between the groups). Zero cells contribute nothing.
    """
    ia = [table.axis_index(a) for a in group_a]
    ib = [table.axis_index(b) for b in group_b]
    if sorted(ia + ib) != list(range(table.probs.ndim)):
        raise ValueError("groups must partition the table's axes")
    if not ia or not ib:
        raise ValueError("both groups must be non-empty")
    if denominator == "singles":
        value = kernels.total_correlation(table.probs)
    elif denominator == "groups":
        p = np.transpose(table.probs, ia + ib)
        rows = int(np.prod([table.probs.shape[i] for i in ia]))
        value = kernels.total_correlation(p.reshape(rows, -1))
    else:
        raise ValueError(f"denominator must be 'singles' or 'groups', got {denominator!r}")
    # round-off can leave a -1e-16 on independent tables
    return MiResult(max(value, 0.0), table.strategy, table.space)


def information(strategy, space, denominator="singles"):
    """Alice-Eve information for ``strategy`` ("IR1" or "IR2") on ``space``."""
    if strategy == "IR2":
        table = joint_dist_ir2(space)
    elif strategy == "IR1":
        table = joint_dist_ir1(space)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    alice = ("t_A", "x_A", "c_A")
    eve = tuple(a for a in table.axes if a not in alice)
    return mutual_information(table, alice, eve, denominator)


def lm05_table():
    """Exact ``p(a, e)`` for a random-basis measurement on the four BB84 states.

    Both axes run over ``(0, 1, +, -)``.
    """
    same_basis = lambda a, e: a // 2 == e // 2
    p = [[Fraction(1, 8) if a == e else Fraction(0) if same_basis(a, e) else Fraction(1, 16)
          for e in range(4)] for a in range(4)]
    assert sum(sum(row) for row in p) == 1
    return p


def lm05_mutual_information():
    p = np.array(lm05_table(), dtype=np.float64)
    table = JointTable(p, ("a", "e"), "LM05")
    return mutual_information(table, ("a",), ("e",))


# --------------------------------------------------------------------------
# sweeps

_BASE = ParameterSpace(3, 7, CoinParams(math.pi / 4, math.pi / 4, math.pi / 4))

FIGURE_PRESETS = {
    "fig3a": ("theta", [2 * math.pi * k / 64 for k in range(64)], _BASE, "IR2"),
    "fig3b": ("N", list(range(2, 26)), _BASE, "IR2"),
    "fig5a": ("nT", list(range(1, 31)), _BASE.replace(N=4), "IR2"),
    "fig5b": ("nT", list(range(1, 31)), _BASE, "IR2"),
}


def _point(var, value, base):
    if var == "theta":
        return base.replace(theta=float(value))
    if var == "N":
        return base.replace(N=int(value))
    if var == "nT":
        return base.replace(nT=int(value))
    raise ValueError(f"cannot sweep over {var!r}; use theta, N or nT")


def sweep(var, values, strategy="IR2", base=_BASE, denominator="singles"):
    """One record per grid point, in grid order.

    A point that cannot be evaluated yields a record with an ``error`` entry
    instead of aborting the sweep.
    """
    values = list(values)
    if not values:
        raise ValueError("sweep grid is empty")
    if var not in ("theta", "N", "nT"):
        raise ValueError(f"cannot sweep over {var!r}; use theta, N or nT")
    records = []
    for v in values:
        try:
            res = information(strategy, _point(var, v, base), denominator)
        except (ValueError, TypeError) as exc:
            records.append({var: v, "strategy": strategy, "error": str(exc)})
            continue
        records.append({var: v, "strategy": strategy, "I_AE": res.relative, "I_AE_bits": res.value,
                        "space": res.space.to_dict()})
    return records


def _fmt(v):
    return format(v, ".12g") if isinstance(v, float) else str(v)


def sweep_csv(records, var, strategy, lm05_column=False):
    """Render sweep records as CSV text with 12 significant digits."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = [var, f"I_AE_{strategy}", f"I_AE_{strategy}_bits"]
    if lm05_column:
        header.append("I_AE_LM05")
    header.append("error")
    w.writerow(header)
    for r in records:
        row = [_fmt(r[var])]
        if "error" in r:
            row += ["", ""] + ([""] if lm05_column else []) + [r["error"]]
        else:
            row += [_fmt(r["I_AE"]), _fmt(r["I_AE_bits"])]
            if lm05_column:
                row.append(_fmt(LM05_REFERENCE))
            row.append("")
        w.writerow(row)
    return buf.getvalue()


def sweep_json(records, var, strategy, base, denominator="singles"):
    doc = {
        "variable": var,
        "strategy": strategy,
        "denominator": denominator,
        "base": base.to_dict(),
        "lm05_reference": LM05_REFERENCE,
        "records": records,
    }
    return json.dumps(doc, indent=2) + "\n"


# --------------------------------------------------------------------------
# detection


def detection_rate(strategy, space=None, mode="exact", trials=100_000, rng=None, random_theta=False):
    """Per-checked-state detection probability of an attack.

    ``mode="exact"`` enumerates the fixed-theta ensemble; ``"monte-carlo"``
    simulates ``trials`` states.
    """
    from . import adversary

    if mode not in ("exact", "monte-carlo"):
        raise ValueError(f"mode must be 'exact' or 'monte-carlo', got {mode!r}")
    if strategy == "LM05-IR":
        if mode == "exact":
            return adversary.lm05_ir_detection_exact()
        return adversary.lm05_ir_detection_mc(trials, rng)[0]
    if space is None:
        raise ValueError("a parameter space is required")
    if random_theta:
        raise NotImplementedError("detection rates are only supported in fixed-theta mode")
    if mode == "exact":
        return adversary.detection_exact(strategy, space)
    if rng is None:
        raise ValueError("monte-carlo mode needs a seeded rng")
    return adversary.detection_mc(strategy, space, trials, rng)[0]
