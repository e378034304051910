"""Two-input Mamdani fuzzy inference engine.

Seven triangular membership functions per variable on the normalized
universe [-1, 1] with 50% overlap (shouldered at the ends), a 49-rule
base, min implication, max aggregation and discrete center-of-gravity
defuzzification on a fixed 201-point grid.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

LABELS = ("NL", "NM", "NS", "ZR", "PS", "PM", "PL")
_LABEL_INDEX = {lab: i for i, lab in enumerate(LABELS)}

COG_POINTS = 201


@dataclass(frozen=True)
class MembershipFamily:
    """Evenly spaced triangular membership family on [-1, 1].

    Centers sit at k/3 for k = -3..3; each triangle's feet are the
    neighboring centers, so adjacent functions overlap at degree 0.5 and
    memberships form a partition of unity. NL and PL are shouldered:
    membership stays 1 beyond the outermost centers.
    """

    centers: tuple[float, ...] = tuple(np.linspace(-1.0, 1.0, 7))
    grid_points: int = COG_POINTS

    def grid(self) -> np.ndarray:
        return np.linspace(-1.0, 1.0, self.grid_points)

    def sampled(self) -> np.ndarray:
        """7 x grid_points matrix of membership degrees."""
        return _sampled_matrix(self.centers, self.grid_points)

    def degrees(self, x: float) -> list[tuple[int, float]]:
        """Active (index, degree) pairs for a clamped input; at most two."""
        c = self.centers
        x = min(c[-1], max(c[0], float(x)))
        # centers are uniform, so locate by scaled position
        step = c[1] - c[0]
        pos = (x - c[0]) / step
        i = int(pos)
        if i >= len(c) - 1:
            return [(len(c) - 1, 1.0)]
        f = pos - i
        # snap center hits that drift off by floating-point rounding
        if f < 1e-9:
            return [(i, 1.0)]
        if f > 1.0 - 1e-9:
            return [(i + 1, 1.0)]
        return [(i, 1.0 - f), (i + 1, f)]


def _sampled_matrix(centers: tuple[float, ...], n: int) -> np.ndarray:
    key = (centers, n)
    cached = _SAMPLED_CACHE.get(key)
    if cached is not None:
        return cached
    grid = np.linspace(-1.0, 1.0, n)
    m = np.zeros((len(centers), n))
    for i, c in enumerate(centers):
        if i > 0:
            left = centers[i - 1]
            up = (grid - left) / (c - left)
            m[i] = np.where((grid >= left) & (grid <= c), up, m[i])
        else:
            m[i] = np.where(grid <= c, 1.0, m[i])
        if i < len(centers) - 1:
            right = centers[i + 1]
            dn = (right - grid) / (right - c)
            m[i] = np.where((grid > c) & (grid <= right), dn, m[i])
        else:
            m[i] = np.where(grid > c, 1.0, m[i])
    _SAMPLED_CACHE[key] = m
    return m


_SAMPLED_CACHE: dict = {}

DEFAULT_FAMILY = MembershipFamily()


@dataclass(frozen=True)
class RuleBase:
    """7x7 output-label table indexed by (error label, derivative label).

    The default table is the diagonal ramp table[i][j] = clip(i + j - 3,
    0, 6): balanced antecedents land on ZR and the table is
    anti-symmetric under simultaneous negation of both inputs.
    """

    table: tuple[tuple[int, ...], ...] = tuple(
        tuple(int(np.clip(i + j - 3, 0, 6)) for j in range(7)) for i in range(7))

    @staticmethod
    def from_labels(rows: list[list[str]]) -> "RuleBase":
        """Build from a 7x7 matrix of label strings (scenario override).

        A violation of the anti-symmetry structure is reported as a
        warning, not an error, so deliberately skewed tables stay usable.
        """
        if len(rows) != 7 or any(len(r) != 7 for r in rows):
            raise ValueError("rule table must be 7x7")
        tab = tuple(tuple(_LABEL_INDEX[lab] for lab in row) for row in rows)
        for i in range(7):
            for j in range(7):
                if tab[i][j] + tab[6 - i][6 - j] != 6:
                    warnings.warn("rule table is not anti-symmetric; the "
                                  "controller loses odd symmetry")
                    return RuleBase(tab)
        return RuleBase(tab)

    def labels(self) -> list[list[str]]:
        return [[LABELS[v] for v in row] for row in self.table]


DEFAULT_RULES = RuleBase()

# precomputed pieces for the default engine hot path
_MU = DEFAULT_FAMILY.sampled()
_GRID = DEFAULT_FAMILY.grid()


def fuzzify(x: float, family: MembershipFamily = DEFAULT_FAMILY) -> list[tuple[str, float]]:
    """Active (label, degree) pairs; inputs outside [-1, 1] are clamped."""
    return [(LABELS[i], d) for i, d in family.degrees(x)]


def infer(e_norm: float, de_norm: float,
          rules: RuleBase = DEFAULT_RULES,
          family: MembershipFamily = DEFAULT_FAMILY) -> float:
    """Mamdani inference: min implication, max aggregation, discrete COG.

    At most four rules fire (two active labels per input). The aggregate
    is defuzzified by center of gravity over the family's fixed uniform
    grid. A zero-area aggregate cannot occur with partition-of-unity
    inputs but is guarded anyway and maps to 0.
    """
    if family is DEFAULT_FAMILY:
        mu, grid = _MU, _GRID
    else:
        mu, grid = family.sampled(), family.grid()
    fe = family.degrees(e_norm)
    fd = family.degrees(de_norm)
    table = rules.table
    agg = np.zeros(len(grid))
    for i, wi in fe:
        for j, wj in fd:
            w = wi if wi < wj else wj
            out = table[i][j]
            np.maximum(agg, np.minimum(mu[out], w), out=agg)
    area = agg.sum()
    if area <= 0.0:
        return 0.0
    num = (grid * agg).sum()
    if abs(num) < 1e-12 * area:
        return 0.0  # symmetric aggregate; suppress summation-order noise
    return float(num / area)
