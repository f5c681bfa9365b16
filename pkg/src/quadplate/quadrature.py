"""Gauss-Legendre rules on [-1, 1] and integration over mapped elements."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .mapping import MappingScheme, jacobian

# Nodes and weights are hard-coded (radicals up to n=5, standard 16-digit
# literals for n=6) for determinism; no root finding at runtime.
_SQRT30 = math.sqrt(30.0)
_SQRT70 = math.sqrt(70.0)
_GAUSS_TABLE = {
    1: ([0.0], [2.0]),
    2: ([-1.0 / math.sqrt(3.0), 1.0 / math.sqrt(3.0)], [1.0, 1.0]),
    3: (
        [-math.sqrt(3.0 / 5.0), 0.0, math.sqrt(3.0 / 5.0)],
        [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0],
    ),
    4: (
        [
            -math.sqrt((3.0 + 2.0 * math.sqrt(6.0 / 5.0)) / 7.0),
            -math.sqrt((3.0 - 2.0 * math.sqrt(6.0 / 5.0)) / 7.0),
            math.sqrt((3.0 - 2.0 * math.sqrt(6.0 / 5.0)) / 7.0),
            math.sqrt((3.0 + 2.0 * math.sqrt(6.0 / 5.0)) / 7.0),
        ],
        [
            (18.0 - _SQRT30) / 36.0,
            (18.0 + _SQRT30) / 36.0,
            (18.0 + _SQRT30) / 36.0,
            (18.0 - _SQRT30) / 36.0,
        ],
    ),
    5: (
        [
            -math.sqrt(5.0 + 2.0 * math.sqrt(10.0 / 7.0)) / 3.0,
            -math.sqrt(5.0 - 2.0 * math.sqrt(10.0 / 7.0)) / 3.0,
            0.0,
            math.sqrt(5.0 - 2.0 * math.sqrt(10.0 / 7.0)) / 3.0,
            math.sqrt(5.0 + 2.0 * math.sqrt(10.0 / 7.0)) / 3.0,
        ],
        [
            (322.0 - 13.0 * _SQRT70) / 900.0,
            (322.0 + 13.0 * _SQRT70) / 900.0,
            128.0 / 225.0,
            (322.0 + 13.0 * _SQRT70) / 900.0,
            (322.0 - 13.0 * _SQRT70) / 900.0,
        ],
    ),
    6: (
        [
            -0.9324695142031521,
            -0.6612093864662645,
            -0.2386191860831969,
            0.2386191860831969,
            0.6612093864662645,
            0.9324695142031521,
        ],
        [
            0.1713244923791704,
            0.3607615730481386,
            0.4679139345726910,
            0.4679139345726910,
            0.3607615730481386,
            0.1713244923791704,
        ],
    ),
}


@dataclass(frozen=True, eq=False)
class GaussRule:
    """A one-dimensional Gauss-Legendre rule on [-1, 1]."""

    order: int
    nodes: np.ndarray
    weights: np.ndarray


def gauss_rule(order: int) -> GaussRule:
    """Return the Gauss-Legendre rule of the given order (1..6)."""
    if order not in _GAUSS_TABLE:
        raise ValidationError(f"Gauss order must be in 1..6, got {order}")
    nodes, weights = _GAUSS_TABLE[order]
    n = np.array(nodes)
    w = np.array(weights)
    n.setflags(write=False)
    w.setflags(write=False)
    return GaussRule(order=order, nodes=n, weights=w)


def integrate_element(scheme: MappingScheme, f, rule: GaussRule) -> float:
    """Integrate a scalar field over the mapped element.

    ``f(theta, x)`` receives the natural point and its Cartesian image;
    the area element is det J dtheta1 dtheta2.  A non-positive Jacobian
    determinant at a quadrature point (folded mapping) raises
    ``NumericalError``.
    """
    total = 0.0
    diam = scheme.quad.diameter
    for t1, w1 in zip(rule.nodes, rule.weights):
        for t2, w2 in zip(rule.nodes, rule.weights):
            theta = (t1, t2)
            jac = jacobian(scheme, theta)
            if jac.det <= 1e-12 * diam * diam:
                raise NumericalError(
                    f"non-positive Jacobian at quadrature point {theta}"
                )
            x = scheme.params.point(theta)
            total += w1 * w2 * f(theta, x) * jac.det
    return total


@dataclass(frozen=True, eq=False)
class SectionProperties:
    """Area and second moments about the global Cartesian axes.

    Moments are taken about the axes through the origin, not the centroid:
    ``i_x1`` integrates (x2)^2, ``i_x2`` integrates (x1)^2, and
    ``i_x1x2`` is the product moment.
    """

    area: float
    i_x1: float
    i_x2: float
    i_x1x2: float

    def as_dict(self) -> dict:
        return {
            "area": self.area,
            "i_x1": self.i_x1,
            "i_x2": self.i_x2,
            "i_x1x2": self.i_x1x2,
        }


def section_properties(scheme: MappingScheme, rule: GaussRule) -> SectionProperties:
    """Area and moments of inertia of the mapped element."""
    return SectionProperties(
        area=integrate_element(scheme, lambda t, x: 1.0, rule),
        i_x1=integrate_element(scheme, lambda t, x: x[1] * x[1], rule),
        i_x2=integrate_element(scheme, lambda t, x: x[0] * x[0], rule),
        i_x1x2=integrate_element(scheme, lambda t, x: x[0] * x[1], rule),
    )


def polygon_section_properties(vertices) -> SectionProperties:
    """Closed-form polygon area and moments (Green's theorem).

    Independent of any mapping scheme; used to report exact-vs-computed
    deltas for straight-edged quadrilaterals.
    """
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = 0.5 * float(np.sum(cross))
    i_x1 = float(np.sum(cross * (y * y + y * yn + yn * yn))) / 12.0
    i_x2 = float(np.sum(cross * (x * x + x * xn + xn * xn))) / 12.0
    i_x1x2 = float(np.sum(cross * (x * yn + 2.0 * x * y + 2.0 * xn * yn + xn * y))) / 24.0
    return SectionProperties(area=area, i_x1=i_x1, i_x2=i_x2, i_x1x2=i_x1x2)
