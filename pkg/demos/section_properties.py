"""Cross-section benchmark: area and moments of a skew quadrilateral.

All three mapping schemes integrate the same quantities over the mapped
element; for straight edges they produce identical transformations and
therefore identical (exact) section properties.
"""

import numpy as np

from quadplate import (
    QuadGeometry,
    build_scheme,
    gauss_rule,
    polygon_section_properties,
    section_properties,
)

VERTICES = [[0.0, 0.0], [8.0, 0.0], [4.0, 3.0], [0.0, 5.0]]


def main():
    quad = QuadGeometry(VERTICES)
    rule = gauss_rule(3)

    exact = polygon_section_properties(quad.vertices)
    print("quadrilateral:", np.asarray(VERTICES).tolist())
    print(f"closed-form:   A={exact.area:.6f}  I_x1={exact.i_x1:.6f}  "
          f"I_x2={exact.i_x2:.6f}  I_x1x2={exact.i_x1x2:.6f}")
    print()
    print(f"{'scheme':14s}{'area':>12s}{'I_x1':>12s}{'I_x2':>12s}"
          f"{'I_x1x2':>12s}{'max |delta|':>14s}")
    for kind in ("bilinear", "serendipity8", "pascal6"):
        scheme = build_scheme(quad, kind)
        props = section_properties(scheme, rule)
        delta = max(
            abs(props.area - exact.area),
            abs(props.i_x1 - exact.i_x1),
            abs(props.i_x2 - exact.i_x2),
            abs(props.i_x1x2 - exact.i_x1x2),
        )
        print(f"{kind:14s}{props.area:12.6f}{props.i_x1:12.6f}"
              f"{props.i_x2:12.6f}{props.i_x1x2:12.6f}{delta:14.2e}")
    print()
    print("a 3x3 Gauss rule integrates these polynomials exactly, so every")
    print("scheme reproduces the closed-form values to machine precision.")


if __name__ == "__main__":
    main()
