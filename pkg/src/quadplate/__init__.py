"""Quadrilateral geometry mapping schemes and thin-plate modal analysis."""

from .errors import (
    DegenerateGeometryError,
    InvalidCaseError,
    NonconvergenceError,
    NumericalError,
    QuadplateError,
    ValidationError,
)
from .mapping import (
    BILINEAR_MONOMIALS,
    PASCAL_MONOMIALS,
    SERENDIPITY_MONOMIALS,
    GeneralizedParams,
    Jacobian,
    MappingScheme,
    NaturalNodeTable,
    PoleSet,
    QuadGeometry,
    ShapeFunctionSet,
    bilinear_params,
    build_scheme,
    compute_poles_cartesian,
    default_pole_guess,
    jacobian,
    map_point,
    pascal_interpolation_matrix,
    pascal_shape_set,
    random_convex_quad,
    serendipity_shapes,
    solve_pole_natural,
)
from .modal import (
    BoundarySet,
    GlobalSystem,
    Mesh,
    ModalSpectrum,
    apply_bcs,
    assemble,
    frequency_parameter,
    mesh_quad,
    mesh_triangle,
    modal_analysis,
    nodes_on_segment,
    solve_modes,
)
from .plate_element import (
    ElementMatrices,
    PlateMaterial,
    SubareaWeights,
    boundary_rotation_matrix,
    curvature_operator,
    deflection_row,
    element_load,
    element_mass,
    element_matrices,
    element_stiffness,
    hermite_basis,
    natural_rigidity,
    rotation_field,
    subarea_weights,
)
from .quadrature import (
    GaussRule,
    SectionProperties,
    gauss_rule,
    integrate_element,
    polygon_section_properties,
    section_properties,
)

__version__ = "0.1.0"
