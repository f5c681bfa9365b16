"""Case descriptions, built-in benchmark cases, runners and report output.

A case is a JSON document with a material block, exactly one geometry
source (a single quad, a triangle/quad mesh generator, or an explicit
mesh) and an analysis block.  Built-in cases reproduce the benchmark
plates with the normalized material (E=1365, nu=0.3, t=0.2, rho=5), for
which the flexural rigidity D and rho*t*a^4 both equal one.
"""

from __future__ import annotations

import copy
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidCaseError
from .mapping import (
    QuadGeometry,
    SCHEME_KINDS,
    build_scheme,
    compute_poles_cartesian,
    map_point,
    random_convex_quad,
)
from .modal import (
    BoundarySet,
    Mesh,
    apply_bcs,
    assemble,
    frequency_parameter,
    mesh_quad,
    mesh_triangle,
    mode_shape_samples,
    nodes_on_segment,
    solve_modes,
)
from .plate_element import PlateMaterial
from .quadrature import (
    gauss_rule,
    polygon_section_properties,
    section_properties,
)

_BENCHMARK_MATERIAL = {"E": 1365.0, "nu": 0.3, "t": 0.2, "rho": 5.0}

_ANALYSIS_DEFAULTS = {
    "scheme": "pascal6",
    "gauss": 3,
    "modes": 6,
    "normalization": "plain",
    "rotary": False,
    "workers": 1,
    "mode_shapes": False,
}

# Benchmark geometries.  The isosceles triangle is clamped along x1 = 0
# (edge of length a/2), spans the reference length a normal to it, apex on
# the symmetry line; triangle vertices are ordered (base corner, apex,
# base corner) for the collapsed-tip mesh generator.
_SECTION_QUAD = [[0.0, 0.0], [8.0, 0.0], [4.0, 3.0], [0.0, 5.0]]
_ISOSCELES_TRIANGLE = [[0.0, 0.0], [1.0, 0.25], [0.0, 0.5]]
_EQUILATERAL_TRIANGLE = [[0.0, 0.0], [math.sqrt(3.0) / 2.0, 0.5], [0.0, 1.0]]
_CLAMPED_QUAD = [[0.0, 0.0], [1.0, 0.0], [0.7929, 0.7727], [0.2394, 0.6577]]
_CANTILEVER_QUAD = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.433, 0.75]]


def builtin_case_names() -> tuple:
    return tuple(sorted(_BUILTIN_BUILDERS))


def _case_paper_quad(seed):
    return {
        "name": "paper-quad",
        "material": dict(_BENCHMARK_MATERIAL),
        "geometry": {"quad": {"vertices": _SECTION_QUAD}},
        "analysis": {"scheme": "all"},
    }


def _case_random_quad(seed):
    rng = np.random.default_rng(0 if seed is None else seed)
    quad = random_convex_quad(rng, scale=2.0)
    return {
        "name": "random-quad",
        "material": dict(_BENCHMARK_MATERIAL),
        "geometry": {"quad": {"vertices": quad.vertices.tolist()}},
        "analysis": {"scheme": "all"},
    }


def _case_cantilever_isosceles(seed):
    return {
        "name": "cantilever-isosceles",
        "material": dict(_BENCHMARK_MATERIAL),
        "geometry": {
            "triangle": {
                "vertices": _ISOSCELES_TRIANGLE,
                "levels": [1, 2, 3],
                "clamped_edges": [2],
            },
            "reference_length": 1.0,
        },
        "analysis": {"normalization": "plain"},
    }


def _case_clamped_isosceles(seed):
    return {
        "name": "clamped-isosceles",
        "material": dict(_BENCHMARK_MATERIAL),
        "geometry": {
            "triangle": {
                "vertices": _ISOSCELES_TRIANGLE,
                "levels": [1, 2, 3],
                "clamped_edges": [0, 1, 2],
            },
            "reference_length": 1.0,
        },
        "analysis": {"normalization": "per_pi2"},
    }


def _case_clamped_equilateral(seed):
    return {
        "name": "clamped-equilateral",
        "material": dict(_BENCHMARK_MATERIAL),
        "geometry": {
            "triangle": {
                "vertices": _EQUILATERAL_TRIANGLE,
                "levels": [1, 2, 3],
                "clamped_edges": [0, 1, 2],
            },
            "reference_length": 1.0,
        },
        "analysis": {"normalization": "per_pi2"},
    }


def _case_clamped_quad(seed):
    return {
        "name": "clamped-quad",
        "material": dict(_BENCHMARK_MATERIAL),
        "geometry": {
            "quad": {
                "vertices": _CLAMPED_QUAD,
                "meshes": [[2, 2], [4, 4], [6, 6], [8, 8]],
                "clamped_edges": [0, 1, 2, 3],
            },
            "reference_length": 1.0,
        },
        "analysis": {"normalization": "per_pi2"},
    }


def _case_cantilever_quad(seed):
    return {
        "name": "cantilever-quad",
        "material": dict(_BENCHMARK_MATERIAL),
        "geometry": {
            "quad": {
                "vertices": _CANTILEVER_QUAD,
                "meshes": [[2, 2], [4, 4], [6, 6], [8, 8]],
                "clamped_edges": [0],
            },
            "reference_length": 1.0,
        },
        "analysis": {"normalization": "per_pi2"},
    }


_BUILTIN_BUILDERS = {
    "paper-quad": _case_paper_quad,
    "random-quad": _case_random_quad,
    "cantilever-isosceles": _case_cantilever_isosceles,
    "clamped-isosceles": _case_clamped_isosceles,
    "clamped-equilateral": _case_clamped_equilateral,
    "clamped-quad": _case_clamped_quad,
    "cantilever-quad": _case_cantilever_quad,
}


@dataclass
class CaseFile:
    """A validated case: material, one geometry source, analysis options."""

    name: str
    material: PlateMaterial
    geometry: dict
    analysis: dict
    reference_length: float = 1.0


def load_case(source: str, seed=None, overrides: dict | None = None) -> CaseFile:
    """Load a case from a built-in name or a JSON file path."""
    if source in _BUILTIN_BUILDERS:
        raw = _BUILTIN_BUILDERS[source](seed)
    else:
        try:
            with open(source, "r", encoding="utf-8") as handle:
                raw = json.load(handle)
        except FileNotFoundError:
            raise InvalidCaseError(
                f"{source!r} is neither a built-in case "
                f"{builtin_case_names()} nor a readable file"
            ) from None
        except json.JSONDecodeError as exc:
            raise InvalidCaseError(f"malformed case file {source}: {exc}") from exc
    return parse_case(raw, overrides=overrides)


def parse_case(raw: dict, overrides: dict | None = None) -> CaseFile:
    if not isinstance(raw, dict):
        raise InvalidCaseError("case document must be a JSON object")
    material_block = raw.get("material")
    if not isinstance(material_block, dict):
        raise InvalidCaseError("case needs a material block")
    try:
        material = PlateMaterial(
            E=float(material_block["E"]),
            nu=float(material_block["nu"]),
            t=float(material_block["t"]),
            rho=float(material_block["rho"]),
        )
    except KeyError as exc:
        raise InvalidCaseError(f"material block misses {exc}") from exc

    geometry = raw.get("geometry")
    if not isinstance(geometry, dict):
        raise InvalidCaseError("case needs a geometry block")
    sources = [key for key in ("quad", "triangle", "mesh") if key in geometry]
    if len(sources) != 1:
        raise InvalidCaseError(
            f"geometry needs exactly one of quad/triangle/mesh, got {sources}"
        )

    analysis = dict(_ANALYSIS_DEFAULTS)
    analysis.update(raw.get("analysis") or {})
    if overrides:
        analysis.update({k: v for k, v in overrides.items() if v is not None})
    if analysis["scheme"] not in SCHEME_KINDS + ("all",):
        raise InvalidCaseError(f"unknown scheme {analysis['scheme']!r}")
    if analysis["normalization"] not in ("plain", "per_pi2"):
        raise InvalidCaseError(
            f"unknown normalization {analysis['normalization']!r}"
        )
    analysis["gauss"] = int(analysis["gauss"])
    analysis["modes"] = int(analysis["modes"])
    analysis["workers"] = int(analysis["workers"])

    return CaseFile(
        name=str(raw.get("name", "case")),
        material=material,
        geometry=copy.deepcopy(geometry),
        analysis=analysis,
        reference_length=float(geometry.get("reference_length", 1.0)),
    )


# ---------------------------------------------------------------------------
# geometry resolution
# ---------------------------------------------------------------------------

def _attach_boundary_sets(mesh: Mesh, polygon: np.ndarray, block: dict):
    n_edges = polygon.shape[0]
    for key, condition in (("clamped_edges", "clamped"),
                           ("ss_edges", "simply_supported")):
        for edge in block.get(key, ()):
            edge = int(edge)
            if not 0 <= edge < n_edges:
                raise InvalidCaseError(f"edge index {edge} out of range")
            nodes = nodes_on_segment(
                mesh, polygon[edge], polygon[(edge + 1) % n_edges]
            )
            mesh.boundary_sets[f"{condition}-edge-{edge}"] = BoundarySet(
                condition=condition, nodes=nodes
            )


def case_meshes(case: CaseFile) -> list:
    """Materialize the case geometry into labelled meshes."""
    geometry = case.geometry
    if "quad" in geometry:
        block = geometry["quad"]
        vertices = np.asarray(block["vertices"], dtype=float)
        out = []
        for m, n in block.get("meshes", [[1, 1]]):
            mesh = mesh_quad(vertices, int(m), int(n))
            _attach_boundary_sets(mesh, vertices, block)
            out.append((f"{int(m)}x{int(n)}", mesh))
        return out
    if "triangle" in geometry:
        block = geometry["triangle"]
        vertices = np.asarray(block["vertices"], dtype=float)
        out = []
        for level in block.get("levels", [1]):
            mesh = mesh_triangle(vertices, int(level))
            _attach_boundary_sets(mesh, vertices, block)
            out.append((f"{3 * int(level) ** 2}-elements", mesh))
        return out
    block = geometry["mesh"]
    boundary = {
        name: BoundarySet(condition=entry["condition"],
                          nodes=tuple(entry["nodes"]))
        for name, entry in (block.get("boundary_sets") or {}).items()
    }
    mesh = Mesh(
        nodes=np.asarray(block["nodes"], dtype=float),
        elements=np.asarray(block["elements"], dtype=int),
        boundary_sets=boundary,
    )
    return [("mesh", mesh)]


def _single_quad(case: CaseFile) -> QuadGeometry:
    geometry = case.geometry
    if "quad" not in geometry:
        raise InvalidCaseError(
            "this analysis needs a single-quad geometry, not a mesh"
        )
    block = geometry["quad"]
    meshes = block.get("meshes", [[1, 1]])
    if meshes != [[1, 1]]:
        raise InvalidCaseError(
            "this analysis runs on a single quad; drop the meshes list"
        )
    return QuadGeometry(np.asarray(block["vertices"], dtype=float))


def _requested_schemes(case: CaseFile) -> tuple:
    scheme = case.analysis["scheme"]
    return SCHEME_KINDS if scheme == "all" else (scheme,)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass
class Report:
    """Machine-readable run results plus run metadata."""

    kind: str
    meta: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "meta": self.meta, "tables": self.tables}

    @classmethod
    def from_dict(cls, data: dict) -> "Report":
        return cls(kind=data["kind"], meta=data["meta"], tables=data["tables"])

    def __eq__(self, other):
        return isinstance(other, Report) and self.to_dict() == other.to_dict()

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        if self.kind == "modal":
            lines = ["mesh,mode,omega,param_plain,param_per_pi2"]
            for row in self.tables["rows"]:
                lines.append(
                    f"{row['mesh']},{row['mode']},{row['omega']:.6f},"
                    f"{row['param_plain']:.6f},{row['param_per_pi2']:.6f}"
                )
            return "\n".join(lines) + "\n"
        if self.kind == "compare":
            s1, s2 = self.tables["schemes"]
            lines = [f"mesh,mode,param_{s1},param_{s2},rel_diff"]
            for row in self.tables["rows"]:
                lines.append(
                    f"{row['mesh']},{row['mode']},{row[s1]:.6f},"
                    f"{row[s2]:.6f},{row['rel_diff']:.6e}"
                )
            return "\n".join(lines) + "\n"
        if self.kind == "sectprops":
            lines = ["scheme,area,i_x1,i_x2,i_x1x2"]
            exact = self.tables["exact"]
            lines.append(
                f"exact,{exact['area']:.6f},{exact['i_x1']:.6f},"
                f"{exact['i_x2']:.6f},{exact['i_x1x2']:.6f}"
            )
            for row in self.tables["schemes"]:
                lines.append(
                    f"{row['scheme']},{row['area']:.6f},{row['i_x1']:.6f},"
                    f"{row['i_x2']:.6f},{row['i_x1x2']:.6f}"
                )
            return "\n".join(lines) + "\n"
        if self.kind == "mapcheck":
            lines = ["key,value"]
            for key, value in _flatten(self.tables):
                lines.append(f"{key},{value}")
            return "\n".join(lines) + "\n"
        raise InvalidCaseError(f"no CSV layout for report kind {self.kind!r}")

    def to_plot(self) -> str:
        shapes = self.tables.get("mode_shapes")
        if not shapes:
            raise InvalidCaseError(
                "no mode-shape samples in report; run modal with mode_shapes"
            )
        blocks = []
        for entry in shapes:
            lines = [f"# {entry['mesh']} mode {entry['mode']}"]
            lines += [
                f"{x:.6e} {y:.6e} {z:.6e}" for x, y, z in entry["points"]
            ]
            blocks.append("\n".join(lines))
        return "\n\n".join(blocks) + "\n"


def _flatten(data, prefix=""):
    items = []
    if isinstance(data, dict):
        for key in sorted(data):
            items.extend(_flatten(data[key], f"{prefix}{key}."))
    elif isinstance(data, (list, tuple)):
        for idx, value in enumerate(data):
            items.extend(_flatten(value, f"{prefix}{idx}."))
    else:
        value = f"{data:.6e}" if isinstance(data, float) else str(data)
        items.append((prefix.rstrip("."), value))
    return items


def emit(report: Report, fmt: str = "csv", destination: str = "-"):
    """Write a report as csv, json, or gnuplot-style xyz blocks."""
    if fmt == "csv":
        text = report.to_csv()
    elif fmt == "json":
        text = report.to_json()
    elif fmt == "plot":
        text = report.to_plot()
    else:
        raise InvalidCaseError(f"unknown output format {fmt!r}")
    if destination in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(destination, "w", encoding="utf-8") as handle:
            handle.write(text)


# ---------------------------------------------------------------------------
# runners
# ---------------------------------------------------------------------------

def run_sectprops(case: CaseFile) -> Report:
    """Section properties of a single quad under each requested scheme,
    with deltas against the closed-form polygon values."""
    quad = _single_quad(case)
    rule = gauss_rule(case.analysis["gauss"])
    exact = polygon_section_properties(quad.vertices)
    rows = []
    for kind in _requested_schemes(case):
        scheme = build_scheme(quad, kind)
        props = section_properties(scheme, rule)
        row = {"scheme": kind}
        row.update(props.as_dict())
        row.update({
            f"delta_{key}": value - exact.as_dict()[key]
            for key, value in props.as_dict().items()
        })
        rows.append(row)
    return Report(
        kind="sectprops",
        meta={
            "case": case.name,
            "gauss": case.analysis["gauss"],
            "vertices": quad.vertices.tolist(),
        },
        tables={"exact": exact.as_dict(), "schemes": rows},
    )


def run_mapcheck(case: CaseFile) -> Report:
    """Pole data, shape-function residuals and scheme-vs-bilinear map
    deviation for a single quad."""
    quad = _single_quad(case)
    poles = compute_poles_cartesian(quad)
    bilinear = build_scheme(quad, "bilinear")
    grid = np.linspace(-1.0, 1.0, 9)

    schemes = {}
    for kind in SCHEME_KINDS:
        scheme = build_scheme(quad, kind)
        coeffs = scheme.shapes.coeffs
        unity = coeffs.sum(axis=0)
        unity[0] -= 1.0
        kron = np.vstack([
            scheme.shapes.evaluate(row) for row in scheme.shapes.nodes.rows
        ]) - np.eye(coeffs.shape[0])
        deviation = max(
            float(np.linalg.norm(
                map_point(scheme, (t1, t2)) - map_point(bilinear, (t1, t2))
            ))
            for t1 in grid for t2 in grid
        )
        entry = {
            "partition_of_unity_residual": float(np.abs(unity).max()),
            "kronecker_residual": float(np.abs(kron).max()),
            "max_map_deviation": deviation,
            "max_map_deviation_relative": deviation / quad.diameter,
            "fallback": scheme.fallback,
        }
        if kind == "pascal6" and not scheme.fallback:
            entry["condition_estimate"] = scheme.cond_a
            entry["pole_natural"] = [
                [float(c) for c in scheme.poles.p5_nat],
                [float(c) for c in scheme.poles.p6_nat],
            ]
            entry["pole_round_trip_residual"] = max(
                float(np.linalg.norm(
                    map_point(bilinear, scheme.poles.p5_nat) - poles.p5_xy
                )),
                float(np.linalg.norm(
                    map_point(bilinear, scheme.poles.p6_nat) - poles.p6_xy
                )),
            ) / quad.diameter
        schemes[kind] = entry

    return Report(
        kind="mapcheck",
        meta={"case": case.name, "vertices": quad.vertices.tolist()},
        tables={
            "poles": {
                "parallel_flags": list(poles.parallel_flags),
                "p5_xy": None if poles.p5_xy is None else
                [float(c) for c in poles.p5_xy],
                "p6_xy": None if poles.p6_xy is None else
                [float(c) for c in poles.p6_xy],
            },
            "schemes": schemes,
        },
    )


def run_modal(case: CaseFile) -> Report:
    """Frequency table for the case's meshes, both normalizations.

    The mode count is capped per mesh at the constrained system size, so
    coarse meshes simply contribute fewer rows (the published tables leave
    those cells blank as well).
    """
    analysis = case.analysis
    if analysis["scheme"] == "all":
        raise InvalidCaseError("modal runs use one scheme; see compare")
    rule = gauss_rule(analysis["gauss"])
    a = case.reference_length
    rows = []
    mesh_meta = []
    shape_entries = []
    for label, mesh in case_meshes(case):
        system = assemble(
            mesh, case.material, scheme=analysis["scheme"], rule=rule,
            rotary=analysis["rotary"], workers=analysis["workers"],
        )
        reduced = apply_bcs(system, mesh)
        spectrum = solve_modes(reduced, min(analysis["modes"], reduced.n_dofs))
        plain = frequency_parameter(spectrum.omega, a, case.material, "plain")
        per = frequency_parameter(spectrum.omega, a, case.material, "per_pi2")
        mesh_meta.append({
            "mesh": label,
            "n_nodes": mesh.n_nodes,
            "n_elements": mesh.n_elements,
            "n_dofs": reduced.n_dofs,
            "max_residual": float(spectrum.residuals.max(initial=0.0)),
        })
        for mode in range(spectrum.omega.size):
            rows.append({
                "mesh": label,
                "mode": mode + 1,
                "omega": float(spectrum.omega[mode]),
                "param_plain": float(plain[mode]),
                "param_per_pi2": float(per[mode]),
            })
        if analysis["mode_shapes"]:
            for mode in range(spectrum.omega.size):
                shape_entries.append({
                    "mesh": label,
                    "mode": mode + 1,
                    "points": mode_shape_samples(
                        mesh, case.material, analysis["scheme"], rule,
                        reduced, spectrum.modes[:, mode],
                    ),
                })
    tables = {"rows": rows, "meshes": mesh_meta}
    if shape_entries:
        tables["mode_shapes"] = shape_entries
    return Report(
        kind="modal",
        meta={
            "case": case.name,
            "scheme": analysis["scheme"],
            "gauss": analysis["gauss"],
            "modes": analysis["modes"],
            "normalization": analysis["normalization"],
            "rotary": analysis["rotary"],
            "reference_length": a,
        },
        tables=tables,
    )


def run_compare(case: CaseFile, schemes=("bilinear", "pascal6")) -> Report:
    """Run modal under two schemes and tabulate the per-mode differences."""
    if len(schemes) != 2:
        raise InvalidCaseError("compare needs exactly two schemes")
    reports = {}
    for kind in schemes:
        sub = copy.deepcopy(case)
        sub.analysis["scheme"] = kind
        reports[kind] = run_modal(sub)
    s1, s2 = schemes
    rows = []
    key = case.analysis["normalization"]
    column = "param_per_pi2" if key == "per_pi2" else "param_plain"
    for row1, row2 in zip(reports[s1].tables["rows"],
                          reports[s2].tables["rows"]):
        v1, v2 = row1[column], row2[column]
        denom = max(abs(v1), abs(v2), 1e-300)
        rows.append({
            "mesh": row1["mesh"],
            "mode": row1["mode"],
            s1: v1,
            s2: v2,
            "rel_diff": abs(v1 - v2) / denom,
        })
    return Report(
        kind="compare",
        meta={"case": case.name, "normalization": key,
              "gauss": case.analysis["gauss"]},
        tables={"schemes": list(schemes), "rows": rows},
    )
