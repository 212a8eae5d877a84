"""Geometric invariants and the large-scale magnitude asymptotics.

For a smooth compact domain X in odd dimension n the magnitude function
satisfies n! omega_n M_X(R) ~ c_0 R^n + c_1 R^{n-1} + c_2 R^{n-2} with

    c_0 = vol_n(X),  c_1 = m vol_{n-1}(dX),  c_2 = (m^2/2)(n-1) int_dX H dS,

m = (n+1)/2 and H the average of the principal curvatures with respect to
the outward normal of X.  The module computes the invariants analytically
for balls and shells, numerically from triangle meshes, and also builds the
full convex-body comparison polynomial sum_i V_i(X) R^i / (i! omega_i) from
intrinsic volumes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .cloud import DomainShape
from .errors import ArgumentError, MeshError, PrecisionError

#: dihedral deviation (radians) beyond which a mesh is flagged as non-smooth
SMOOTHNESS_ANGLE = 0.8


def unit_ball_volume(n: int) -> float:
    """omega_n, the volume of the unit ball in R^n (omega_0 = 1)."""
    if n < 0:
        raise ArgumentError("dimension must be nonnegative")
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


@dataclass(frozen=True)
class GeometricInvariants:
    """Volume, boundary area and total mean curvature of an n-domain."""

    dimension: int
    volume: float
    area: float
    total_mean_curvature: float


@dataclass(frozen=True)
class AsymptoticPolynomial:
    """Leading magnitude coefficients (R^n, R^{n-1}, R^{n-2}, descending).

    ``full`` optionally carries a complete ascending coefficient tuple (only
    the conjectured convex-body polynomial has meaningful lower terms).
    """

    dimension: int
    coefficients: tuple
    provenance: str
    full: tuple | None = None

    def __call__(self, R):
        if self.full is not None:
            return sum(c * R**i for i, c in enumerate(self.full))
        n = self.dimension
        return sum(c * R ** (n - j) for j, c in enumerate(self.coefficients))


def invariants_analytic(shape: DomainShape) -> GeometricInvariants:
    """Exact invariants for balls and 3D shells.

    A sphere of radius r bounding its ball from outside has H = +1/r; as the
    inner boundary of a shell the outward normal of the domain points toward
    the origin and H = -1/r, so the inner boundary contributes negatively to
    the total mean curvature.
    """
    if shape.kind == "ball":
        n, r = shape.params
        wn = unit_ball_volume(n)
        return GeometricInvariants(n, wn * r**n, n * wn * r ** (n - 1), n * wn * r ** (n - 2))
    if shape.kind == "shell":
        a, b, n = shape.params
        if n != 3:
            raise ArgumentError("analytic shell invariants are implemented for n = 3")
        volume = 4 * math.pi / 3 * (b**3 - a**3)
        area = 4 * math.pi * (a**2 + b**2)
        total_h = 4 * math.pi * (b - a)
        return GeometricInvariants(3, volume, area, total_h)
    raise ArgumentError(
        f"invariants of {shape.kind!r} domains are unsupported: the asymptotic "
        "theory requires a smooth boundary"
    )


def asymptotic_polynomial(inv: GeometricInvariants) -> AsymptoticPolynomial:
    """Leading three asymptotic magnitude coefficients from the invariants."""
    n = inv.dimension
    if n % 2 == 0:
        raise ArgumentError("the asymptotic expansion is stated for odd n")
    m = (n + 1) // 2
    norm = math.factorial(n) * unit_ball_volume(n)
    coeffs = (
        inv.volume / norm,
        m * inv.area / norm,
        (m**2 / 2) * (n - 1) * inv.total_mean_curvature / norm,
    )
    return AsymptoticPolynomial(n, coeffs, "theorem-asymptotic")


def intrinsic_volumes_ball(n: int, r: float = 1.0) -> tuple:
    """(V_0, ..., V_n) of the radius-r ball: V_j = C(n,j) omega_n / omega_{n-j} r^j."""
    if n < 1:
        raise ArgumentError("dimension must be >= 1")
    wn = unit_ball_volume(n)
    return tuple(
        math.comb(n, j) * wn / unit_ball_volume(n - j) * r**j for j in range(n + 1)
    )


def conjecture_polynomial(shape: DomainShape) -> AsymptoticPolynomial:
    """Convex-body magnitude polynomial sum_i V_i(X) R^i / (i! omega_i).

    Implemented for balls (the convex case with closed-form intrinsic
    volumes); shells are non-convex and rejected.
    """
    if shape.kind != "ball":
        raise ArgumentError("the convex-body polynomial requires a convex shape (ball)")
    n, r = shape.params
    vols = intrinsic_volumes_ball(n, r)
    full = tuple(
        vols[i] / (math.factorial(i) * unit_ball_volume(i)) for i in range(n + 1)
    )
    top3 = (full[n], full[n - 1], full[n - 2]) if n >= 2 else (full[n], full[0], 0.0)
    return AsymptoticPolynomial(n, top3, "convex-conjecture", full=full)


# -- triangle meshes -------------------------------------------------------


class SurfaceMesh:
    """Closed, consistently oriented triangle mesh in R^3.

    Validation: every directed edge appears exactly once (closed + consistent
    winding), no triangle with area below 1e-14, and positive enclosed volume
    (outward orientation).
    """

    def __init__(self, vertices, triangles):
        self.vertices = np.asarray(vertices, dtype=float)
        self.triangles = np.asarray(triangles, dtype=int)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise MeshError("vertices must be an (N, 3) array")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise MeshError("triangles must be an (M, 3) index array")
        if self.triangles.size and (
            self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices)
        ):
            raise MeshError("triangle indices out of range")
        directed = set()
        for tri in map(tuple, self.triangles):
            for e in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                if e in directed:
                    raise MeshError(f"directed edge {e} repeated: inconsistent orientation")
                directed.add(e)
        for i, j in directed:
            if (j, i) not in directed:
                raise MeshError(f"edge ({i}, {j}) has no partner: mesh is not closed")
        v = self.vertices
        t = self.triangles
        cross = np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]])
        areas = 0.5 * np.linalg.norm(cross, axis=1)
        if areas.size and areas.min() <= 1e-14:
            raise MeshError("degenerate triangle (area <= 1e-14)")
        if self.signed_volume() <= 0:
            raise MeshError("non-positive enclosed volume: mesh is inward-oriented")

    def signed_volume(self) -> float:
        v = self.vertices
        t = self.triangles
        return float(
            np.einsum(
                "ij,ij->i", v[t[:, 0]], np.cross(v[t[:, 1]], v[t[:, 2]])
            ).sum()
            / 6.0
        )


def invariants_from_mesh(mesh: SurfaceMesh) -> GeometricInvariants:
    """Discrete invariants of a closed surface mesh.

    Volume by the divergence theorem, area as the triangle-area sum and the
    total mean curvature by the lumped edge formula (1/2) sum_e l_e theta_e
    with theta_e the signed dihedral deviation (positive at convex edges).
    Meshes with sharp edges are outside the smooth-boundary hypothesis of the
    asymptotic theory; they are computed but flagged with a warning.
    """
    v = mesh.vertices
    t = mesh.triangles
    cross = np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]])
    area = float(0.5 * np.linalg.norm(cross, axis=1).sum())
    volume = mesh.signed_volume()

    normals = cross / np.linalg.norm(cross, axis=1)[:, None]
    owner = {}
    for f, tri in enumerate(map(tuple, t)):
        for e in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            owner[e] = f
    total_h = 0.0
    max_angle = 0.0
    for (i, j), f in owner.items():
        if i > j:
            continue  # visit each undirected edge once
        g = owner[(j, i)]
        edge = v[j] - v[i]
        length = np.linalg.norm(edge)
        ehat = edge / length
        # signed dihedral deviation between the two face normals, positive
        # when the edge is convex for the outward orientation
        theta = math.atan2(float(np.dot(np.cross(normals[f], normals[g]), ehat)),
                           float(np.dot(normals[f], normals[g])))
        total_h += 0.5 * length * theta
        max_angle = max(max_angle, abs(theta))
    if max_angle > SMOOTHNESS_ANGLE:
        warnings.warn(
            f"mesh has a dihedral deviation of {max_angle:.2f} rad; the "
            "asymptotic theory assumes a smooth boundary",
            stacklevel=2,
        )
    return GeometricInvariants(3, volume, area, total_h)


def icosphere(subdivisions: int = 3, radius: float = 1.0) -> SurfaceMesh:
    """Geodesic sphere mesh: subdivided icosahedron projected to the sphere."""
    if subdivisions < 0:
        raise ArgumentError("subdivisions must be nonnegative")
    phi = (1 + math.sqrt(5)) / 2
    verts = [
        (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
        (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
        (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
    ]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = [np.array(p, dtype=float) for p in verts]
    for _ in range(subdivisions):
        cache = {}
        new_faces = []

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                verts.append((verts[i] + verts[j]) / 2)
                cache[key] = len(verts) - 1
            return cache[key]

        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    pts = np.array(verts)
    pts = pts / np.linalg.norm(pts, axis=1)[:, None] * radius
    return SurfaceMesh(pts, faces)


def cube_mesh(side: float = 1.0) -> SurfaceMesh:
    """Axis-aligned cube of the given side, centered at the origin."""
    if side <= 0:
        raise ArgumentError("side must be positive")
    h = side / 2
    verts = [
        (-h, -h, -h), (h, -h, -h), (h, h, -h), (-h, h, -h),
        (-h, -h, h), (h, -h, h), (h, h, h), (-h, h, h),
    ]
    quads = [
        (0, 3, 2, 1),  # bottom (z = -h), outward -z
        (4, 5, 6, 7),  # top
        (0, 1, 5, 4),  # front (y = -h)
        (2, 3, 7, 6),  # back
        (1, 2, 6, 5),  # right (x = +h)
        (0, 4, 7, 3),  # left
    ]
    faces = []
    for a, b, c, d in quads:
        faces += [(a, b, c), (a, c, d)]
    return SurfaceMesh(verts, faces)


# -- OFF mesh files --------------------------------------------------------


def read_off(path_or_lines) -> SurfaceMesh:
    """Read a triangle mesh from the OFF subset (triangular faces only)."""
    if isinstance(path_or_lines, (str,)) and "\n" not in path_or_lines:
        with open(path_or_lines) as fh:
            lines = fh.read().splitlines()
    elif isinstance(path_or_lines, str):
        lines = path_or_lines.splitlines()
    else:
        lines = [str(l) for l in path_or_lines]
    rows = [l.split("#")[0].strip() for l in lines]
    rows = [r for r in rows if r]
    if not rows or rows[0] != "OFF":
        raise MeshError("missing OFF header")
    nv, nf, _ = (int(x) for x in rows[1].split())
    verts = [tuple(float(x) for x in rows[2 + i].split()) for i in range(nv)]
    faces = []
    for i in range(nf):
        parts = rows[2 + nv + i].split()
        if int(parts[0]) != 3:
            raise MeshError("only triangular faces are supported")
        faces.append(tuple(int(x) for x in parts[1:4]))
    return SurfaceMesh(verts, faces)


def write_off(mesh: SurfaceMesh, path) -> None:
    with open(path, "w") as fh:
        fh.write("OFF\n")
        fh.write(f"{len(mesh.vertices)} {len(mesh.triangles)} 0\n")
        for vx, vy, vz in mesh.vertices:
            fh.write(f"{vx:.17g} {vy:.17g} {vz:.17g}\n")
        for a, b, c in mesh.triangles:
            fh.write(f"3 {a} {b} {c}\n")


# -- large-R coefficient fit ----------------------------------------------


def fit_leading_coefficients(Rs, values, n: int, terms: int = 10, *, dps: int = 80) -> tuple:
    """Fit sum_j c_j R^{n-j} (j < terms) to magnitude samples at large R.

    Returns the fitted (c_0, c_1, c_2).  Rows are scaled by R^{-n} so the fit
    is relative; extra lower-order terms absorb the tail of the expansion.
    The monomial columns are nearly collinear on a narrow R range, so the
    least-squares solve runs in extended precision with column equilibration
    -- in doubles the conditioning caps the recovered coefficients around
    four digits for n = 9.
    """
    Rs = np.asarray(Rs, dtype=float)
    vals = np.asarray(values, dtype=float)
    if len(Rs) < terms:
        raise ArgumentError("need at least as many samples as fitted terms")
    with mp.workdps(dps):
        rows, rhs = [], []
        for R, v in zip(Rs, vals):
            R = mp.mpf(R)
            w = R ** (-n)
            rows.append([R ** (n - j) * w for j in range(terms)])
            rhs.append(mp.mpf(v) * w)
        norms = [mp.sqrt(mp.fsum(row[j] ** 2 for row in rows)) for j in range(terms)]
        A = mp.matrix([[row[j] / norms[j] for j in range(terms)] for row in rows])
        b = mp.matrix(rhs)
        try:
            y = mp.lu_solve(A.T * A, A.T * b)
        except ZeroDivisionError as exc:
            raise PrecisionError(
                f"least-squares system singular with {terms} terms at dps={dps}"
            ) from exc
        return tuple(float(y[j] / norms[j]) for j in range(3))
