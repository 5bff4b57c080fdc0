"""Synthetic test surfaces: flat grids, spheres, domes, saddles, bumps."""

from __future__ import annotations

import numpy as np

from .mesh import TriangleMesh


def grid_mesh(nx: int, ny: int, width: float, height: float,
              z_fn=None, origin=(0.0, 0.0)) -> TriangleMesh:
    """Regular triangulated grid over [0,width] x [0,height] (+origin).

    Diagonals alternate per cell so the triangulation has no global bias.
    ``z_fn(x, y)`` lifts the grid to a height field.
    """
    xs = np.linspace(0.0, width, nx) + origin[0]
    ys = np.linspace(0.0, height, ny) + origin[1]
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    Z = np.zeros_like(X) if z_fn is None else np.vectorize(z_fn)(X, Y)
    verts = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)

    def vid(i, j):
        return i * ny + j

    faces = []
    for i in range(nx - 1):
        for j in range(ny - 1):
            a, b = vid(i, j), vid(i + 1, j)
            c, d = vid(i + 1, j + 1), vid(i, j + 1)
            if (i + j) % 2 == 0:
                faces.append([a, b, c])
                faces.append([a, c, d])
            else:
                faces.append([a, b, d])
                faces.append([b, c, d])
    return TriangleMesh(verts, faces)


def icosphere(subdivisions: int = 2, radius: float = 1.0) -> TriangleMesh:
    """Icosahedron subdivided ``subdivisions`` times, projected to a sphere."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array([
        [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
        [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
        [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
    ], dtype=float)
    verts /= np.linalg.norm(verts[0])
    faces = [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ]
    verts = list(verts)
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(i, j):
            key = (i, j) if i < j else (j, i)
            if key not in cache:
                m = verts[i] + verts[j]
                m /= np.linalg.norm(m)
                cache[key] = len(verts)
                verts.append(m)
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]
        faces = new_faces
    return TriangleMesh(np.array(verts) * radius, faces)


def dome_mesh(width: float = 0.43, depth: float = 0.57, height: float = 0.1,
              n: int = 33) -> TriangleMesh:
    """Smooth dome height field over a rectangle, zero at the rim.

    Desk-scale default matches a 0.43 x 0.57 x 0.1 m model.
    """

    def z(x, y):
        return height * np.sin(np.pi * x / width) * np.sin(np.pi * y / depth)

    return grid_mesh(n, n, width, depth, z_fn=z)


def saddle_mesh(size: float = 1.0, coeff: float = 0.5, n: int = 33) -> TriangleMesh:
    """Hyperbolic-paraboloid z = c (x^2 - y^2) over a centered square."""

    def z(x, y):
        xc, yc = x - size / 2, y - size / 2
        return coeff * (xc * xc - yc * yc)

    return grid_mesh(n, n, size, size, z_fn=z)


def bump_mesh(width: float = 1.0, depth: float = 1.0, amplitude: float = 0.25,
              sigma: float = 0.12, n: int = 41, center=None) -> TriangleMesh:
    """Gaussian bump in the middle of a flat rectangle.

    With a tall narrow bump, shortest geodesics between opposite sides
    refract around the peak, the non-uniqueness fixture for splitting.
    """
    cx, cy = center if center is not None else (width / 2, depth / 2)

    def z(x, y):
        r2 = (x - cx) ** 2 + (y - cy) ** 2
        return amplitude * np.exp(-r2 / (2 * sigma * sigma))

    return grid_mesh(n, n, width, depth, z_fn=z)


def two_bump_mesh(width: float = 1.4, depth: float = 1.0, amplitude: float = 0.22,
                  sigma: float = 0.11, n: int = 41) -> TriangleMesh:
    def z(x, y):
        out = 0.0
        for cx in (width * 0.3, width * 0.7):
            r2 = (x - cx) ** 2 + (y - depth / 2) ** 2
            out = out + amplitude * np.exp(-r2 / (2 * sigma * sigma))
        return out

    return grid_mesh(int(n * 1.4), n, width, depth, z_fn=z)
