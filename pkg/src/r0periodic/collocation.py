"""Meshes, differentiation matrices and barycentric evaluation.

Two node families are supported on one period [0, tau]:

* trigonometric collocation on the equispaced mesh t_i = tau*(i-1)/N,
  i = 1..N (N odd by default), with the closed-form first-derivative
  matrix of the trigonometric cardinal basis;
* algebraic collocation on the extremal mesh
  t_i = (tau/2)*(1 - cos(i*pi/N)), i = 0..N, either as a single
  polynomial over the period or piecewise over a breakpoint grid.

Differentiation matrices are built from closed-form entries on the
canonical domain and rescaled by the chain rule (2*pi/tau for the
trigonometric family; the algebraic entries carry the interval scaling
through the node differences).  Diagonals use the negative-sum trick
(diag = -sum of the off-diagonal row entries) so that every row sums to
zero in floating point: differentiating a constant gives exactly ~1e-13.

Periodic problems identify phi(0) with phi(tau).  ``fold_periodic``
performs that column fold for a single algebraic piece; for assembled
problems ``periodic_diff_matrix`` returns the matrix acting on the reduced
unknown set of any scheme, including the block-structured piecewise fold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EvenNodeCountError

__all__ = [
    "Mesh",
    "DiffMatrix",
    "fourier_mesh",
    "fourier_diff_matrix",
    "chebyshev_mesh",
    "chebyshev_diff_matrix",
    "fold_periodic",
    "piecewise_chebyshev_mesh",
    "periodic_diff_matrix",
    "barycentric_eval",
]

FOURIER = "fourier"
CHEBYSHEV = "chebyshev"
CHEBYSHEV_PIECEWISE = "chebyshev-piecewise"


@dataclass(frozen=True)
class Mesh:
    """Collocation mesh over one period.

    ``nodes`` lists every distinct node in increasing order.  For the
    trigonometric scheme these are the N equispaced points (the right
    endpoint tau is excluded; periodicity is implicit in the basis).  For
    the algebraic schemes both endpoints appear, and ``piece_breaks`` is
    nonempty only for the piecewise scheme.  ``degree`` is N (per piece
    when piecewise).
    """

    scheme: str
    degree: int
    period: float
    nodes: np.ndarray
    piece_breaks: tuple = ()

    @property
    def n_unknowns(self) -> int:
        """Unknowns after periodic identification (phi(0) = phi(tau))."""
        if self.scheme == FOURIER:
            return self.degree
        if self.scheme == CHEBYSHEV:
            return self.degree
        return (len(self.piece_breaks) - 1) * self.degree

    @property
    def n_pieces(self) -> int:
        return 1 if self.scheme != CHEBYSHEV_PIECEWISE else len(self.piece_breaks) - 1

    def unknown_nodes(self) -> np.ndarray:
        """Nodes carrying unknowns, in unknown order (piece-major, node-minor)."""
        if self.scheme == FOURIER:
            return self.nodes
        return self.nodes[1:]

    def piece_nodes(self, k: int) -> np.ndarray:
        """All N+1 nodes of piece k (shared endpoints included)."""
        if self.scheme == CHEBYSHEV_PIECEWISE:
            n = self.degree
            return self.nodes[k * n:(k + 1) * n + 1]
        if k != 0:
            raise IndexError("single-piece mesh has only piece 0")
        return self.nodes


@dataclass(frozen=True)
class DiffMatrix:
    """First-derivative collocation matrix tied to the mesh it was built on."""

    matrix: np.ndarray
    mesh: Mesh


def fourier_mesh(n: int, period: float, allow_even: bool = False) -> Mesh:
    """Equispaced periodic mesh t_i = period*(i-1)/N, i = 1..N.

    N must be odd (and >= 3) unless ``allow_even`` is set: with even N the
    discrete spectrum can acquire a spurious dominant eigenvalue, so even
    meshes are opt-in for experimentation only.
    """
    if n < 3:
        raise ValueError(f"need at least 3 nodes, got N={n}")
    if n % 2 == 0 and not allow_even:
        raise EvenNodeCountError(
            f"N={n} is even; use odd N (or pass allow_even=True at your own risk)"
        )
    if not period > 0:
        raise ValueError(f"period must be positive, got {period}")
    nodes = period * np.arange(n) / n
    return Mesh(scheme=FOURIER, degree=n, period=float(period), nodes=nodes)


def fourier_diff_matrix(mesh: Mesh) -> DiffMatrix:
    """Derivative matrix of the trigonometric cardinal basis on an equispaced mesh.

    Exactly differentiates (at the nodes) every trigonometric polynomial of
    degree <= floor(N/2) for odd N.  Entries on the canonical 2*pi domain:
    0.5*(-1)^(i-j) / sin((i-j)*pi/N) for odd N (cot instead of 1/sin for
    even N), rescaled by 2*pi/period.
    """
    if mesh.scheme != FOURIER:
        raise ValueError(f"expected a fourier mesh, got {mesh.scheme!r}")
    n = mesh.degree
    k = np.arange(n)
    offset = k[:, None] - k[None, :]
    signs = np.where(offset % 2 == 0, 1.0, -1.0)
    angle = np.pi * offset / n
    with np.errstate(divide="ignore"):
        if n % 2 == 1:
            entries = 0.5 * signs / np.sin(angle)
        else:
            entries = 0.5 * signs / np.tan(angle)
    np.fill_diagonal(entries, 0.0)
    np.fill_diagonal(entries, -entries.sum(axis=1))
    return DiffMatrix(matrix=entries * (2.0 * np.pi / mesh.period), mesh=mesh)


def chebyshev_mesh(n: int, period: float) -> Mesh:
    """Extremal-node mesh t_i = (period/2)*(1 - cos(i*pi/N)), i = 0..N."""
    if n < 2:
        raise ValueError(f"need degree >= 2, got N={n}")
    if not period > 0:
        raise ValueError(f"period must be positive, got {period}")
    nodes = _extremal_nodes(n, 0.0, float(period))
    return Mesh(scheme=CHEBYSHEV, degree=n, period=float(period), nodes=nodes)


def _extremal_nodes(n: int, a: float, b: float) -> np.ndarray:
    i = np.arange(n + 1)
    nodes = a + 0.5 * (b - a) * (1.0 - np.cos(i * np.pi / n))
    nodes[0], nodes[-1] = a, b  # pin endpoints exactly
    return nodes


def _extremal_weights(n: int) -> np.ndarray:
    w = (-1.0) ** np.arange(n + 1)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def _diff_from_nodes(nodes: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Barycentric differentiation matrix for arbitrary distinct nodes."""
    gaps = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(gaps, 1.0)
    d = (weights[None, :] / weights[:, None]) / gaps
    np.fill_diagonal(d, 0.0)
    np.fill_diagonal(d, -d.sum(axis=1))
    return d


def chebyshev_diff_matrix(mesh: Mesh) -> DiffMatrix:
    """Derivative matrix on the extremal mesh; exact for polynomials of degree <= N."""
    if mesh.scheme != CHEBYSHEV:
        raise ValueError(f"expected a chebyshev mesh, got {mesh.scheme!r}")
    d = _diff_from_nodes(mesh.nodes, _extremal_weights(mesh.degree))
    return DiffMatrix(matrix=d, mesh=mesh)


def fold_periodic(diff: DiffMatrix) -> np.ndarray:
    """Fold the column of the left endpoint onto the right endpoint's column.

    Input is the full (N+1) x (N+1) single-piece algebraic matrix; output is
    the N x N matrix acting on nodal values at t_1..t_N of a function with
    phi(0) = phi(tau): column j copies column j of the original for j < N,
    and the last column is column 0 plus column N.
    """
    d = diff.matrix
    folded = d[1:, 1:].copy()
    folded[:, -1] += d[1:, 0]
    return folded


def piecewise_chebyshev_mesh(breakpoints, n_per_piece: int) -> Mesh:
    """Union of per-piece extremal meshes over a breakpoint grid.

    ``breakpoints`` must start at 0 and increase strictly to the period.
    Interior breakpoints appear once, as the shared endpoint node of the
    adjacent pieces; the total number of distinct nodes is
    pieces*N + 1 and the number of unknowns pieces*N (the node at 0 is
    identified with the node at the period).
    """
    breaks = tuple(float(b) for b in breakpoints)
    if len(breaks) < 2:
        raise ValueError("need at least two breakpoints")
    if breaks[0] != 0.0:
        raise ValueError(f"breakpoints must start at 0, got {breaks[0]}")
    if any(b1 >= b2 for b1, b2 in zip(breaks, breaks[1:])):
        raise ValueError("breakpoints must be strictly increasing")
    if n_per_piece < 2:
        raise ValueError(f"need degree >= 2 per piece, got {n_per_piece}")
    period = breaks[-1]
    nodes = [0.0]
    for a, b in zip(breaks, breaks[1:]):
        nodes.extend(_extremal_nodes(n_per_piece, a, b)[1:])
    return Mesh(scheme=CHEBYSHEV_PIECEWISE, degree=n_per_piece, period=period,
                nodes=np.array(nodes), piece_breaks=breaks)


def periodic_diff_matrix(mesh: Mesh) -> np.ndarray:
    """Differentiation matrix on the unknowns of a periodic problem.

    Trigonometric meshes are periodic by construction.  Algebraic meshes are
    folded: within each piece the derivative couples to the piece's own
    unknowns plus the last unknown of the previous piece (the shared left
    endpoint), with piece 0 wrapping to the final unknown of the last piece.
    Unknown layout is piece-major, node-minor.
    """
    if mesh.scheme == FOURIER:
        return fourier_diff_matrix(mesh).matrix
    if mesh.scheme == CHEBYSHEV:
        return fold_periodic(chebyshev_diff_matrix(mesh))
    n = mesh.degree
    pieces = mesh.n_pieces
    total = pieces * n
    out = np.zeros((total, total))
    weights = _extremal_weights(n)
    for k in range(pieces):
        local = _diff_from_nodes(mesh.piece_nodes(k), weights)
        rows = slice(k * n, (k + 1) * n)
        out[rows, k * n:(k + 1) * n] += local[1:, 1:]
        left_owner = ((k - 1) % pieces) * n + (n - 1)
        out[rows, left_owner] += local[1:, 0]
    return out


def _trig_eval(mesh: Mesh, values: np.ndarray, t: float):
    n = mesh.degree
    x = 2.0 * np.pi * ((t / mesh.period) % 1.0)
    xs = 2.0 * np.pi * np.arange(n) / n
    half = 0.5 * (x - xs)
    base = np.sin(half) if n % 2 == 1 else np.tan(half)
    hit = np.abs(np.sin(half)) < 1e-14
    if np.any(hit):
        return values[int(np.argmax(hit))]
    kernel = (-1.0) ** np.arange(n) / base
    return (kernel @ values) / kernel.sum()


def _poly_eval(nodes: np.ndarray, weights: np.ndarray, values: np.ndarray, t: float):
    gaps = t - nodes
    hit = np.abs(gaps) < 1e-15 * max(1.0, abs(t))
    if np.any(hit):
        return values[int(np.argmax(hit))]
    kernel = weights / gaps
    return (kernel @ values) / kernel.sum()


def barycentric_eval(mesh: Mesh, values, t: float):
    """Evaluate the collocation interpolant of nodal ``values`` at time ``t``.

    ``values`` has one row per mesh node (``mesh.nodes`` order) and may be a
    vector of per-node scalars or an (n_nodes, d) array.  Trigonometric
    meshes accept any real t (evaluated modulo the period); algebraic meshes
    require t in [0, period].  Values at nodes are reproduced exactly.
    """
    values = np.asarray(values)
    if values.shape[0] != len(mesh.nodes):
        raise ValueError(
            f"got {values.shape[0]} nodal values for {len(mesh.nodes)} nodes"
        )
    if mesh.scheme == FOURIER:
        return _trig_eval(mesh, values, float(t))
    t = float(t)
    if not (0.0 <= t <= mesh.period * (1.0 + 1e-12)):
        raise ValueError(f"t={t} outside [0, {mesh.period}]")
    if mesh.scheme == CHEBYSHEV:
        return _poly_eval(mesh.nodes, _extremal_weights(mesh.degree), values, t)
    breaks = np.asarray(mesh.piece_breaks)
    k = min(max(int(np.searchsorted(breaks, t, side="right")) - 1, 0),
            mesh.n_pieces - 1)
    n = mesh.degree
    return _poly_eval(mesh.piece_nodes(k), _extremal_weights(n),
                      values[k * n:(k + 1) * n + 1], t)
