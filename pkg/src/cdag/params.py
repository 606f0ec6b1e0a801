"""Covariance parametrization of colored DAG models and parameter recovery.

The forward map sends per-class error variances and structural coefficients
to the covariance matrix (I - L)^-T W (I - L)^-1.  Because I - L is
triangular under a topological order, it is evaluated with two triangular
solves; an explicit inverse is never formed.  A trek-monomial summation
serves as an independent oracle for small graphs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import solve_triangular

from .coloring import ColoredDag
from .dag import Dag
from .errors import ColoringError, NotPositiveDefiniteError, SizeGuardError

TREK_GUARD_P = 8


@dataclass(frozen=True)
class ModelParams:
    """One error variance per vertex class, one coefficient per edge class,
    indexed by the canonical class ids of a ColoredDag."""

    omega: Tuple[float, ...]
    lam: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "omega", tuple(float(w) for w in self.omega))
        object.__setattr__(self, "lam", tuple(float(v) for v in self.lam))
        for w in self.omega:
            if not w > 0:
                raise ColoringError(f"error variances must be positive, got {w}")


def check_params(cd: ColoredDag, theta: ModelParams) -> None:
    if len(theta.omega) != len(cd.vertex_classes):
        raise ColoringError(
            f"expected {len(cd.vertex_classes)} omega values, got {len(theta.omega)}")
    if len(theta.lam) != len(cd.edge_classes):
        raise ColoringError(
            f"expected {len(cd.edge_classes)} lambda values, got {len(theta.lam)}")


def expand_params(cd: ColoredDag, theta: ModelParams) -> Tuple[np.ndarray, np.ndarray]:
    """Per-vertex variance vector and p x p coefficient matrix."""
    check_params(cd, theta)
    w = np.array([theta.omega[cd.vertex_color(i)] for i in range(cd.p)])
    lam = np.zeros((cd.p, cd.p))
    for e in cd.graph.edges:
        lam[e] = theta.lam[cd.edge_color(e)]
    return w, lam


def random_params(cd: ColoredDag, rng: np.random.Generator) -> ModelParams:
    """Coefficients uniform on (-1, -0.25] u [0.25, 1), variances uniform on
    [0.5, 2]: the magnitudes used throughout the synthetic experiments."""
    nv, ne = len(cd.vertex_classes), len(cd.edge_classes)
    omega = rng.uniform(0.5, 2.0, size=nv)
    lam = rng.uniform(0.25, 1.0, size=ne) * rng.choice([-1.0, 1.0], size=ne)
    return ModelParams(tuple(omega), tuple(lam))


def parametrize(cd: ColoredDag, theta: ModelParams) -> np.ndarray:
    """Covariance matrix of the colored model at ``theta``."""
    w, lam = expand_params(cd, theta)
    order = np.array(cd.graph.topo)
    m = np.eye(cd.p) - lam[np.ix_(order, order)]  # unit upper triangular
    # sigma = M^-T diag(w) M^-1 via two triangular solves
    y = solve_triangular(m.T, np.diag(w[order]), lower=True, unit_diagonal=True)
    sigma_t = solve_triangular(m.T, y.T, lower=True, unit_diagonal=True)
    inv = np.empty_like(order)
    inv[order] = np.arange(cd.p)
    sigma = sigma_t.T[np.ix_(inv, inv)]
    sigma = (sigma + sigma.T) / 2.0
    return sigma


def _directed_paths(g: Dag, src: int) -> Dict[int, list]:
    """All directed paths from src keyed by endpoint, each a tuple of edges."""
    paths = {src: [()]}
    stack = [(src, ())]
    while stack:
        v, path = stack.pop()
        for ch in sorted(g.children(v)):
            ext = path + ((v, ch),)
            paths.setdefault(ch, []).append(ext)
            stack.append((ch, ext))
    return paths


def trek_covariance(g: Dag, omega: Sequence[float], lam: np.ndarray) -> np.ndarray:
    """Covariance by explicit trek-monomial summation: sigma_ij is the sum
    over treks of the top vertex's variance times the product of the
    coefficients along both sides.  Test oracle for ``parametrize``;
    exponential, guarded at p <= 8.
    """
    if g.p > TREK_GUARD_P:
        raise SizeGuardError(f"trek enumeration is limited to p <= {TREK_GUARD_P}")
    lam = np.asarray(lam)
    by_source = [_directed_paths(g, s) for s in range(g.p)]
    sigma = np.zeros((g.p, g.p))
    for i in range(g.p):
        for j in range(i, g.p):
            total = 0.0
            for s in range(g.p):
                to_i = by_source[s].get(i)
                to_j = by_source[s].get(j)
                if not to_i or not to_j:
                    continue
                for left in to_i:
                    wl = float(np.prod([lam[e] for e in left])) if left else 1.0
                    for right in to_j:
                        wr = float(np.prod([lam[e] for e in right])) if right else 1.0
                        total += omega[s] * wl * wr
            sigma[i, j] = sigma[j, i] = total
    return sigma


# -- minors and rational recovery functions ------------------------------


def minor(sigma: np.ndarray, rows: Sequence[int], cols: Sequence[int]) -> float:
    """Determinant of the (rows, cols) submatrix; the empty minor is 1."""
    rows = list(rows)
    cols = list(cols)
    if len(rows) != len(cols):
        raise ColoringError("minor needs index sets of equal size")
    if not rows:
        return 1.0
    sub = sigma[np.ix_(rows, cols)]
    return float(np.linalg.det(sub))


def almost_principal_minor(sigma: np.ndarray, i: int, j: int, given=()) -> float:
    """|Sigma_{ij|K}|: rows i,K against columns j,K.  Vanishes exactly when
    X_i and X_j are conditionally independent given X_K."""
    k = sorted(given)
    if i in k or j in k:
        raise ColoringError("conditioning set may not contain i or j")
    return minor(sigma, [i] + k, [j] + k)


def recover_omega(sigma: np.ndarray, graph: Optional[Dag], i: int, given=None) -> float:
    """The conditional variance |Sigma_{iA}| / |Sigma_A|; with A = pa(i)
    (the default) this returns the error variance of i on any model point."""
    if given is None:
        given = graph.parents(i)
    a = sorted(set(given))
    if i in a:
        raise ColoringError(f"identifying set for vertex {i} may not contain it")
    den = minor(sigma, a, a)
    if den == 0.0:
        raise NotPositiveDefiniteError(f"singular principal minor at {a}")
    return minor(sigma, [i] + a, [i] + a) / den


def recover_lambda(sigma: np.ndarray, graph: Optional[Dag], i: int, j: int,
                   given=None) -> float:
    """The regression quotient |Sigma_{ij|A \\ i}| / |Sigma_A|; with A = pa(j)
    (the default) this returns the coefficient on i -> j on any model point."""
    if given is None:
        given = graph.parents(j)
    a = sorted(set(given))
    if j in a:
        raise ColoringError(f"identifying set for edge ({i}, {j}) may not contain {j}")
    den = minor(sigma, a, a)
    if den == 0.0:
        raise NotPositiveDefiniteError(f"singular principal minor at {a}")
    return almost_principal_minor(sigma, i, j, [v for v in a if v != i]) / den


def recover_params(cd: ColoredDag, sigma: np.ndarray) -> ModelParams:
    """Read all base parameters back off a covariance matrix using the
    parent-set recovery quotients."""
    g = cd.graph
    omega = tuple(recover_omega(sigma, g, cd.base_parameter(c, "vertex"))
                  for c in range(len(cd.vertex_classes)))
    lam = []
    for c in range(len(cd.edge_classes)):
        i, j = cd.base_parameter(c, "edge")
        lam.append(recover_lambda(sigma, g, i, j))
    return ModelParams(omega, tuple(lam))


def vanishes(value: float, sigma: np.ndarray, tol: Optional[float] = None) -> bool:
    """Default test for a residual to count as zero at the scale of sigma."""
    if tol is None:
        tol = 1e-9 * (1.0 + float(np.abs(sigma).max()))
    return abs(value) <= tol


def is_positive_definite(sigma: np.ndarray, check_sym: float = 1e-12) -> bool:
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        return False
    scale = 1.0 + float(np.abs(sigma).max())
    if float(np.abs(sigma - sigma.T).max()) > check_sym * scale:
        return False
    try:
        np.linalg.cholesky((sigma + sigma.T) / 2.0)
    except np.linalg.LinAlgError:
        return False
    return True


def require_positive_definite(sigma: np.ndarray) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=float)
    if not is_positive_definite(sigma):
        raise NotPositiveDefiniteError("matrix is not symmetric positive definite")
    return sigma


# -- CSV dumps -------------------------------------------------------------


def write_matrix_csv(matrix: np.ndarray, path) -> None:
    """17-significant-digit rendering: values survive a parse round trip."""
    matrix = np.asarray(matrix, dtype=float)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        for row in matrix:
            writer.writerow([f"{v:.17g}" for v in row])


def read_matrix_csv(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = [[float(c) for c in row] for row in csv.reader(fh) if row]
    return np.array(rows, dtype=float)
