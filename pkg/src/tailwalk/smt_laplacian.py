"""Vertex Laplacian, spectral mapping, and persistent eigenvalues.

The unperturbed boundary matrix E0 is completely described by a weighted
vertex operator: with d the arc-to-vertex average (weight 1/n_i), d* its
adjoint for the n_i-weighted vertex inner product, and S the arc reversal,

    E0 = S (2 d* d - I),       T = d S d*   (self-adjoint in the weight).

Eigenvalues of E0 on the lifted subspace L = Ran d* + Ran S d* arise from
sigma(T) through the Joukowsky map phi(z) = (z + 1/z)/2: every T-eigenvalue
t in (-1, 1) yields the conjugate pair on the unit circle, t = +-1 yield
+-1.  The complement L-perp contributes only the *birth* eigenvalues +-1
with multiplicities fixed by the cycle structure.  Eigenvectors whose
T-eigenfunction vanishes on the boundary vertices — and all birth states —
survive the coupling unchanged for every eps: the persistent eigenvalues.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .internal_spectral import InternalMatrix, build_E
from .tailed_graph import TailedGraph

__all__ = [
    "LaplacianT",
    "EigenClassification",
    "build_operators",
    "joukowsky_preimages",
    "joukowsky",
    "classify",
    "persistent_eigenvalues",
    "lift",
    "is_bipartite",
    "birth_basis",
]


def joukowsky(z: complex) -> complex:
    return (z + 1.0 / z) / 2.0


def joukowsky_preimages(t: float, tol: float = 1e-12) -> tuple[complex, ...]:
    """Unit-circle preimages of t under phi(z) = (z + 1/z)/2.

    Requires t in [-1, 1]; the pair collapses to a single point at t = +-1.
    """
    if abs(t) > 1.0 + tol:
        raise ValueError(f"{t} is outside [-1, 1]; no unit-circle preimage")
    t = min(1.0, max(-1.0, float(t)))
    if abs(t - 1.0) < tol:
        return (1.0 + 0.0j,)
    if abs(t + 1.0) < tol:
        return (-1.0 + 0.0j,)
    s = np.sqrt(1.0 - t * t)
    return (complex(t, s), complex(t, -s))


@dataclass
class LaplacianT:
    tg: TailedGraph
    d: np.ndarray
    dstar: np.ndarray
    S: np.ndarray
    Dw: np.ndarray  # vertex-diagonal boundary weight N_j(v)/n(v)
    T: np.ndarray
    weights: np.ndarray  # n_i(v), the vertex inner-product weights

    def w_inner(self, f: np.ndarray, g: np.ndarray) -> complex:
        """Weighted vertex inner product <f, g> = sum n_i(v) f(v) conj(g(v))."""
        return complex(np.sum(self.weights * f * np.conj(g)))

    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues and W-orthonormal eigenvectors of T (ascending).

        T is self-adjoint only in the weighted inner product, so diagonalise
        the symmetrised W^{1/2} T W^{-1/2} and pull the basis back.
        """
        rw = np.sqrt(self.weights.astype(float))
        A = (rw[:, None] * self.T) / rw[None, :]
        vals, vecs = np.linalg.eigh((A + A.T) / 2.0)
        return vals, vecs / rw[:, None]


def build_operators(tg: TailedGraph) -> LaplacianT:
    M = tg.num_arcs
    nv = tg.graph.num_vertices
    d = np.zeros((nv, M))
    dstar = np.zeros((M, nv))
    for i, (_, t) in enumerate(tg.arcs):
        d[t, i] = 1.0 / tg.deg_int[t]
        dstar[i, t] = 1.0
    S = np.zeros((M, M))
    S[np.arange(M), tg.reversal] = 1.0
    Dw = np.diag(tg.tails_at / tg.total_deg)
    T = d @ S @ dstar
    return LaplacianT(tg=tg, d=d, dstar=dstar, S=S, Dw=Dw, T=T,
                      weights=tg.deg_int.astype(float))


def lift(lt: LaplacianT, lam: complex, f: np.ndarray) -> np.ndarray:
    """Isometric lift of a T-eigenfunction to an E0-eigenvector at lam.

    For lam not at +-1 this is (1 - lam S) d* f normalised by
    sqrt(2)|sin(arg lam)|; at +-1 the plain copy d* f is already isometric
    (S acts as multiplication by lam on it).
    """
    lam = complex(lam)
    df = lt.dstar @ f
    if abs(lam - 1.0) < 1e-12 or abs(lam + 1.0) < 1e-12:
        return df
    u = df - lam * (lt.S @ df)
    return u / (np.sqrt(2.0) * abs(np.sin(np.angle(lam))))


def is_bipartite(tg: TailedGraph) -> bool:
    """BFS 2-colouring of the internal graph."""
    nv = tg.graph.num_vertices
    color = np.full(nv, -1, dtype=int)
    adj: list[list[int]] = [[] for _ in range(nv)]
    for u, v in tg.graph.edges:
        adj[u].append(v)
        adj[v].append(u)
    color[0] = 0
    queue = [0]
    while queue:
        w = queue.pop()
        for x in adj[w]:
            if color[x] == -1:
                color[x] = 1 - color[w]
                queue.append(x)
            elif color[x] == color[w]:
                return False
    return True


def birth_multiplicities(tg: TailedGraph) -> tuple[int, int]:
    """(M_+1, M_-1): eigenvalue multiplicities of E0 on the non-lifted part.

    M_1 = max(0, #A/2 - #V + 1) counts independent cycles; M_-1 swaps the
    +1 of the Euler count for 1 exactly when the graph is bipartite.
    """
    half_arcs = tg.num_arcs // 2
    nv = tg.graph.num_vertices
    m1 = max(0, half_arcs - nv + 1)
    m_minus = max(0, half_arcs - nv + (1 if is_bipartite(tg) else 0))
    return m1, m_minus


def birth_basis(lt: LaplacianT, lam: float, rcond: float = 1e-9) -> np.ndarray:
    """Orthonormal basis of the birth eigenspace at lam = +-1.

    Birth states satisfy d u = 0 together with S u = -lam u, so they are
    the null space of [d; S + lam I].
    """
    if lam not in (1, -1, 1.0, -1.0):
        raise ValueError("birth eigenvalues exist only at +-1")
    stack = np.vstack([lt.d, lt.S + lam * np.eye(lt.S.shape[0])])
    return scipy.linalg.null_space(stack, rcond=rcond)


@dataclass
class EigenClassification:
    """One point of sigma_p(E0) with its provenance.

    ``T_eigenvalue`` is the Joukowsky preimage datum (None for pure birth
    points), ``inherited_mult`` the dimension lifted from T,
    ``birth_mult`` the non-lifted dimension (only at +-1), and
    ``persistent_mult`` the dimension surviving every coupling value.
    """

    value: complex
    inherited_mult: int
    birth_mult: int
    persistent_mult: int
    T_eigenvalue: float | None

    @property
    def total_mult(self) -> int:
        return self.inherited_mult + self.birth_mult


def _grouped_T_eigendata(lt: LaplacianT, tol: float = 1e-9):
    """T eigenvalues grouped to tolerance, each with a W-orthonormal basis,
    split into boundary-vanishing (persistent) and complement parts."""
    vals, vecs = lt.eigh()
    groups: list[tuple[float, np.ndarray]] = []
    i = 0
    while i < len(vals):
        j = i
        while j + 1 < len(vals) and vals[j + 1] - vals[i] < tol:
            j += 1
        groups.append((float(np.mean(vals[i : j + 1])), vecs[:, i : j + 1]))
        i = j + 1
    bd = list(lt.tg.boundary_vertices)
    out = []
    for t, F in groups:
        if bd:
            Fb = F[bd, :]
            ker = scipy.linalg.null_space(Fb, rcond=1e-9)
        else:
            ker = np.eye(F.shape[1])
        per = F @ ker  # persistent directions (vanish on the boundary)
        if ker.shape[1] < F.shape[1]:
            # complement of ker inside the group, in coefficient space
            proj = np.eye(F.shape[1]) - ker @ ker.conj().T
            comp = scipy.linalg.orth(proj) if ker.shape[1] else np.eye(F.shape[1])
            rest = F @ comp
        else:
            rest = np.zeros((F.shape[0], 0))
        out.append((t, F, per, rest))
    return out


def _w_orthonormalize(lt: LaplacianT, G: np.ndarray) -> np.ndarray:
    """Gram-Schmidt in the weighted vertex inner product."""
    cols = []
    for j in range(G.shape[1]):
        g = G[:, j].astype(complex)
        for c in cols:
            g = g - lt.w_inner(g, c) * c
        nrm = np.sqrt(lt.w_inner(g, g).real)
        if nrm > 1e-12:
            cols.append(g / nrm)
    if not cols:
        return np.zeros((G.shape[0], 0), dtype=complex)
    return np.stack(cols, axis=1)


def t_eigenbasis_split(lt: LaplacianT, t: float, tol: float = 1e-9):
    """(persistent, complement) W-orthonormal bases of Ker(T - t)."""
    for tv, F, per, rest in _grouped_T_eigendata(lt, tol):
        if abs(tv - t) < max(tol * 10, 1e-8):
            return _w_orthonormalize(lt, per), _w_orthonormalize(lt, rest)
    raise KeyError(f"{t} is not an eigenvalue of T")


def classify(tg: TailedGraph, tol: float = 1e-9) -> list[EigenClassification]:
    """Classification of sigma_p(E0) into inherited/birth/persistent parts."""
    lt = build_operators(tg)
    m1, m_minus = birth_multiplicities(tg)
    entries: dict[complex, EigenClassification] = {}

    def key(z: complex) -> complex:
        return complex(round(z.real, 9), round(z.imag, 9))

    for t, F, per, rest in _grouped_T_eigendata(lt, tol):
        s = F.shape[1]
        p = per.shape[1] if per.size else 0
        for lam in joukowsky_preimages(min(1.0, max(-1.0, t))):
            entries[key(lam)] = EigenClassification(
                value=lam,
                inherited_mult=s,
                birth_mult=0,
                persistent_mult=p,
                T_eigenvalue=t,
            )
    for lam, m in ((1.0 + 0j, m1), (-1.0 + 0j, m_minus)):
        if m == 0:
            continue
        k = key(lam)
        if k in entries:
            e = entries[k]
            entries[k] = EigenClassification(
                value=e.value,
                inherited_mult=e.inherited_mult,
                birth_mult=m,
                persistent_mult=e.persistent_mult + m,  # birth states persist
                T_eigenvalue=e.T_eigenvalue,
            )
        else:
            entries[k] = EigenClassification(
                value=lam, inherited_mult=0, birth_mult=m,
                persistent_mult=m, T_eigenvalue=None,
            )
    out = list(entries.values())
    out.sort(key=lambda e: (np.angle(e.value), abs(e.value)))
    return out


def persistent_basis(tg: TailedGraph, lam: complex, tol: float = 1e-9) -> np.ndarray:
    """Orthonormal arc-space basis of the persistent eigenspace at lam."""
    lt = build_operators(tg)
    cols = []
    t = joukowsky(complex(lam)).real
    try:
        per, _ = t_eigenbasis_split(lt, t, tol)
    except KeyError:
        per = np.zeros((tg.graph.num_vertices, 0))
    for j in range(per.shape[1]):
        cols.append(lift(lt, lam, per[:, j]))
    if abs(abs(lam) - 1) < 1e-9 and (abs(lam - 1) < 1e-9 or abs(lam + 1) < 1e-9):
        B = birth_basis(lt, int(np.sign(lam.real)))
        for j in range(B.shape[1]):
            cols.append(B[:, j].astype(complex))
    if not cols:
        return np.zeros((tg.num_arcs, 0), dtype=complex)
    Q = scipy.linalg.orth(np.stack(cols, axis=1))
    return Q


def persistent_eigenvalues(
    tg: TailedGraph,
    eps_values=(0.1, 0.5),
    tol: float = 1e-9,
) -> list[dict]:
    """Validate that classified persistent eigenspaces survive the coupling.

    For each classified eigenvalue with persistent multiplicity > 0,
    checks ||(E_eps - lam) u|| <= tol for an orthonormal basis u at every
    requested eps.  Returns one report dict per eigenvalue.
    """
    reports = []
    base = build_E(tg, 0.0)
    for entry in classify(tg, tol):
        if entry.persistent_mult == 0:
            continue
        B = persistent_basis(tg, entry.value, tol)
        worst = 0.0
        for eps in eps_values:
            im = base.at(eps)
            R = im.E @ B - entry.value * B
            if R.size:
                worst = max(worst, float(np.max(np.linalg.norm(R, axis=0))))
        reports.append(
            {
                "value": entry.value,
                "dim": B.shape[1],
                "expected_dim": entry.persistent_mult,
                "max_residual": worst,
                "eps_values": tuple(float(e) for e in eps_values),
                "ok": bool(B.shape[1] == entry.persistent_mult and worst <= tol),
            }
        )
    return reports
