"""Scattering matrix on the tail ports, by two independent routes.

Route 1 (time domain): drive the interior with a monochromatic inflow,
u_{t+1} = E u_t + e^{-i lam t} f0, u_0 = 0, f0 = B_in alpha.  The rescaled
sequence w_t = e^{i lam t} u_t converges (rate = largest off-circle |mu|)
to w = (z I - E)^{-1} f0 with z = e^{-i lam}, and the outgoing amplitudes
are alpha_out = B_bb alpha + B_out w.

Route 2 (closed form): the same object as a finite spectral sum over the
eigenvalue clusters of E *strictly inside* the unit disk,

    Sigma(lam) = B_bb + sum_mu sum_{s < m(mu)} (z - mu)^{-s-1}
                          B_out P_mu (E - mu)^s P_mu B_in .

On-circle clusters drop out because embedded eigenstates do not couple to
the ports (P_mu B_in = 0, B_out P_mu = 0); that is what keeps the formula
finite when z itself hits an embedded eigenvalue.

The two routes share no linear algebra and are cross-checked to 1e-7 in the
test suite, including at z = -1 on fixtures where -1 is embedded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .internal_spectral import InternalMatrix, SpectralData, spectral_decompose

__all__ = [
    "NoConvergence",
    "ScatteringRecord",
    "SigmaEvaluator",
    "closed_form_sigma",
    "stationary_iterate",
    "transmission_curve",
    "unitarity_defect",
]


class NoConvergence(RuntimeError):
    """Stationary iteration failed to settle within the step budget."""


@dataclass
class ScatteringRecord:
    lam: float
    z: complex
    outgoing: np.ndarray
    method: str
    steps: int
    window_delta: float


def stationary_iterate(
    im: InternalMatrix,
    lam: float,
    alpha: np.ndarray,
    max_steps: int = 200_000,
    window: int = 5,
    rtol: float = 1e-12,
) -> ScatteringRecord:
    """Outgoing port amplitudes for inflow ``alpha`` by time iteration.

    Convergence is declared when all of the last ``window`` increments of
    the rescaled interior state are below ``rtol`` times its norm — a fixed
    horizon would be wrong because the contraction rate varies with eps.
    """
    alpha = np.asarray(alpha, dtype=complex)
    f0 = im.B_in @ alpha
    phase = np.exp(1j * lam)
    w = np.zeros(im.E.shape[0], dtype=complex)
    deltas: list[float] = []
    steps = 0
    for steps in range(1, max_steps + 1):
        w_next = phase * (im.E @ w + f0)
        deltas.append(float(np.linalg.norm(w_next - w)))
        w = w_next
        if len(deltas) >= window:
            scale = max(float(np.linalg.norm(w)), 1e-300)
            if max(deltas[-window:]) <= rtol * scale:
                break
    else:
        raise NoConvergence(
            f"no Cauchy window of {window} steps below rtol={rtol} "
            f"within {max_steps} iterations at lam={lam}"
        )
    out = im.B_bb @ alpha + im.B_out @ w
    return ScatteringRecord(
        lam=float(lam),
        z=complex(np.exp(-1j * lam)),
        outgoing=out,
        method="iteration",
        steps=steps,
        window_delta=max(deltas[-window:]),
    )


class SigmaEvaluator:
    """Precomputed closed-form scattering matrix, cheap per lambda.

    Reduces every off-circle cluster to the small port-space kernels
    K_{mu,s} = B_out P (E-mu)^s P B_in once; each evaluation is then a sum
    of N x N terms with scalar resolvent weights.
    """

    def __init__(self, im: InternalMatrix, sd: SpectralData | None = None,
                 circle_tol: float = 1e-8):
        self.im = im
        self.sd = sd if sd is not None else spectral_decompose(im.E, circle_tol=circle_tol)
        self.circle_tol = circle_tol
        self.terms: list[tuple[complex, int, np.ndarray]] = []
        self.skipped_coupling = 0.0
        scale = max(float(np.linalg.norm(im.B_in)), 1e-300)
        for c in self.sd.clusters:
            if c.on_circle:
                # embedded states must not couple to the ports; record the
                # measured coupling so tests can assert it vanishes
                cpl = float(np.linalg.norm(c.projection @ im.B_in)) / scale
                self.skipped_coupling = max(self.skipped_coupling, cpl)
                continue
            acc = c.projection @ im.B_in
            for s in range(c.mult):
                K = im.B_out @ acc
                if np.linalg.norm(K) > 1e-14 * max(np.linalg.norm(im.B_out), 1e-300) * scale or s == 0:
                    self.terms.append((c.value, s, K))
                acc = (self.im.E - c.value * np.eye(self.im.E.shape[0])) @ acc
                if np.linalg.norm(acc) < 1e-16 * scale:
                    break

    def sigma(self, lam: float) -> np.ndarray:
        z = np.exp(-1j * lam)
        out = self.im.B_bb.copy()
        for mu, s, K in self.terms:
            out = out + K / (z - mu) ** (s + 1)
        return out


def closed_form_sigma(
    im: InternalMatrix,
    lam: float,
    sd: SpectralData | None = None,
    circle_tol: float = 1e-8,
) -> np.ndarray:
    """Scattering matrix at ``lam`` from the spectral closed form."""
    return SigmaEvaluator(im, sd, circle_tol).sigma(lam)


def unitarity_defect(sigma: np.ndarray) -> float:
    n = sigma.shape[0]
    return float(np.linalg.norm(sigma.conj().T @ sigma - np.eye(n), 2))


def _inflow_vector(num_ports: int, inflow) -> np.ndarray:
    """Inflow as a normalised port-amplitude vector.

    ``inflow`` is a 0-based port index or an explicit amplitude sequence.
    """
    if np.isscalar(inflow):
        p = int(inflow)
        if not (0 <= p < num_ports):
            raise ValueError(f"inflow port {p} out of range for {num_ports} ports")
        a = np.zeros(num_ports, dtype=complex)
        a[p] = 1.0
        return a
    a = np.asarray(inflow, dtype=complex)
    if a.shape != (num_ports,):
        raise ValueError(f"inflow vector must have length {num_ports}")
    nrm = np.linalg.norm(a)
    if nrm == 0:
        raise ValueError("inflow vector must be nonzero")
    return a / nrm


def transmission_curve(
    im: InternalMatrix,
    lam_grid: np.ndarray,
    inflow=0,
    sd: SpectralData | None = None,
) -> dict[str, np.ndarray]:
    """Total transmission and reflection along a lambda grid.

    For unit inflow concentrated on one port, ``tau_sq`` is the summed
    outgoing power on the other ports and ``reflection_sq`` the power
    returned into the inflow mode; they add to 1 by unitarity.  A general
    inflow vector is normalised and "reflection" means the power returned
    into that incoming mode.
    """
    lam_grid = np.asarray(lam_grid, dtype=float)
    alpha = _inflow_vector(im.tg.num_ports, inflow)
    ev = SigmaEvaluator(im, sd)
    tau = np.empty_like(lam_grid)
    refl = np.empty_like(lam_grid)
    for i, lam in enumerate(lam_grid):
        out = ev.sigma(lam) @ alpha
        r = np.vdot(alpha, out)
        refl[i] = abs(r) ** 2
        tau[i] = float(np.linalg.norm(out) ** 2 - abs(r) ** 2)
    z = np.exp(-1j * lam_grid)
    return {
        "lambda": lam_grid,
        "re_exp_minus_i_lambda": z.real,
        "im_exp_minus_i_lambda": z.imag,
        "tau_sq": tau,
        "reflection_sq": refl,
    }
