"""Hyperelastic constitutive maps.

A potential is a scalar :class:`SmoothMap` of the flat jet components.  Jet
components enter in the derivative convention (physical partials
``u^alpha_{,I}``, one coordinate per canonical ``I``).  The gradient with
respect to these canonical coordinates is already the dual-convention
stress: ``dphi = sum_I (dphi/du_I) du_I`` is a plain canonical sum.  If the
potential is instead written in the entries ``K^{i_1...i_l}`` of a full
symmetric array, the canonical gradient is ``|I|!/I!`` times the
full-array partial derivative, since ``u_I`` fills that many entries.
"""
from __future__ import annotations

import numpy as np

from ..jetfield.jets import JetPoint, NonHolJetPoint
from ..jetfield.maps import SmoothMap
from .values import NonHolStress, VariationalStress

__all__ = ["constitutive_var", "constitutive_nhs"]


def _gradient(phi: SmoothMap, point: np.ndarray) -> np.ndarray:
    if phi.n_out != 1:
        raise ValueError("potential must be scalar-valued")
    if phi.n_in != point.shape[0]:
        raise ValueError(f"potential takes {phi.n_in} arguments, point has {point.shape[0]} components")
    return phi.jet(point, 1)[0, 1:]


def constitutive_var(phi: SmoothMap, u: JetPoint) -> VariationalStress:
    """``S_alpha^I = d phi / d u^alpha_{,I}`` in canonical coordinates."""
    g = _gradient(phi, u.flat)
    return VariationalStress(u.n, u.m, u.k, g.reshape(u.m, -1))


def constitutive_nhs(Phi: SmoothMap, p: NonHolJetPoint) -> NonHolStress:
    """Gradient of ``Phi(lambda, mu)`` split into ``(P, Pbar)``."""
    g = _gradient(Phi, p.flat)
    return NonHolStress.from_flat(p.n, p.m, p.k, g)
