"""Exception types and validation diagnostics."""

from __future__ import annotations

from dataclasses import dataclass


class LatticeBandError(Exception):
    """Base class for all latticeband errors."""


class ZeroSelfSpring(LatticeBandError):
    """A spring with zero offset connecting a node to itself (physically null)."""


class UnknownBuiltin(LatticeBandError):
    """Requested built-in model name does not exist."""


class ModelError(LatticeBandError):
    """Model failed validation; carries the diagnostic list."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        lines = "; ".join(str(d) for d in self.diagnostics if d.severity == "error")
        super().__init__(f"invalid model: {lines}")


class UnknownConstantName(LatticeBandError):
    """Override name matches no spring label and no node id."""


class NegativeValue(LatticeBandError):
    """Override would set a negative stiffness or non-positive mass."""


class DegenerateSegment(LatticeBandError):
    """Path segment with coincident endpoints."""


class NotHermitian(LatticeBandError):
    """Matrix handed to the Hermitian eigensolver is not Hermitian."""


class EigenNoConvergence(LatticeBandError):
    """Eigensolver failed its residual/orthonormality contract."""


class IndefiniteStiffness(LatticeBandError):
    """Reduced stiffness has a significantly negative eigenvalue (bug or bad input)."""

    def __init__(self, message, mu=None):
        self.mu = mu
        super().__init__(message if mu is None else f"{message} at mu={mu}")


class SizeMismatch(LatticeBandError):
    """Supercell and Bloch frequency multisets have different sizes."""


@dataclass(frozen=True)
class Diagnostic:
    """One validation finding. ``severity`` is 'error' or 'warning'."""

    severity: str
    code: str
    message: str

    def __str__(self):
        return f"{self.severity}:{self.code}: {self.message}"
