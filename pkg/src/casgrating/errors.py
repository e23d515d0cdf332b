"""Exception types shared across the package."""

from __future__ import annotations


class CasgratingError(Exception):
    """Base class for package-specific failures."""


class ConvergenceError(CasgratingError):
    """A quadrature, series, or iteration failed to meet its tolerance.

    Parameters
    ----------
    what : str
        Short machine-readable tag (e.g. ``"lifshitz_kperp"``).
    achieved : float
        Best error estimate reached.
    required : float
        Tolerance that was requested.
    detail : str, optional
        Free-form context.
    """

    def __init__(self, what, achieved, required, detail=""):
        self.what = what
        self.achieved = achieved
        self.required = required
        self.detail = detail
        msg = (f"{what}: convergence failure, achieved {achieved:.3e} "
               f"vs required {required:.3e}")
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class PropagationError(CasgratingError):
    """Field propagation through the corrugation region failed."""


class ConfigError(CasgratingError):
    """A run configuration file is malformed.

    Carries ``path`` and 1-based ``line`` when the offending line is known
    (``line = 0`` otherwise) plus a machine-readable ``category``.
    """

    def __init__(self, message, path="", line=0, category="config"):
        self.path = path
        self.line = line
        self.category = category
        loc = f"{path}:{line}: " if line else (f"{path}: " if path else "")
        super().__init__(loc + message)
