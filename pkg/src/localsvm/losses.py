"""Smooth convex Lipschitz losses with exact first and second t-derivatives.

Both shipped families have Lipschitz constant 1 and a globally bounded
second derivative (1/4 for classification, 1/2 for regression; the test
suite re-derives both constants on a dense grid). Non-smooth losses such as
hinge are deliberately not part of the enum: every shipped loss must be
twice continuously differentiable in t.

Evaluations are numerically stable for arguments up to |y - t| ~ 700, using
log1p/logaddexp branches instead of the naive formulas.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from .errors import InputError

_LN4 = float(np.log(4.0))


def _check_finite_t(t):
    t = np.asarray(t, dtype=float)
    return t


class SmoothLoss:
    """Base loss L(y, t); subclasses fill in value/dt/dtt and constants."""

    name: str = "abstract"
    lipschitz: float = 1.0
    #: global sup of the second t-derivative, used in audit diagnostics
    d2_sup: float = np.inf
    is_classification: bool = False

    def _check_labels(self, y):
        y = np.asarray(y, dtype=float)
        if self.is_classification:
            flat = np.atleast_1d(y)
            bad = flat[np.abs(flat) != 1.0]
            if bad.size:
                raise InputError(
                    f"classification labels must be -1 or +1, got {bad[:5]!r}"
                )
        return y

    def value(self, y, t):
        raise NotImplementedError

    def shifted_value(self, y, t):
        """L*(y, t) = L(y, t) - L(y, 0); zero at t = 0, possibly negative."""
        y = np.asarray(y, dtype=float)
        return self.value(y, t) - self.value(y, np.zeros_like(y))

    def dt(self, y, t):
        raise NotImplementedError

    def dtt(self, y, t):
        raise NotImplementedError

    def __repr__(self):
        return self.__class__.__name__


class LogisticClassification(SmoothLoss):
    """L(y, t) = ln(1 + exp(-y t)) for labels y in {-1, +1}."""

    name = "logistic-classification"
    lipschitz = 1.0
    d2_sup = 0.25
    is_classification = True

    def value(self, y, t):
        y = self._check_labels(y)
        t = _check_finite_t(t)
        return np.logaddexp(0.0, -y * t)

    def dt(self, y, t):
        y = self._check_labels(y)
        t = _check_finite_t(t)
        return -y * expit(-y * t)

    def dtt(self, y, t):
        y = self._check_labels(y)
        t = _check_finite_t(t)
        u = y * t
        return expit(u) * expit(-u)


class LogisticRegression(SmoothLoss):
    """L(y, t) = -ln(4 exp(y - t) / (1 + exp(y - t))^2) for real-valued y.

    Symmetric in r = y - t with minimum 0 at r = 0; evaluated as
    |r| + 2 ln(1 + exp(-|r|)) - ln 4 to stay finite for large residuals.
    """

    name = "logistic-regression"
    lipschitz = 1.0
    d2_sup = 0.5
    is_classification = False

    def value(self, y, t):
        y = np.asarray(y, dtype=float)
        t = _check_finite_t(t)
        a = np.abs(y - t)
        return a + 2.0 * np.logaddexp(0.0, -a) - _LN4

    def dt(self, y, t):
        y = np.asarray(y, dtype=float)
        t = _check_finite_t(t)
        return -np.tanh((y - t) / 2.0)

    def dtt(self, y, t):
        y = np.asarray(y, dtype=float)
        t = _check_finite_t(t)
        e = np.exp(-np.abs(y - t))
        return 2.0 * e / (1.0 + e) ** 2


class ShiftedLossView:
    """The shifted loss L*(y, t) = L(y, t) - L(y, 0) as a loss-like object.

    Shifting changes neither derivatives nor the Lipschitz constant, so the
    view simply delegates; value() is the shifted value.
    """

    def __init__(self, base: SmoothLoss):
        self.base = base

    @property
    def name(self):
        return self.base.name + " (shifted)"

    @property
    def lipschitz(self):
        return self.base.lipschitz

    @property
    def is_classification(self):
        return self.base.is_classification

    def value(self, y, t):
        return self.base.shifted_value(y, t)

    def shifted_value(self, y, t):
        return self.base.shifted_value(y, t)

    def dt(self, y, t):
        return self.base.dt(y, t)

    def dtt(self, y, t):
        return self.base.dtt(y, t)


LOSSES = {
    LogisticClassification.name: LogisticClassification,
    LogisticRegression.name: LogisticRegression,
}


def loss_from_name(name: str) -> SmoothLoss:
    try:
        return LOSSES[name]()
    except KeyError:
        raise InputError(
            f"unknown loss {name!r}; expected one of {sorted(LOSSES)}"
        ) from None


def lipschitz_constant(loss) -> float:
    """Exact analytic |L|_1 of a loss (or shifted view)."""
    return float(loss.lipschitz)
