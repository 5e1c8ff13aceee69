"""Binary logistic regression model and its IRLS maximum-likelihood fit.

Everything downstream (shrinkage estimators, error-matrix analysis, the
simulation harness) consumes the weighted cross-products ``X'VX`` and the
working response produced here, so this module is the single place where
probabilities, Bernoulli weights and the fitting loop are defined.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .errors import SingularSystemError

__all__ = [
    "Dataset",
    "FitConfig",
    "LogisticFit",
    "predict_probabilities",
    "log_likelihood",
    "weight_diagonal",
    "working_response",
    "irls_fit",
]


def _as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"design matrix must be 2-d, got shape {X.shape}")
    return X


def _as_vector(v, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-d, got shape {v.shape}")
    return v


@dataclass(frozen=True)
class Dataset:
    """An n-by-p real design matrix paired with a 0/1 response vector."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = _as_matrix(self.X)
        y = _as_vector(self.y, "y")
        if not np.all(np.isfinite(X)):
            raise ValueError("design matrix contains non-finite entries")
        n, p = X.shape
        if not (n >= p >= 1):
            raise ValueError(f"need n >= p >= 1, got n={n}, p={p}")
        if y.shape[0] != n:
            raise ValueError(f"response length {y.shape[0]} != row count {n}")
        if not np.all((y == 0.0) | (y == 1.0)):
            raise ValueError("response entries must be exactly 0 or 1")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class FitConfig:
    """Tuning knobs for the IRLS loop."""

    tolerance: float = 1e-6
    max_iterations: int = 100
    probability_clip: float = 1e-10

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not (0.0 < self.probability_clip < 0.5):
            raise ValueError("probability_clip must lie in (0, 1/2)")


@dataclass(frozen=True)
class LogisticFit:
    """Converged (or stalled) IRLS state.

    ``v_diag`` holds the Bernoulli variances pi*(1-pi) at the final
    coefficients and ``z`` the working response, so that
    ``beta = (X'VX)^{-1} X'Vz`` reproduces ``beta`` at convergence.
    ``loglik_trace`` records the log-likelihood after each accepted step.
    """

    beta: np.ndarray
    v_diag: np.ndarray
    z: np.ndarray
    iterations: int
    converged: bool
    final_step_norm: float
    loglik_trace: tuple = field(default=())

    def __post_init__(self):
        v = np.asarray(self.v_diag, dtype=float)
        if v.size and not (np.all(v > 0.0) and np.all(v <= 0.25 + 1e-15)):
            raise ValueError("weights must lie in (0, 1/4]")


def predict_probabilities(X, beta, clip: float = 1e-10) -> np.ndarray:
    """Success probabilities exp(x'b)/(1+exp(x'b)), clipped to [clip, 1-clip]."""
    X = _as_matrix(X)
    beta = _as_vector(beta, "beta")
    if X.shape[1] != beta.shape[0]:
        raise ValueError(
            f"X has {X.shape[1]} columns but beta has length {beta.shape[0]}"
        )
    if not np.all(np.isfinite(beta)):
        raise ValueError("beta contains non-finite entries")
    return np.clip(expit(X @ beta), clip, 1.0 - clip)


def log_likelihood(y, pi) -> float:
    """Bernoulli log-likelihood sum(y*log(pi) + (1-y)*log(1-pi))."""
    y = _as_vector(y, "y")
    pi = _as_vector(pi, "pi")
    if y.shape != pi.shape:
        raise ValueError("y and pi must have equal length")
    if np.any(pi <= 0.0) or np.any(pi >= 1.0):
        raise ValueError("probabilities must lie strictly inside (0, 1)")
    return float(np.sum(y * np.log(pi) + (1.0 - y) * np.log1p(-pi)))


def weight_diagonal(pi) -> np.ndarray:
    """Bernoulli variances pi*(1-pi); each entry lies in (0, 1/4]."""
    pi = _as_vector(pi, "pi")
    if np.any(pi <= 0.0) or np.any(pi >= 1.0):
        raise ValueError("probabilities must lie strictly inside (0, 1)")
    return pi * (1.0 - pi)


def working_response(X, beta, y, clip: float = 1e-10) -> np.ndarray:
    """Linearized response z = x'b + (y - pi)/(pi*(1-pi)) at clipped pi."""
    X = _as_matrix(X)
    beta = _as_vector(beta, "beta")
    y = _as_vector(y, "y")
    pi = predict_probabilities(X, beta, clip=clip)
    return X @ beta + (y - pi) / (pi * (1.0 - pi))


def _stable_loglik(eta: np.ndarray, y: np.ndarray) -> float:
    # sum(y*eta - log(1+exp(eta))), safe for large |eta|
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def irls_fit(data: Dataset, config: FitConfig = FitConfig()) -> LogisticFit:
    """Fit the maximum-likelihood coefficients by IRLS with step-halving.

    Starts at beta = 0 and applies Newton steps ``(X'VX)^{-1} X'(y - pi)``.
    A step that lowers the log-likelihood is halved up to 10 times; if no
    halving recovers a non-decreasing likelihood, iteration stops and the
    fit is returned with ``converged=False``.  Convergence is declared when
    the max-norm of the accepted step drops to ``config.tolerance``.

    Raises
    ------
    SingularSystemError
        If ``X'VX`` is singular at some iterate (severe collinearity or
        complete separation).
    """
    X, y = data.X, data.y
    p = data.p
    clip = config.probability_clip

    beta = np.zeros(p)
    loglik = _stable_loglik(X @ beta, y)
    trace = [loglik]
    converged = False
    step_norm = np.inf
    iterations = 0

    for iteration in range(1, config.max_iterations + 1):
        iterations = iteration
        pi = np.clip(expit(X @ beta), clip, 1.0 - clip)
        v = pi * (1.0 - pi)
        hessian = (X * v[:, None]).T @ X
        score = X.T @ (y - pi)
        try:
            step = np.linalg.solve(hessian, score)
        except np.linalg.LinAlgError as exc:
            raise SingularSystemError(
                f"X'VX singular at IRLS iteration {iteration}", iteration
            ) from exc
        if not np.all(np.isfinite(step)):
            raise SingularSystemError(
                f"non-finite IRLS step at iteration {iteration}", iteration
            )

        # a sub-tolerance step means we already sit at the optimum; taking it
        # unconditionally avoids stalling on likelihood roundoff noise
        step_norm = float(np.max(np.abs(step)))
        if step_norm <= config.tolerance:
            beta = beta + step
            loglik = _stable_loglik(X @ beta, y)
            trace.append(loglik)
            converged = True
            break

        # step-halving: never accept a likelihood decrease beyond summation
        # roundoff (the slack keeps tight tolerances from stalling at the
        # optimum on floating-point noise)
        slack = 1e-11 * (1.0 + abs(loglik))
        scale = 1.0
        accepted = False
        for _ in range(11):
            candidate = beta + scale * step
            cand_loglik = _stable_loglik(X @ candidate, y)
            if cand_loglik >= loglik - slack:
                accepted = True
                break
            scale *= 0.5
        if not accepted:
            break

        beta = candidate
        loglik = cand_loglik
        trace.append(loglik)
        step_norm = float(np.max(np.abs(scale * step)))
        if step_norm <= config.tolerance:
            converged = True
            break

    pi = np.clip(expit(X @ beta), clip, 1.0 - clip)
    v = pi * (1.0 - pi)
    z = X @ beta + (y - pi) / v
    return LogisticFit(
        beta=beta,
        v_diag=v,
        z=z,
        iterations=iterations,
        converged=converged,
        final_step_norm=step_norm,
        loglik_trace=tuple(trace),
    )
