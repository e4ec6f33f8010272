"""Gaussian-process surrogate: exact posterior, marginal likelihood, fitting.

One independent GP per output KPI over a shared scaled input matrix. The
covariance is squared-exponential with ARD lengthscales (one per encoded
dimension, in scaled space). The prior mean of each output is its training
mean; predictive variance includes the noise term, i.e. the model predicts
observations rather than the latent function.

Noise variances at or below ``NOISE_PINNED_MAX`` are treated as pinned:
they are excluded from hyperparameter search and activate the
duplicate-input rejection policy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize

from . import kernels
from .domain import DomainOfApplicability, PredictionSet, TrainingSet
from .errors import DimensionMismatch, DuplicateInput, NotPositiveDefinite, TooFewPoints

# Jitter ladder for stabilizing the Cholesky factorization, relative to the
# signal variance. The start level is small enough not to disturb noise-free
# interpolation at the 1e-6 scale; escalation handles ill-conditioned fits.
JITTER_REL_START = 1e-12
JITTER_REL_MAX = 1e-2

NOISE_PINNED_MAX = 1e-10

LS_BOUNDS = (1e-3, 1e3)
SF2_BOUNDS = (1e-12, 1e12)
SN2_BOUNDS = (1e-12, 1e8)

_FAIL = 1e25  # finite sentinel so line searches can back off a non-PD step


@dataclass(frozen=True)
class GPHyperparameters:
    """ARD lengthscales (scaled space), signal variance, noise variance."""

    lengthscales: np.ndarray
    signal_variance: float
    noise_variance: float

    def __post_init__(self):
        ls = np.ascontiguousarray(np.atleast_1d(self.lengthscales), dtype=float)
        if np.any(ls <= 0) or not np.all(np.isfinite(ls)):
            raise ValueError("lengthscales must be positive and finite")
        if not (self.signal_variance > 0 and np.isfinite(self.signal_variance)):
            raise ValueError("signal_variance must be positive and finite")
        if self.noise_variance < 0 or not np.isfinite(self.noise_variance):
            raise ValueError("noise_variance must be non-negative and finite")
        ls.flags.writeable = False
        object.__setattr__(self, "lengthscales", ls)
        object.__setattr__(self, "signal_variance", float(self.signal_variance))
        object.__setattr__(self, "noise_variance", float(self.noise_variance))

    @property
    def pinned_noise(self) -> bool:
        return self.noise_variance <= NOISE_PINNED_MAX

    def to_dict(self) -> dict:
        return {
            "lengthscales": self.lengthscales.tolist(),
            "signal_variance": self.signal_variance,
            "noise_variance": self.noise_variance,
        }

    @classmethod
    def from_dict(cls, d) -> "GPHyperparameters":
        return cls(np.asarray(d["lengthscales"]), d["signal_variance"], d["noise_variance"])


@dataclass(frozen=True)
class Prediction:
    """Posterior mean and (observation-level) variance, one entry per output."""

    mean: np.ndarray
    variance: np.ndarray


def kernel(x: np.ndarray, x2: np.ndarray, theta: GPHyperparameters) -> float:
    """Squared-exponential ARD covariance between two encoded points."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    d = theta.lengthscales.shape[0]
    if x.shape != (d,) or x2.shape != (d,):
        raise DimensionMismatch(f"points must have {d} dimensions")
    z = (x - x2) / theta.lengthscales
    return float(theta.signal_variance * math.exp(-0.5 * float(z @ z)))


def _stabilized_cholesky(K: np.ndarray, sf2: float, sn2: float) -> tuple[np.ndarray, float]:
    """Factor K + (sn2 + jitter) I = L L^T, escalating jitter as needed."""
    n = K.shape[0]
    rel = JITTER_REL_START
    while rel <= JITTER_REL_MAX:
        jitter = rel * sf2
        try:
            L = cholesky(K + (sn2 + jitter) * np.eye(n), lower=True)
            return L, jitter
        except np.linalg.LinAlgError:
            rel *= 10.0
    raise NotPositiveDefinite(
        f"kernel matrix not positive definite even at jitter {JITTER_REL_MAX} * signal_variance"
    )


def _lml_terms(Xs: np.ndarray, yc: np.ndarray, theta: GPHyperparameters):
    """Return (lml, L, alpha, K_noise_free, jitter) for centered targets."""
    K = kernels.se_kernel_matrix(Xs, Xs, theta.lengthscales, theta.signal_variance)
    L, jitter = _stabilized_cholesky(K, theta.signal_variance, theta.noise_variance)
    alpha = cho_solve((L, True), yc)
    n = len(yc)
    lml = -0.5 * float(yc @ alpha) - float(np.log(np.diag(L)).sum()) - 0.5 * n * math.log(2 * math.pi)
    return lml, L, alpha, K, jitter


def log_marginal_likelihood(ts: TrainingSet, theta: GPHyperparameters, output_index: int) -> float:
    """Log marginal likelihood of one output column under theta.

    Computed on the mean-centered column via a Cholesky factorization; the
    quadratic and determinant terms never form an explicit inverse.
    """
    if len(ts) == 0:
        raise TooFewPoints("need at least one training row")
    Xs = ts.domain.scale(ts.X)
    y = ts.Y[:, output_index]
    yc = y - y.mean()
    lml, *_ = _lml_terms(Xs, yc, theta)
    return lml


def _nlml_and_grad(p: np.ndarray, Xs: np.ndarray, yc: np.ndarray, fixed_sn2: float | None):
    """Negative LML and its gradient in log-hyperparameter space.

    Layout of p: log lengthscales (D), log sf2, then log sn2 unless the
    noise is pinned (fixed_sn2 is not None).
    """
    d = Xs.shape[1]
    ls = np.exp(p[:d])
    sf2 = float(np.exp(p[d]))
    sn2 = fixed_sn2 if fixed_sn2 is not None else float(np.exp(p[d + 1]))
    theta = GPHyperparameters(ls, sf2, sn2)
    try:
        lml, L, alpha, K, jitter = _lml_terms(Xs, yc, theta)
    except NotPositiveDefinite:
        return _FAIL, np.zeros_like(p)
    n = len(yc)
    Kinv = cho_solve((L, True), np.eye(n))
    M = np.outer(alpha, alpha) - Kinv
    # dLML/d(log ls_i) = 0.5 sum_ab M*K * ((x_a - x_b)/ls_i)^2
    grad_ls = 0.5 * kernels.weighted_sqdiff_sums(Xs, M * K, ls)
    # the jitter scales with sf2, so it rides along in the sf2 derivative
    grad_sf2 = 0.5 * (float((M * K).sum()) + jitter * float(np.trace(M)))
    grad = np.empty_like(p)
    grad[:d] = -grad_ls
    grad[d] = -grad_sf2
    if fixed_sn2 is None:
        grad[d + 1] = -0.5 * sn2 * float(np.trace(M))
    return -lml, grad


def lml_gradient(ts: TrainingSet, theta: GPHyperparameters, output_index: int) -> np.ndarray:
    """Gradient of the LML w.r.t. (log ls_1..D, log sf2, log sn2)."""
    Xs = ts.domain.scale(ts.X)
    y = ts.Y[:, output_index]
    yc = y - y.mean()
    p = np.concatenate(
        [np.log(theta.lengthscales), [math.log(theta.signal_variance), math.log(max(theta.noise_variance, 1e-300))]]
    )
    fixed = theta.noise_variance if theta.pinned_noise else None
    if fixed is not None:
        nll, g = _nlml_and_grad(p[:-1], Xs, yc, fixed)
        return np.concatenate([-g, [0.0]])
    nll, g = _nlml_and_grad(p, Xs, yc, None)
    return -g


def optimize_hyperparameters(
    ts: TrainingSet,
    theta_init: GPHyperparameters,
    output_index: int,
    *,
    seed: int = 0,
    restarts: int = 5,
) -> GPHyperparameters:
    """Maximize the LML by seeded multi-start L-BFGS-B in log space.

    The initial point is always evaluated and kept as a candidate, so the
    result is never worse than theta_init. Pinned noise stays fixed.
    Deterministic for a given seed.
    """
    if len(ts) == 0:
        raise TooFewPoints("need at least one training row")
    Xs = ts.domain.scale(ts.X)
    y = ts.Y[:, output_index]
    yc = y - y.mean()
    d = Xs.shape[1]
    fixed_sn2 = theta_init.noise_variance if theta_init.pinned_noise else None

    def pack(theta: GPHyperparameters) -> np.ndarray:
        p = list(np.log(theta.lengthscales)) + [math.log(theta.signal_variance)]
        if fixed_sn2 is None:
            p.append(math.log(max(theta.noise_variance, SN2_BOUNDS[0])))
        return np.array(p)

    def unpack(p: np.ndarray) -> GPHyperparameters:
        sn2 = fixed_sn2 if fixed_sn2 is not None else float(np.exp(p[d + 1]))
        return GPHyperparameters(np.exp(p[:d]), float(np.exp(p[d])), sn2)

    rng = np.random.default_rng([seed, output_index, 0xA11CE])
    var = max(float(yc.var()), 1e-8)
    starts = [pack(theta_init)]
    # fixed anchors at short and moderate lengthscales: with a pinned noise
    # the likelihood of rough surfaces has a cliff that funnels long-ls
    # starts into the degenerate memorization optimum at the ls lower bound
    for anchor in (0.1, 0.5):
        if len(starts) >= max(restarts, 1):
            break
        p = [math.log(anchor)] * d + [math.log(var)]
        if fixed_sn2 is None:
            p.append(math.log(var * 1e-3))
        starts.append(np.array(p))
    while len(starts) < max(restarts, 1):
        ls = np.exp(rng.uniform(math.log(0.05), math.log(2.0), size=d))
        sf2 = var * math.exp(rng.uniform(math.log(0.1), math.log(10.0)))
        p = list(np.log(ls)) + [math.log(sf2)]
        if fixed_sn2 is None:
            p.append(math.log(var * math.exp(rng.uniform(math.log(1e-6), math.log(0.1)))))
        starts.append(np.array(p))

    bounds = [(math.log(LS_BOUNDS[0]), math.log(LS_BOUNDS[1]))] * d
    bounds.append((math.log(SF2_BOUNDS[0]), math.log(SF2_BOUNDS[1])))
    if fixed_sn2 is None:
        bounds.append((math.log(SN2_BOUNDS[0]), math.log(SN2_BOUNDS[1])))

    candidates: list[tuple[float, np.ndarray]] = []
    for p0 in starts:
        p0 = np.clip(p0, [b[0] for b in bounds], [b[1] for b in bounds])
        f0, _ = _nlml_and_grad(p0, Xs, yc, fixed_sn2)
        candidates.append((f0, p0))
        res = minimize(
            _nlml_and_grad,
            p0,
            args=(Xs, yc, fixed_sn2),
            method="L-BFGS-B",
            jac=True,
            bounds=bounds,
        )
        candidates.append((float(res.fun), res.x))

    best_f, best_p = min(candidates, key=lambda c: c[0])
    if best_f >= _FAIL:
        raise NotPositiveDefinite("no hyperparameter start produced a positive definite kernel")
    return unpack(best_p)


def _check_frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class GPModel:
    """Fitted GP surrogate; immutable, safe for concurrent prediction."""

    domain: DomainOfApplicability
    X_raw: np.ndarray          # (n, D) encoded, raw space
    Y: np.ndarray              # (n, m)
    y_means: np.ndarray        # (m,)
    hyperparameters: tuple[GPHyperparameters, ...]
    L: tuple[np.ndarray, ...]  # per-output Cholesky of K + (sn2 + jitter) I
    alpha: tuple[np.ndarray, ...]
    jitter: tuple[float, ...]
    lml: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "X_raw", _check_frozen(self.X_raw))
        object.__setattr__(self, "Y", _check_frozen(self.Y))
        object.__setattr__(self, "y_means", _check_frozen(self.y_means))
        object.__setattr__(self, "L", tuple(_check_frozen(m) for m in self.L))
        object.__setattr__(self, "alpha", tuple(_check_frozen(a) for a in self.alpha))
        for m in self.L:
            if np.any(np.diag(m) <= 0):
                raise NotPositiveDefinite("Cholesky factor must have a positive diagonal")

    @property
    def n_training(self) -> int:
        return self.X_raw.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.Y.shape[1]

    def predict_arrays(self, X_raw: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized posterior over encoded raw-space rows -> (mean, variance)."""
        X_raw = np.atleast_2d(np.asarray(X_raw, dtype=float))
        if X_raw.shape[1] != self.domain.encoded_dim:
            raise DimensionMismatch(
                f"rows have {X_raw.shape[1]} slots, domain encodes {self.domain.encoded_dim}"
            )
        Xs = self.domain.scale(X_raw)
        Xt = self.domain.scale(self.X_raw)
        npts = Xs.shape[0]
        mean = np.empty((npts, self.n_outputs))
        var = np.empty((npts, self.n_outputs))
        for j, theta in enumerate(self.hyperparameters):
            ks = kernels.se_kernel_matrix(Xs, Xt, theta.lengthscales, theta.signal_variance)
            mean[:, j] = self.y_means[j] + ks @ self.alpha[j]
            v = solve_triangular(self.L[j], ks.T, lower=True)
            var[:, j] = theta.signal_variance + theta.noise_variance - np.einsum("ij,ij->j", v, v)
        np.maximum(var, 0.0, out=var)
        return mean, var


def fit_gp(
    ts: TrainingSet,
    theta_init: GPHyperparameters | None = None,
    optimize: bool = True,
    *,
    seed: int = 0,
    restarts: int = 5,
    pinned_noise: float | None = None,
) -> GPModel:
    """Fit one GP per output column of the training set.

    Each output is mean-centered; hyperparameters are optionally optimized
    per output starting from theta_init (or a data-driven default). Passing
    ``pinned_noise`` fixes the noise variance of the default inits, e.g. to
    ~0 for noise-free simulators. With a pinned noise variance, duplicate
    input rows are rejected. Deterministic for a given seed.
    """
    n = len(ts)
    if n == 0:
        raise TooFewPoints("need at least one training row")
    Xs = ts.domain.scale(ts.X)
    d = Xs.shape[1]
    m = ts.Y.shape[1]

    hypers: list[GPHyperparameters] = []
    Ls: list[np.ndarray] = []
    alphas: list[np.ndarray] = []
    jitters: list[float] = []
    lmls: list[float] = []
    y_means = ts.Y.mean(axis=0)

    for j in range(m):
        yc = ts.Y[:, j] - y_means[j]
        var = max(float(yc.var()), 1e-8)
        theta0 = theta_init if theta_init is not None else GPHyperparameters(
            np.full(d, 0.5), var, 1e-6 * var if pinned_noise is None else pinned_noise
        )
        if theta0.pinned_noise and ts.has_duplicate_inputs():
            raise DuplicateInput(
                "training inputs contain duplicate rows while the noise variance is pinned to ~0"
            )
        theta = (
            optimize_hyperparameters(ts, theta0, j, seed=seed, restarts=restarts)
            if optimize
            else theta0
        )
        lml, L, alpha, _, jitter = _lml_terms(Xs, yc, theta)
        hypers.append(theta)
        Ls.append(L)
        alphas.append(alpha)
        jitters.append(jitter)
        lmls.append(lml)

    return GPModel(
        domain=ts.domain,
        X_raw=ts.X,
        Y=ts.Y,
        y_means=y_means,
        hyperparameters=tuple(hypers),
        L=tuple(Ls),
        alpha=tuple(alphas),
        jitter=tuple(jitters),
        lml=tuple(lmls),
    )


def refit_gp(ts: TrainingSet, hyperparameters: "tuple[GPHyperparameters, ...]") -> GPModel:
    """Rebuild the posterior factors for known per-output hyperparameters.

    Used when reloading a serialized model (the Cholesky factor is never
    stored) and for campaign iterations that skip hyperparameter search.
    """
    n = len(ts)
    if n == 0:
        raise TooFewPoints("need at least one training row")
    if len(hyperparameters) != ts.Y.shape[1]:
        raise DimensionMismatch("need one hyperparameter set per output")
    Xs = ts.domain.scale(ts.X)
    y_means = ts.Y.mean(axis=0)
    Ls, alphas, jitters, lmls = [], [], [], []
    for j, theta in enumerate(hyperparameters):
        if theta.pinned_noise and ts.has_duplicate_inputs():
            raise DuplicateInput(
                "training inputs contain duplicate rows while the noise variance is pinned to ~0"
            )
        yc = ts.Y[:, j] - y_means[j]
        lml, L, alpha, _, jitter = _lml_terms(Xs, yc, theta)
        Ls.append(L)
        alphas.append(alpha)
        jitters.append(jitter)
        lmls.append(lml)
    return GPModel(
        domain=ts.domain,
        X_raw=ts.X,
        Y=ts.Y,
        y_means=y_means,
        hyperparameters=tuple(hyperparameters),
        L=tuple(Ls),
        alpha=tuple(alphas),
        jitter=tuple(jitters),
        lml=tuple(lmls),
    )


def predict_gp(model: GPModel, pred: PredictionSet) -> list[Prediction]:
    """Posterior predictions for every row of the prediction set."""
    if pred.domain.encoded_dim != model.domain.encoded_dim:
        raise DimensionMismatch("prediction set domain does not match the model")
    mean, var = model.predict_arrays(pred.X)
    return [Prediction(mean=m, variance=v) for m, v in zip(mean, var)]
