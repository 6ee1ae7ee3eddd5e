"""Lag-k linear regression forecaster for the source azimuth.

Windows are stored oldest-first: a row ``[theta[t-k+1], ..., theta[t]]``
predicts ``theta[t+1]`` and ``coefficients[j]`` multiplies column ``j``.
For ``k = 3`` the columns are labelled ``theta[t-2]``, ``theta[t-1]`` and
``theta[t]``.
"""

import json
import logging
import math
from collections import deque
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, qr

from .errors import CollinearityError, ColdStartError, ValidationError

log = logging.getLogger(__name__)

AZ_LIMIT = 90.0


def lag_labels(k):
    return [f"theta[t-{k - 1 - j}]" if j < k - 1 else "theta[t]" for j in range(k)]


# --- Student t distribution -------------------------------------------------

def _betacf(a, b, x, max_iter=500, eps=1e-15):
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = tiny if abs(d) < tiny else d
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc_reg(a, b, x):
    """Regularized incomplete beta ``I_x(a, b)``."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _betacf(a, b, x) / a
    return 1.0 - math.exp(log_front) * _betacf(b, a, 1.0 - x) / b


def t_two_sided_p(t, dof):
    """Two-sided p-value ``P(|T| >= |t|)`` for Student's t with ``dof`` degrees of freedom."""
    if math.isinf(t):
        return 0.0
    return betainc_reg(dof / 2.0, 0.5, dof / (dof + t * t))


def t_cdf(t, dof):
    half = 0.5 * t_two_sided_p(t, dof)
    return 1.0 - half if t > 0 else half


# --- Training data and fitting ------------------------------------------------

def build_training_set(sequences, k=3):
    """Sliding windows of ``k`` consecutive angles and the angle that follows."""
    rows, targets = [], []
    for idx, seq in enumerate(sequences):
        seq = list(seq)
        if len(seq) < k + 1:
            log.warning("sequence %d has %d samples, fewer than k+1=%d; skipped", idx, len(seq), k + 1)
            continue
        for i in range(len(seq) - k):
            rows.append(seq[i:i + k])
            targets.append(seq[i + k])
    return np.array(rows, dtype=float).reshape(-1, k), np.array(targets, dtype=float)


@dataclass
class LinearModel:
    intercept: float
    coefficients: list
    k: int
    stderr: list
    p_values: list
    intercept_stderr: float
    intercept_p: float
    r_squared: float
    n: int
    dof: int
    residual_std: float
    exact_fit: bool = False
    dropped: list = field(default_factory=list)

    def predict(self, window):
        return self.intercept + float(np.dot(self.coefficients, window))

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))


def fit_linear(x, y, strict=False):
    """Ordinary least squares with intercept.

    Full-rank designs are solved through the normal equations (Cholesky).
    A rank-deficient design raises ``CollinearityError`` when ``strict``;
    otherwise the dependent columns found by pivoted QR are dropped (their
    coefficients set to zero) and listed in ``model.dropped``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ValidationError(f"design {x.shape} does not match targets {y.shape}")
    n, k = x.shape
    if n <= k + 1:
        raise ValidationError(f"need more than k+1={k + 1} rows, got {n}")
    z = np.column_stack([np.ones(n), x])
    names = ["intercept"] + lag_labels(k)

    _, r, piv = qr(z, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > max(n, k + 1) * np.finfo(float).eps * diag[0]))
    keep = np.sort(piv[:rank])
    dropped = [names[i] for i in sorted(piv[rank:])]
    if dropped:
        if strict:
            raise CollinearityError(f"design is rank deficient; {dropped[0]} is collinear with the other columns")
        log.warning("rank-deficient design; dropping %s", ", ".join(dropped))

    zk = z[:, keep]
    gram = zk.T @ zk
    factor = cho_factor(gram, lower=True)
    beta_k = cho_solve(factor, zk.T @ y)
    beta = np.zeros(k + 1)
    beta[keep] = beta_k

    resid = y - z @ beta
    rss = float(resid @ resid)
    dof = n - rank
    centered = y - y.mean()
    tss = float(centered @ centered)
    exact = math.sqrt(rss) <= 1e-10 * max(float(np.linalg.norm(y)), 1e-300) or rss == 0.0
    if tss == 0.0:
        r2 = 1.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - rss / tss))

    se = np.full(k + 1, np.nan)
    pv = np.full(k + 1, np.nan)
    if exact:
        se[keep] = 0.0
        pv[keep] = 0.0
        sigma = 0.0
    else:
        sigma2 = rss / dof
        sigma = math.sqrt(sigma2)
        cov = sigma2 * cho_solve(factor, np.eye(rank))
        se[keep] = np.sqrt(np.diag(cov))
        for i, col in enumerate(keep):
            pv[col] = t_two_sided_p(beta[col] / se[col], dof) if se[col] > 0 else 0.0

    return LinearModel(
        intercept=float(beta[0]),
        coefficients=[float(b) for b in beta[1:]],
        k=k,
        stderr=[float(s) for s in se[1:]],
        p_values=[float(p) for p in pv[1:]],
        intercept_stderr=float(se[0]),
        intercept_p=float(pv[0]),
        r_squared=r2,
        n=n,
        dof=dof,
        residual_std=sigma,
        exact_fit=exact,
        dropped=dropped,
    )


@dataclass
class SignificanceRow:
    name: str
    coefficient: float
    stderr: float
    t: float
    p: float


@dataclass
class SignificanceReport:
    rows: list
    dof: int
    exact_fit: bool

    def row(self, name):
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)


def coefficient_significance(model):
    names = ["intercept"] + lag_labels(model.k)
    coefs = [model.intercept] + list(model.coefficients)
    ses = [model.intercept_stderr] + list(model.stderr)
    ps = [model.intercept_p] + list(model.p_values)
    rows = []
    for name, b, se, p in zip(names, coefs, ses, ps):
        if model.exact_fit:
            t = math.inf if b != 0 else 0.0
        else:
            t = b / se if se and se > 0 else math.nan
        rows.append(SignificanceRow(name, b, se, t, p))
    return SignificanceReport(rows, model.dof, model.exact_fit)


# --- Online use ----------------------------------------------------------------

class AngleHistory:
    """Most recent accepted azimuths (oldest first) with their source flags."""

    def __init__(self, capacity):
        self._items = deque(maxlen=capacity)

    def push(self, azimuth, flag=None):
        if not -AZ_LIMIT <= azimuth <= AZ_LIMIT:
            raise ValidationError(f"azimuth {azimuth} out of range")
        self._items.append((float(azimuth), flag))

    def latest(self, k):
        if len(self._items) < k:
            raise ColdStartError(f"history holds {len(self._items)} angles, need {k}")
        return [a for a, _ in list(self._items)[-k:]]

    def clear(self):
        self._items.clear()

    def __len__(self):
        return len(self._items)

    @property
    def capacity(self):
        return self._items.maxlen


def predict_next(model, history):
    window = history.latest(model.k) if isinstance(history, AngleHistory) else list(history)[-model.k:]
    if len(window) < model.k:
        raise ColdStartError(f"history holds {len(window)} angles, need {model.k}")
    return min(AZ_LIMIT, max(-AZ_LIMIT, model.predict(window)))
