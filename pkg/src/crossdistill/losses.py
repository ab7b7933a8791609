"""Pointwise distillation losses and their correction machinery.

Two base losses are supported:

* squared error on log-probabilities ("sel"):  sum_j (f_j - log p_j)^2 / 2
* annealed cross-entropy ("ace"), with inverse temperature beta:
  -sum_j w_j(p) log softmax(beta f)_j  where  w_j = p_j^beta / sum_l p_l^beta

Each base loss admits a per-class corrected variant that adds a bilinear
term in (y - p) and f, weighted by nonnegative per-class coefficients v.
The sign of the bilinear term is fixed so that the correction *cancels*
the first-order effect of teacher error: minimizing the corrected squared
loss in f is identical to regressing onto the adjusted targets
``log p + v * (y - p)``.  With v = 0 the corrected loss is bit-for-bit the
base loss; with v equal to the diagonal of the correction matrix (1/p for
the squared loss) the loss is first-order insensitive to nuisance error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import InvalidInputError


@dataclass(frozen=True)
class LossSpec:
    """A base distillation loss: kind is "sel" or "ace"; beta is the ACE
    inverse temperature and is ignored for "sel"."""

    kind: str = "sel"
    beta: float = 1.0

    def __post_init__(self):
        if self.kind not in ("sel", "ace"):
            raise InvalidInputError(f"unknown loss kind {self.kind!r}")
        if self.kind == "ace" and not self.beta > 0.0:
            raise InvalidInputError("ACE inverse temperature must be positive")

    def value(self, f, p):
        if self.kind == "sel":
            return sel_loss(f, p)
        return ace_loss(f, p, self.beta)

    def grad_f(self, f, p):
        return grad_scores(self, f, p)


def _check_pair(f, p):
    f = np.asarray(f, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    if f.shape != p.shape:
        raise InvalidInputError(f"shape mismatch: scores {f.shape} vs probs {p.shape}")
    return f, p


def sel_loss(f, p):
    """Squared error between scores and log teacher probabilities."""
    f, p = _check_pair(f, p)
    if p.size == 0 or p.min() <= 0.0:
        raise InvalidInputError("probabilities must be strictly positive")
    r = f - np.log(p)
    return 0.5 * float(np.sum(r * r))


def _log_softmax(z):
    z = z - z.max()
    return z - np.log(np.sum(np.exp(z)))


def _anneal_weights(p, beta):
    # p^beta / sum p^beta, computed in log space to survive tiny entries
    logw = beta * np.log(p)
    logw -= logw.max()
    w = np.exp(logw)
    return w / w.sum()


def ace_loss(f, p, beta):
    """Annealed cross-entropy between teacher and student distributions."""
    f, p = _check_pair(f, p)
    if not beta > 0.0:
        raise InvalidInputError("ACE inverse temperature must be positive")
    if p.size == 0 or p.min() <= 0.0:
        raise InvalidInputError("probabilities must be strictly positive")
    w = _anneal_weights(p, beta)
    return -float(np.dot(w, _log_softmax(beta * f)))


def grad_scores(loss, f, p):
    """Gradient of the base loss with respect to the student scores f."""
    f, p = _check_pair(f, p)
    if p.size == 0 or p.min() <= 0.0:
        raise InvalidInputError("probabilities must be strictly positive")
    if loss.kind == "sel":
        return f - np.log(p)
    z = loss.beta * f
    z = z - z.max()
    soft = np.exp(z)
    soft /= soft.sum()
    return loss.beta * (soft - _anneal_weights(p, loss.beta))


def correction_matrix(loss, p):
    """Sensitivity of the score gradient to teacher error, with the sign
    that makes it the orthogonalizing correction coefficient.

    Entry [i, m] is the response of the m-th score-gradient coordinate to
    an *overstatement* of p_i, i.e. minus the cross partial of the loss in
    (score_m, prob_i).  For the squared loss this is diag(1/p); for ACE it
    is beta^2 * (w_i / p_i) * (delta_im - w_m).  Independent of f in both
    cases.
    """
    p = np.asarray(p, dtype=np.float64)
    if p.size == 0 or p.min() <= 0.0:
        raise InvalidInputError("probabilities must be strictly positive")
    if loss.kind == "sel":
        return np.diag(1.0 / p)
    beta = loss.beta
    w = _anneal_weights(p, beta)
    k = p.shape[0]
    return beta * beta * (w / p)[:, None] * (np.eye(k) - w[None, :])


def fd_correction_matrix(loss_fn, f, p, h=1e-5):
    """Finite-difference estimate of the correction matrix, from loss values only.

    ``loss_fn(f, p) -> float`` may be any pointwise loss; a LossSpec is
    accepted too.  Uses a four-point central stencil in (score, prob) and
    flips the sign to match the correction convention, so for the squared
    loss the result is diag(1/p) up to O(h^2).  Serves as the independent
    oracle for :func:`correction_matrix`.
    """
    if isinstance(loss_fn, LossSpec):
        spec = loss_fn
        loss_fn = lambda ff, pp: spec.value(ff, pp)
    f = np.asarray(f, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    if not h > 0.0:
        raise InvalidInputError("step size must be positive")
    if p.size == 0 or p.min() - h <= 0.0:
        raise InvalidInputError("step size too large: p - h must stay positive")
    k = p.shape[0]
    out = np.empty((k, k))
    # a wider score-direction step keeps the stencil's roundoff ~1e-6
    # without adding truncation error (the losses are smooth in f)
    hf = max(h, 1e-4)
    for i in range(k):
        dp = np.zeros(k)
        dp[i] = h
        for m in range(k):
            df = np.zeros(k)
            df[m] = hf
            stencil = (
                loss_fn(f + df, p + dp)
                - loss_fn(f + df, p - dp)
                - loss_fn(f - df, p + dp)
                + loss_fn(f - df, p - dp)
            )
            out[i, m] = -stencil / (4.0 * hf * h)
    return out


def corrected_loss(base, f, p, y, v):
    """Base loss plus the debiasing bilinear term -(y - p) . (v * f).

    v = 0 recovers the base loss exactly; for the squared loss, the
    f-dependent part equals a squared loss against the targets of
    :func:`corrected_sel_labels`.
    """
    f, p = _check_pair(f, p)
    y = np.asarray(y, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if y.shape != f.shape or v.shape != f.shape:
        raise InvalidInputError("scores, probs, labels and weights must share a shape")
    return base.value(f, p) - float(np.dot((y - p) * v, f))


def grad_corrected(base, f, p, y, v):
    """Score gradient of :func:`corrected_loss`."""
    y = np.asarray(y, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    return grad_scores(base, f, p) - v * (y - np.asarray(p, dtype=np.float64))


def orthogonal_loss(base, f, p, y):
    """Corrected loss with v set to the diagonal of the correction matrix,
    making it first-order insensitive to teacher error (1/p for the
    squared loss, so a clip floor of 1e-3 bounds the coefficients by 1000).
    """
    v = np.diag(correction_matrix(base, np.asarray(p, dtype=np.float64)))
    return corrected_loss(base, f, p, y, v)


def corrected_sel_labels(p, y, v):
    """Adjusted regression targets log p + v * (y - p), coordinatewise.

    Minimizing the corrected squared loss over unconstrained scores at a
    point recovers exactly this vector.  Accepts (k,) vectors or (n, k)
    batches.
    """
    p = np.asarray(p, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if y.shape != p.shape or v.shape != p.shape:
        raise InvalidInputError("probs, labels and weights must share a shape")
    if p.size == 0 or p.min() <= 0.0:
        raise InvalidInputError("probabilities must be strictly positive")
    return np.log(p) + v * (y - p)
