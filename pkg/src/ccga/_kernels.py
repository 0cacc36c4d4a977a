"""Numba inner loop for ccGA trials on COM and KVal.

The kernel consumes pre-drawn blocks of uniform integers so that the draw
sequence is owned by the (seedable, deterministic) numpy generator; the same
stream fed through the pure-Python reference engine yields the identical
trajectory.  Everything observable (hit detection, event flags, integer
threshold crossings, monotonicity) is integer-exact.  The only float state is
the running log-product used by product thresholds; those comparisons carry a
small guard band (see LOG_GUARD) so that exact grid ties count as crossed.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

OBJECTIVE_COM = 0
OBJECTIVE_KVAL = 1

THR_LOG_PRODUCT = 0
THR_INT_SUM = 1

# Accumulated float error in the running log-product stays orders of
# magnitude below this; grid states exactly on a threshold count as crossed.
LOG_GUARD = 1e-9

# state_i layout
SI_HIT = 0
SI_T_HIT = 1
SI_FIRST_LOW = 2
SI_FIRST_RATIO = 3
SI_SUM_FIRST = 4
SI_MONOTONE_VIOLATED = 5
SI_DONE = 6
SI_ITERATIONS = 7
STATE_I_LEN = 8


@njit(cache=True)
def _sample_pair(counts, draws_row, cats):
    """Resolve two uniform draws against cumulative counts.

    Returns (first_all_opt, second_all_opt): whether each sample picked the
    first category in every dimension.
    """
    D = counts.shape[0]
    K = counts.shape[1]
    opt0 = True
    opt1 = True
    for j in range(2):
        for d in range(D):
            u = draws_row[j, d]
            acc = 0
            cat = K - 1
            for k in range(K):
                acc += counts[d, k]
                if u < acc:
                    cat = k
                    break
            cats[j, d] = cat
            if cat != 0:
                if j == 0:
                    opt0 = False
                else:
                    opt1 = False
    return opt0, opt1


@njit(cache=True)
def _compare(objective_code, cats):
    """Sign of f(x) - f(x'), on 0-based category rows cats[0], cats[1]."""
    D = cats.shape[1]
    if objective_code == OBJECTIVE_KVAL:
        for d in range(D):
            a = cats[0, d]
            b = cats[1, d]
            if a != b:
                return 1 if a < b else -1
        return 0
    fa = 0
    fb = 0
    for d in range(D):
        if cats[0, d] == 0:
            fa += 1
        if cats[1, d] == 0:
            fb += 1
    if fa > fb:
        return 1
    if fa < fb:
        return -1
    return 0


@njit(cache=True)
def run_block(
    counts,
    m,
    objective_code,
    draws,
    t0,
    max_iter,
    stop_on_hit,
    track_events,
    thr_kind,
    thr_flog,
    thr_int,
    thr_crossed,
    state_i,
    fstate,
):
    """Advance the trial through one block of draws.  Returns the new t."""
    D = counts.shape[0]
    K = counts.shape[1]
    n_thr = thr_kind.shape[0]
    cats = np.empty((2, D), dtype=np.int64)
    t = t0
    for row in range(draws.shape[0]):
        if t >= max_iter:
            state_i[SI_DONE] = 1
            return t

        # Threshold conditions are evaluated on theta^(t), before sampling.
        for i in range(n_thr):
            if thr_crossed[i] < 0:
                if thr_kind[i] == THR_INT_SUM:
                    if state_i[SI_SUM_FIRST] >= thr_int[i]:
                        thr_crossed[i] = t
                else:
                    if fstate[0] >= thr_flog[i] - LOG_GUARD:
                        thr_crossed[i] = t

        opt0, opt1 = _sample_pair(counts, draws[row], cats)
        state_i[SI_ITERATIONS] = t + 1

        if (opt0 or opt1) and state_i[SI_HIT] == 0:
            state_i[SI_HIT] = 1
            state_i[SI_T_HIT] = t
            if stop_on_hit:
                state_i[SI_DONE] = 1
                return t + 1

        cmp = _compare(objective_code, cats)
        w = 0 if cmp >= 0 else 1  # tie keeps the first sample as winner
        l = 1 - w

        sum_before = state_i[SI_SUM_FIRST]
        for d in range(D):
            cw = cats[w, d]
            cl = cats[l, d]
            if cw == cl:
                continue
            counts[d, cw] += 1
            counts[d, cl] -= 1
            if cw == 0:
                state_i[SI_SUM_FIRST] += 1
                n_new = counts[d, 0]
                if n_new == 1:
                    # leaving zero: rebuild the log-product from scratch
                    total = 0.0
                    for dd in range(D):
                        if counts[dd, 0] == 0:
                            total = -np.inf
                            break
                        total += math.log(counts[dd, 0])
                    fstate[0] = total
                else:
                    fstate[0] += math.log(n_new) - math.log(n_new - 1)
            elif cl == 0:
                state_i[SI_SUM_FIRST] -= 1
                n_new = counts[d, 0]
                if n_new == 0:
                    fstate[0] = -np.inf
                else:
                    fstate[0] += math.log(n_new) - math.log(n_new + 1)
                if track_events and state_i[SI_FIRST_LOW] < 0 and 2 * n_new <= m:
                    state_i[SI_FIRST_LOW] = t + 1
            if track_events and state_i[SI_FIRST_RATIO] < 0:
                if cl == 0:
                    n0 = counts[d, 0]
                    for k in range(1, K):
                        if 2 * n0 < counts[d, k]:
                            state_i[SI_FIRST_RATIO] = t + 1
                            break
                elif cw != 0:
                    if 2 * counts[d, 0] < counts[d, cw]:
                        state_i[SI_FIRST_RATIO] = t + 1

        if objective_code == OBJECTIVE_COM and state_i[SI_SUM_FIRST] < sum_before:
            state_i[SI_MONOTONE_VIOLATED] = 1

        t += 1

    if t >= max_iter:
        state_i[SI_DONE] = 1
    return t


def log_product_of_first(counts) -> float:
    """Sum of ln(n[d, 0]); -inf if any first-category count is zero."""
    first = counts[:, 0]
    if np.any(first == 0):
        return -math.inf
    return float(np.sum(np.log(first.astype(np.float64))))
