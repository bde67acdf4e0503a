"""
Differentially coherent detection with stochastic-gradient weight adaptation.

Carriers are traversed upward in even blocks and downward in odd blocks; the
weights reached at the end of one block seed the next. Adaptation is driven by
pilots while the pilot budget lasts and by the detector's own decisions after.
"""

import cmath
import logging
import math
from dataclasses import replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..models.demod_models import DemodBankOutput
from ..models.detector_models import (
    CombinerState,
    DetectionRecord,
    DetectionTrace,
    GradientDenominator,
)
from ..models.errors import DomainError
from ..models.frame_models import FramePlan
from ..models.signal_models import PskConstellation
from ..models.sweep_models import MSE_FLOOR_DB

LOGGER = logging.getLogger(__name__)

# |x_{k-1}| below this makes the ratio degenerate: decide, but do not adapt.
DEGENERATE_FLOOR = 1e-12

QPSK = PskConstellation(4)


def is_degenerate(x_prev: complex) -> bool:
    return abs(x_prev) < DEGENERATE_FLOOR


def differential_detect(x_k: complex, x_prev: complex) -> complex:
    """b_hat = x_k / x_{k-1}, with the denominator floored at 1e-12 in magnitude."""
    if is_degenerate(x_prev):
        direction = x_prev / abs(x_prev) if x_prev != 0 else 1.0
        x_prev = direction * DEGENERATE_FLOOR
    return x_k / x_prev


def sga_gradient(
    z_k: np.ndarray,
    z_prev: np.ndarray,
    x_k: complex,
    x_prev: complex,
    e_k: complex,
    denominator: GradientDenominator = GradientDenominator.COMPLEX,
) -> np.ndarray:
    """g_k = (z_k x_{k-1} - x_k z_{k-1}) e_k^* / (x_{k-1})^2."""
    if z_k.shape != z_prev.shape:
        raise DomainError(f"output vectors differ in shape: {z_k.shape} vs {z_prev.shape}")
    if is_degenerate(x_prev):
        raise DomainError(f"degenerate previous output |x| = {abs(x_prev):.3g}")
    if denominator is GradientDenominator.COMPLEX:
        scale = x_prev * x_prev
    else:
        scale = abs(x_prev) ** 2
    return (z_k * x_prev - x_k * z_prev) * (e_k.conjugate() / scale)


def scale_gradient(g_k: np.ndarray, x_prev: complex) -> np.ndarray:
    """g_bar = |x_{k-1}| g_k."""
    return abs(x_prev) * g_k


def update_weights(w_k: np.ndarray, g_bar: np.ndarray, step_size: float) -> np.ndarray:
    """w_{k+1} = w_k + mu * g_bar."""
    if w_k.shape != g_bar.shape:
        raise DomainError(f"weights {w_k.shape} and gradient {g_bar.shape} differ")
    return w_k + step_size * g_bar


def run_block(
    z: DemodBankOutput,
    state: CombinerState,
    pilots: Optional[Sequence[complex]] = None,
    constellation: PskConstellation = QPSK,
) -> Tuple[DetectionTrace, CombinerState]:
    """Detect one block and adapt the combiner carrier by carrier.

    `pilots[k]` is the known symbol for the detection event at carrier k; it
    is used while the state's pilot budget lasts. The returned state carries
    the last weights of the traversal and the negated flag.
    """
    stacked = z.stacked
    if stacked.shape[1] != state.branch_count:
        raise DomainError(
            f"bank has {stacked.shape[1]} branches, weights have {state.branch_count}"
        )
    carriers = stacked.shape[0]
    flag = state.flag
    block = state.blocks_done
    budget = state.pilots_remaining

    k = 0 if flag == 1 else carriers - 1
    w = state.w_temp
    z_prev = stacked[k]
    x_prev = complex(np.vdot(w, z_prev))
    k += flag

    records: List[DetectionRecord] = []
    while 0 <= k < carriers:
        z_k = stacked[k]
        x_k = complex(np.vdot(w, z_k))
        degenerate = is_degenerate(x_prev)
        b_hat = differential_detect(x_k, x_prev)

        training = budget > 0 and pilots is not None and cmath.isfinite(complex(pilots[k]))
        if training:
            b_tilde = complex(pilots[k])
            budget -= 1
        else:
            b_tilde = complex(constellation.symbols[constellation.nearest_index(b_hat)])
        e_k = b_tilde - b_hat

        updated = False
        if not degenerate:
            g_k = sga_gradient(z_k, z_prev, x_k, x_prev, e_k, state.denominator)
            if abs(e_k) < state.error_threshold and \
                    float(np.vdot(g_k, g_k).real) < state.gradient_threshold:
                w = update_weights(w, scale_gradient(g_k, x_prev), state.step_size)
                updated = True

        records.append(DetectionRecord(
            block=block, k=k, x=x_k, b_hat=b_hat, b_tilde=b_tilde,
            error_sq=abs(e_k) ** 2, updated=updated, training=training,
            degenerate=degenerate, weights=w,
        ))
        x_prev, z_prev = x_k, z_k
        k += flag

    next_state = replace(
        state, w_temp=w, flag=-flag, pilots_remaining=budget, blocks_done=block + 1
    )
    return DetectionTrace(records), next_state


def mse_linear(trace: DetectionTrace) -> float:
    """Mean |b_tilde - b_hat|^2 over decision-directed events."""
    errors = [record.error_sq for record in trace.decision_directed()]
    if not errors:
        raise DomainError("trace has no decision-directed carriers; MSE is undefined")
    return float(np.mean(errors))


def mse_of_trace(trace: DetectionTrace) -> float:
    """MSE in dB, floored at -80 dB."""
    value = mse_linear(trace)
    if value <= 0:
        return MSE_FLOOR_DB
    return max(10.0 * math.log10(value), MSE_FLOOR_DB)


def bit_error_rate(
    trace: DetectionTrace, plan: FramePlan, constellation: PskConstellation = QPSK
) -> float:
    """BER of decision-directed decisions against the transmitted symbols."""
    references = {block: plan.reference_symbols(block) for block in trace.blocks()}
    errors = bits = 0
    for record in trace.decision_directed():
        sent = constellation.nearest_index(references[record.block][record.k])
        decided = constellation.nearest_index(record.b_tilde)
        errors += constellation.bit_errors(sent, decided)
        bits += constellation.bits_per_symbol
    return errors / bits if bits else 0.0


class DetectorService:
    """Runs the adaptive detector over every block of a frame."""

    def __init__(self, constellation: PskConstellation = QPSK):
        self.constellation = constellation

    def detect_frame(
        self,
        outputs: Sequence[DemodBankOutput],
        state: CombinerState,
        plan: Optional[FramePlan] = None,
    ) -> Tuple[DetectionTrace, CombinerState]:
        trace = DetectionTrace()
        for block, output in enumerate(outputs):
            pilots = plan.reference_symbols(block) if plan is not None else None
            block_trace, state = run_block(output, state, pilots, self.constellation)
            trace.extend(block_trace)
        LOGGER.debug("frame detected: %d events, %d updates, ending in %s mode",
                     len(trace), trace.update_count, state.mode.value)
        return trace, state
