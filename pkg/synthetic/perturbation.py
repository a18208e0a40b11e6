"""
Detection Perturbation
======================
Seeded degradation of a detection stream: instance dropout, mask dilation
(positive radius) or erosion (negative radius), and score jitter.
"""

from typing import Iterable, Iterator, List

import cv2
import numpy as np

from dataset.detections import Detection


def _kernel(radius: int) -> np.ndarray:
    size = 2 * abs(radius) + 1
    return cv2.getStructuringElement(cv2.MORPH_ELLIPSE, (size, size))


def perturb_frame(detections: List[Detection], frame_index: int, dropout: float = 0.0, radius: int = 0,
                  score_jitter: float = 0.0, seed: int = 0) -> List[Detection]:
    """
    Perturb one frame's detections.

    Args:
        detections: Input instances
        frame_index: Position in the stream, mixed into the random seed
        dropout: Probability of removing an instance
        radius: Morphology radius in pixels, negative for erosion
        score_jitter: Standard deviation of additive score noise
        seed: Stream seed

    Returns:
        Perturbed instances; instances whose mask vanishes are dropped
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, frame_index]))
    out = []
    for det in detections:
        # Draw both numbers unconditionally so streams stay aligned across settings
        drop_draw = rng.random()
        jitter_draw = rng.normal()
        if drop_draw < dropout:
            continue

        if radius != 0:
            mask = det.mask.astype(np.uint8)
            if radius > 0:
                mask = cv2.dilate(mask, _kernel(radius))
            else:
                mask = cv2.erode(mask, _kernel(radius))
            det = det.with_mask(mask.astype(bool))
            if det is None:
                continue

        if score_jitter > 0:
            det = det.with_score(float(np.clip(det.score + score_jitter * jitter_draw, 0.0, 1.0)))
        out.append(det)
    return out


def perturb_detections(stream: Iterable[List[Detection]], dropout: float = 0.0, radius: int = 0,
                       score_jitter: float = 0.0, seed: int = 0) -> Iterator[List[Detection]]:
    """
    Perturb a stream of per-frame detection lists. Deterministic given seed;
    the identity when every parameter is zero.
    """
    if not 0.0 <= dropout <= 1.0:
        raise ValueError(f"dropout must be within [0, 1], got {dropout}")
    if score_jitter < 0:
        raise ValueError("score_jitter must be non-negative")
    for frame_index, detections in enumerate(stream):
        yield perturb_frame(detections, frame_index, dropout, radius, score_jitter, seed)

