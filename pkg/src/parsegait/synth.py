"""Synthetic planar walker: keypoint sequences plus silhouette masks.

The walker is a 2-d articulated stick figure with sinusoidal limb swing.
Keypoints come from the true joint positions with small estimator-style
jitter; silhouettes are capsule unions over the body with per-condition
degradations (carried bag, widened clothing) and boundary speckle.  The
asymmetry is deliberate: appearance changes hit the silhouette while the
joint estimates stay stable, which is the regime the fused representations
are meant to survive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import kernels
from .dataset import Manifest, SequenceRecord, keypoints_path, save_manifest, silhouette_path
from .fuse import SilhouetteMask, save_silhouette
from .pose import Keypoint, KeypointFrame, KeypointSequence, save_keypoint_sequence

CONDITIONS = ("nm", "bg", "cl")
DEFAULT_CANVAS = (128, 88)  # (H, W)
BOTTOM_MARGIN = 8.0


@dataclass(frozen=True)
class WalkerParams:
    """Per-identity body geometry and gait dynamics, in pixels and radians."""

    torso_len: float
    thigh_len: float
    shin_len: float
    upper_arm_len: float
    forearm_len: float
    shoulder_halfw: float
    hip_halfw: float
    head_radius: float
    limb_halfw: float
    swing_amplitude: float  # peak thigh angle from vertical
    cadence: float  # radians per frame
    phase: float
    arm_scale: float = 0.7
    sway_amplitude: float = 1.2

    def __post_init__(self):
        for name in (
            "torso_len",
            "thigh_len",
            "shin_len",
            "upper_arm_len",
            "forearm_len",
            "shoulder_halfw",
            "hip_halfw",
            "head_radius",
            "limb_halfw",
            "swing_amplitude",
            "cadence",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def derive_walker(rng: np.random.Generator) -> WalkerParams:
    """Draw one identity's body from broad anthropometric-ish ranges."""
    return WalkerParams(
        torso_len=rng.uniform(30.0, 40.0),
        thigh_len=rng.uniform(20.0, 27.0),
        shin_len=rng.uniform(20.0, 27.0),
        upper_arm_len=rng.uniform(12.0, 16.0),
        forearm_len=rng.uniform(11.0, 15.0),
        shoulder_halfw=rng.uniform(8.0, 11.5),
        hip_halfw=rng.uniform(5.5, 8.0),
        head_radius=rng.uniform(5.5, 7.5),
        limb_halfw=rng.uniform(3.0, 4.2),
        swing_amplitude=rng.uniform(0.34, 0.55),
        cadence=2.0 * math.pi / rng.uniform(16.0, 24.0),
        phase=rng.uniform(0.0, 2.0 * math.pi),
    )


_SEPARATION_FIELDS = ("torso_len", "thigh_len", "swing_amplitude", "shoulder_halfw", "cadence")


def _separated(a: WalkerParams, b: WalkerParams, min_rel_gap: float) -> bool:
    for name in _SEPARATION_FIELDS:
        va, vb = getattr(a, name), getattr(b, name)
        if abs(va - vb) / max(abs(va), abs(vb)) >= min_rel_gap:
            return True
    return False


def ensure_separable(walkers: list[WalkerParams], min_rel_gap: float = 0.05) -> list[WalkerParams]:
    """Nudge colliding bodies apart until every pair differs by >= min_rel_gap somewhere."""
    out = list(walkers)
    for j in range(1, len(out)):
        for _ in range(64):
            if all(_separated(out[i], out[j], min_rel_gap) for i in range(j)):
                break
            out[j] = replace(
                out[j],
                thigh_len=out[j].thigh_len * 1.08,
                swing_amplitude=out[j].swing_amplitude * 1.07,
            )
        else:
            raise ValueError(f"could not separate walker {j} from earlier walkers")
    return out


def joints_at(params: WalkerParams, t: float, canvas=DEFAULT_CANVAS) -> np.ndarray:
    """True joint positions at frame time t, shape (17, 2) float64, (x, y) rows."""
    h, w = canvas
    phi = params.cadence * t + params.phase
    xc = w / 2.0 + params.sway_amplitude * math.sin(phi)
    hip_y = h - BOTTOM_MARGIN - params.thigh_len - params.shin_len
    sh_y = hip_y - params.torso_len

    joints = np.zeros((17, 2), dtype=np.float64)
    nose = (xc, sh_y - (params.head_radius + 3.0))
    eye_dx, eye_dy = 0.28 * params.head_radius, 0.18 * params.head_radius
    ear_dx = 0.55 * params.head_radius
    joints[0] = nose
    joints[1] = (nose[0] - eye_dx, nose[1] - eye_dy)
    joints[2] = (nose[0] + eye_dx, nose[1] - eye_dy)
    joints[3] = (nose[0] - ear_dx, nose[1])
    joints[4] = (nose[0] + ear_dx, nose[1])
    joints[5] = (xc - params.shoulder_halfw, sh_y)
    joints[6] = (xc + params.shoulder_halfw, sh_y)
    joints[11] = (xc - params.hip_halfw, hip_y)
    joints[12] = (xc + params.hip_halfw, hip_y)

    def swing(root, length, theta):
        return (root[0] + length * math.sin(theta), root[1] + length * math.cos(theta))

    theta_l = params.swing_amplitude * math.sin(phi)
    theta_r = params.swing_amplitude * math.sin(phi + math.pi)
    joints[13] = swing(joints[11], params.thigh_len, theta_l)
    joints[14] = swing(joints[12], params.thigh_len, theta_r)
    joints[15] = swing(joints[13], params.shin_len, 0.55 * theta_l)
    joints[16] = swing(joints[14], params.shin_len, 0.55 * theta_r)

    arm_l = params.arm_scale * params.swing_amplitude * math.sin(phi + math.pi)
    arm_r = params.arm_scale * params.swing_amplitude * math.sin(phi)
    joints[7] = swing(joints[5], params.upper_arm_len, arm_l)
    joints[8] = swing(joints[6], params.upper_arm_len, arm_r)
    joints[9] = swing(joints[7], params.forearm_len, 0.8 * arm_l)
    joints[10] = swing(joints[8], params.forearm_len, 0.8 * arm_r)
    return joints


def _body_strokes(joints: np.ndarray, params: WalkerParams, condition: str, width_scale: float):
    """Silhouette geometry as (kind, coords, size) strokes; condition shapes it."""
    torso_scale = 1.55 if condition == "cl" else 1.0
    thigh_scale = 1.5 if condition == "cl" else 1.0
    limb = params.limb_halfw * width_scale
    arm = 0.8 * limb
    xc = (joints[5][0] + joints[6][0]) / 2.0
    sh_c = (xc, joints[5][1])
    hip_c = ((joints[11][0] + joints[12][0]) / 2.0, joints[11][1])

    strokes = [
        ("disc", (joints[0][0], joints[0][1]), 1.15 * params.head_radius * width_scale),
        ("capsule", (*sh_c, joints[0][0], joints[0][1]), 0.45 * params.shoulder_halfw),
        ("capsule", (*sh_c, *hip_c), params.shoulder_halfw * width_scale * torso_scale),
        ("capsule", (*joints[11], *joints[13]), limb * thigh_scale),
        ("capsule", (*joints[12], *joints[14]), limb * thigh_scale),
        ("capsule", (*joints[13], *joints[15]), limb),
        ("capsule", (*joints[14], *joints[16]), limb),
        ("capsule", (*joints[5], *joints[7]), arm),
        ("capsule", (*joints[6], *joints[8]), arm),
        ("capsule", (*joints[7], *joints[9]), arm),
        ("capsule", (*joints[8], *joints[10]), arm),
    ]
    if condition == "cl":
        hem = (hip_c[0], hip_c[1] + 0.45 * params.thigh_len)
        strokes.append(("capsule", (*hip_c, *hem), 1.1 * params.shoulder_halfw * width_scale))
    if condition == "bg":
        bag = (joints[9][0] + 1.5, joints[9][1] + 4.5)
        strokes.append(("capsule", (*joints[7], *bag), 1.2))
        strokes.append(("disc", bag, 5.5 * width_scale))
    return strokes


def _paint_strokes(mask: np.ndarray, strokes) -> None:
    for kind, coords, size in strokes:
        if kind == "disc":
            kernels.paint_disc(mask, coords[0], coords[1], size, 1)
        else:
            kernels.paint_capsule(mask, *coords, size, 1)


def _boundary_pixels(mask: np.ndarray) -> np.ndarray:
    fg = mask != 0
    interior = fg.copy()
    interior[1:, :] &= fg[:-1, :]
    interior[:-1, :] &= fg[1:, :]
    interior[:, 1:] &= fg[:, :-1]
    interior[:, :-1] &= fg[:, 1:]
    interior[0, :] = interior[-1, :] = False
    interior[:, 0] = interior[:, -1] = False
    return np.argwhere(fg & ~interior)


def render_silhouette(
    joints: np.ndarray,
    params: WalkerParams,
    condition: str,
    width_scale: float,
    rng: np.random.Generator,
    canvas=DEFAULT_CANVAS,
) -> np.ndarray:
    """Binary mask for one frame, including segmentation-style boundary speckle."""
    mask = np.zeros(canvas, dtype=np.uint8)
    _paint_strokes(mask, _body_strokes(joints, params, condition, width_scale))
    boundary = _boundary_pixels(mask)
    if len(boundary):
        for _ in range(int(rng.integers(2, 6))):
            py, px = boundary[int(rng.integers(0, len(boundary)))]
            radius = float(rng.uniform(1.0, 2.2))
            value = int(rng.integers(0, 2))
            kernels.paint_disc(mask, px + 0.5, py + 0.5, radius, value)
    return mask


@dataclass(frozen=True)
class SynthClip:
    sequence_id: str
    identity: str
    condition: str
    split: str  # "gallery" or "probe"
    keypoints: KeypointSequence
    silhouettes: list[np.ndarray]


def generate_clip(
    params: WalkerParams,
    identity: str,
    condition: str,
    clip_index: int,
    frames: int,
    rng: np.random.Generator,
    canvas=DEFAULT_CANVAS,
    split: str = "probe",
) -> SynthClip:
    """One walking clip: jittered keypoints plus degraded silhouettes."""
    if condition not in CONDITIONS:
        raise ValueError(f"condition must be one of {CONDITIONS}, got {condition!r}")
    if frames < 1:
        raise ValueError(f"frames must be >= 1, got {frames}")
    sequence_id = f"{identity}-{condition}-{clip_index:02d}"
    width_scale = float(rng.uniform(0.88, 1.12))
    t0 = float(rng.uniform(0.0, 2.0 * math.pi / params.cadence))

    kp_frames = []
    silhouettes = []
    for f in range(frames):
        joints = joints_at(params, t0 + f, canvas)
        silhouettes.append(render_silhouette(joints, params, condition, width_scale, rng, canvas))
        jitter = rng.normal(0.0, 0.4, size=(17, 2))
        confidence = rng.uniform(0.55, 0.98, size=17)
        if rng.random() < 0.04:
            confidence[int(rng.integers(5, 17))] = 0.05  # estimator dropout
        observed = joints + jitter
        kp_frames.append(
            KeypointFrame(
                joints=tuple(
                    Keypoint(float(observed[j, 0]), float(observed[j, 1]), float(confidence[j]))
                    for j in range(17)
                ),
                frame_index=f,
            )
        )
    return SynthClip(
        sequence_id=sequence_id,
        identity=identity,
        condition=condition,
        split=split,
        keypoints=KeypointSequence(frames=tuple(kp_frames), sequence_id=sequence_id),
        silhouettes=silhouettes,
    )


def clip_rng(seed: int, identity_index: int, condition: str, clip_index: int) -> np.random.Generator:
    return np.random.default_rng([seed, identity_index, CONDITIONS.index(condition), clip_index])


def generate_walkers(seed: int, count: int) -> list[WalkerParams]:
    walkers = [derive_walker(np.random.default_rng([seed, i])) for i in range(count)]
    return ensure_separable(walkers)


def generate_clips(
    seed: int,
    identities: int,
    clips_per_condition: int,
    conditions=("nm", "bg"),
    frames: int = 30,
    canvas=DEFAULT_CANVAS,
):
    """All clips for a benchmark population, in manifest order."""
    for condition in conditions:
        if condition not in CONDITIONS:
            raise ValueError(f"condition must be one of {CONDITIONS}, got {condition!r}")
    walkers = generate_walkers(seed, identities)
    clips = []
    for i, params in enumerate(walkers):
        identity = f"id{i:03d}"
        for condition in conditions:
            for k in range(clips_per_condition):
                # Enrollment set: each identity's first clip of the first condition.
                split = "gallery" if condition == conditions[0] and k == 0 else "probe"
                rng = clip_rng(seed, i, condition, k)
                clips.append(
                    generate_clip(params, identity, condition, k, frames, rng, canvas, split)
                )
    return clips


def write_dataset(root: str | Path, clips) -> Manifest:
    """Materialize clips in the dataset layout and write the manifest."""
    root = Path(root)
    records = []
    for clip in clips:
        kp_path = keypoints_path(root, clip.sequence_id)
        kp_path.parent.mkdir(parents=True, exist_ok=True)
        save_keypoint_sequence(clip.keypoints, kp_path)
        for frame, sil in zip(clip.keypoints.frames, clip.silhouettes):
            sil_path = silhouette_path(root, clip.sequence_id, frame.frame_index)
            sil_path.parent.mkdir(parents=True, exist_ok=True)
            save_silhouette(SilhouetteMask(sil), sil_path)
        records.append(
            SequenceRecord(
                sequence_id=clip.sequence_id,
                identity=clip.identity,
                condition=clip.condition,
                split=clip.split,
                frames=len(clip.keypoints.frames),
            )
        )
    manifest = Manifest(tuple(records))
    save_manifest(root, manifest)
    return manifest


def generate_dataset(
    root: str | Path,
    seed: int = 0,
    identities: int = 10,
    clips_per_condition: int = 4,
    conditions=("nm", "bg"),
    frames: int = 30,
    canvas=DEFAULT_CANVAS,
) -> Manifest:
    clips = generate_clips(seed, identities, clips_per_condition, conditions, frames, canvas)
    return write_dataset(root, clips)
