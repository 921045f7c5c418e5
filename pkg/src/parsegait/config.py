"""Pipeline configuration: typed defaults, key=value overrides, stable hash.

One flat config object covers rendering, fusion, and feature extraction so
a single hash can stamp derived outputs.  Overrides arrive as "key=value"
strings from the command line; unknown keys are rejected loudly rather
than silently ignored.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .errors import ConfigError
from .fuse import STRATEGIES
from .render import RenderConfig


@dataclass(frozen=True)
class PipelineConfig:
    radius: float = 10.0  # head keypoint disc radius, px
    line_width: float = 12.0  # limb stroke width, px
    tau: float = 0.3  # keypoint confidence threshold
    strategy: str = "crf"
    target_height: int = 64
    target_width: int = 44
    bands: int = 16  # feature bands per frame
    stripes: int = 16  # horizontal pooling stripes
    margin: float = 0.2  # triplet loss margin
    ce_weight: float = 1.0
    triplet_weight: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.target_height < 1 or self.target_width < 1:
            raise ConfigError(
                f"target size must be positive, got {self.target_height}x{self.target_width}"
            )
        if self.bands < 1 or self.target_height % self.bands != 0:
            raise ConfigError(
                f"bands ({self.bands}) must divide target height ({self.target_height})"
            )
        if self.stripes < 1 or self.bands % self.stripes != 0:
            raise ConfigError(
                f"stripes ({self.stripes}) must divide the band count ({self.bands})"
            )
        if self.margin <= 0:
            raise ConfigError(f"margin must be positive, got {self.margin}")
        if self.ce_weight < 0 or self.triplet_weight < 0:
            raise ConfigError("loss weights must be non-negative")

    @property
    def target_size(self) -> tuple[int, int]:
        return (self.target_height, self.target_width)

    def render_config(self, canvas: tuple[int, int]) -> RenderConfig:
        return RenderConfig(
            radius=self.radius, line_width=self.line_width, tau=self.tau, canvas=canvas
        )


_CASTERS = {"float": float, "int": int, "str": str, float: float, int: int, str: str}
_FIELD_TYPES = {f.name: _CASTERS[f.type] for f in fields(PipelineConfig)}


def _parse_pair(pair: str) -> tuple[str, object]:
    key, sep, value = pair.partition("=")
    if not sep:
        raise ConfigError(f"expected key=value, got {pair!r}")
    key = key.strip()
    if key not in _FIELD_TYPES:
        known = ", ".join(sorted(_FIELD_TYPES))
        raise ConfigError(f"unknown config key {key!r}; known keys: {known}")
    caster = _FIELD_TYPES[key]
    try:
        return key, caster(value.strip())
    except ValueError:
        raise ConfigError(f"config key {key!r} needs a {caster.__name__}, got {value!r}")


def apply_overrides(cfg: PipelineConfig, pairs) -> PipelineConfig:
    """Apply "key=value" strings; unknown keys and unparseable values raise."""
    updates = dict(_parse_pair(pair) for pair in pairs)
    return replace(cfg, **updates)


def load_config_file(path: str | Path, base: PipelineConfig | None = None) -> PipelineConfig:
    """Read a key=value config file; blank lines and #-comments are skipped."""
    cfg = base if base is not None else PipelineConfig()
    text = Path(path).read_text(encoding="ascii")
    updates = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {stripped!r}")
        try:
            key, value = _parse_pair(stripped)
        except ConfigError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from None
        updates[key] = value
    # one atomic replace so cross-field constraints see the whole file
    return replace(cfg, **updates)


# Strategy is stamped beside outputs by name and seed only selects source data,
# so neither belongs in the hash that gates artifact comparisons.
_UNHASHED_FIELDS = ("strategy", "seed")


def config_hash(cfg: PipelineConfig) -> str:
    """Short content hash over the fields that shape derived outputs."""
    canonical = "\n".join(
        f"{f.name}={getattr(cfg, f.name)!r}"
        for f in fields(PipelineConfig)
        if f.name not in _UNHASHED_FIELDS
    )
    return hashlib.sha256(canonical.encode("ascii")).hexdigest()[:12]
