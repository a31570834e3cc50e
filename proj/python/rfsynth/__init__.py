"""Python bindings for the rfsynth scene, spectrogram, benchmark and pipeline library."""

import json as _json

from . import _core
from ._core import (
    ConfigError,
    Error,
    InputError,
    IoError,
    RegistryError,
    RejectionError,
    StageError,
    compose_scene,
    impair,
    impairment_params,
    num_patches,
    quantize_ratio,
    render_image,
    run_property_suite,
    score_wbmc,
    spectrogram_db,
    stft,
    wnuc_bucket,
    wnuc_hard_target,
)

__all__ = [
    "ConfigError", "Error", "InputError", "IoError", "RegistryError", "RejectionError", "StageError",
    "sample_scene", "compose", "compose_scene", "stft", "spectrogram_db", "render_image", "impair", "impairment_params",
    "wnuc_bucket", "wnuc_hard_target", "quantize_ratio", "score_wbmc", "overlap_label", "caption",
    "num_patches", "run_property_suite", "run_stage", "config_hash",
]


def sample_scene(seed, task):
    """Scene metadata (no IQ) as a dict."""
    return _json.loads(_core.sample_scene_json(seed, task))


def _scene_text(scene):
    return scene if isinstance(scene, str) else _json.dumps(scene)


def compose(scene, seed):
    return compose_scene(_scene_text(scene), seed)


def overlap_label(scene):
    return _core.overlap_label(_scene_text(scene))


def caption(scene, seed=0):
    return _json.loads(_core.caption_json(_scene_text(scene), seed))


def run_stage(stage, config):
    """Runs one pipeline stage; returns (ok, summary dict)."""
    ok, summary = _core.run_stage(stage, _json.dumps(config))
    return ok, _json.loads(summary)


def config_hash(config):
    return _core.config_hash(_json.dumps(config))
