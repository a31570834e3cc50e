import math

import numpy as np
import pytest

import rfsynth


def test_scene_sampling_is_deterministic():
    a = rfsynth.sample_scene(5, "wbmc")
    b = rfsynth.sample_scene(5, "wbmc")
    assert a == b
    assert 2 <= len(a["signals"]) <= 5
    assert a["scene_id"].startswith("wbmc-")


def test_compose_and_spectrogram_shapes():
    scene = rfsynth.sample_scene(1, "wbod")
    iq = rfsynth.compose(scene, 7)
    assert iq.dtype == np.complex128
    assert iq.shape == (131072,)
    db = rfsynth.spectrogram_db(iq)
    assert db.shape == (512, 256)
    img = rfsynth.render_image(db)
    assert img.shape == (518, 518, 1)
    assert img.dtype == np.uint8


def test_stft_matches_numpy_fft_for_rect_window():
    rng = np.random.default_rng(0)
    x = rng.normal(size=64) + 1j * rng.normal(size=64)
    s = rfsynth.stft(x, fft_size=16, win_len=16, hop=16, window="rect", fft_shift=False)
    # Phase is referenced to absolute sample time, so frame t picks up exp(-j 2 pi k t hop / F).
    for t in range(4):
        ref = np.fft.fft(x[16 * t:16 * (t + 1)])
        np.testing.assert_allclose(s[:, t], ref, atol=1e-9)


def test_impairment_endpoints():
    assert rfsynth.impairment_params("CFO", 1.0)["cfo_hz"] == 1200.0
    p = rfsynth.impairment_params("IQ", 1.0)
    assert (p["gain_db"], p["phase_deg"]) == (8.0, 15.0)
    x = np.exp(2j * np.pi * 0.01 * np.arange(1000))
    assert np.array_equal(rfsynth.impair(x, "PA", 0.0), x)
    with pytest.raises(rfsynth.ConfigError):
        rfsynth.impair(x, "CFO", 1.5)


def test_benchmark_formulas():
    assert rfsynth.wnuc_bucket(17, 15) == (16, 30)
    assert rfsynth.wnuc_bucket(17, 10) == (11, 20)
    assert rfsynth.wnuc_hard_target(7) == 7
    assert rfsynth.quantize_ratio(0.3) == "considerably"
    assert rfsynth.score_wbmc(["qpsk", "16qam"], ["16qam", "qpsk"]) == 0.0
    assert rfsynth.score_wbmc(["qpsk"], ["qpsk", "qpsk"]) == 0.0


def test_caption_and_overlap_label():
    scene = rfsynth.sample_scene(3, "wbod")
    assert rfsynth.overlap_label(scene) in {"both", "time_only", "frequency_only", "neither"}
    cap = rfsynth.caption(scene)
    assert cap["summary"]


def test_model_reference():
    assert rfsynth.num_patches(518, 518, 14) == 1369
    results = rfsynth.run_property_suite(2, 20)
    assert results and all(ok for _, ok, _ in results)


def test_pipeline_stage_order(tmp_path):
    config = {"out": str(tmp_path / "run"), "scenes": {"wbmc": 2}, "tasks": ["wbmc"]}
    with pytest.raises(rfsynth.StageError):
        rfsynth.run_stage("caption", config)
    ok, summary = rfsynth.run_stage("generate", config)
    assert ok and summary["scenes"] == 2
    ok, summary = rfsynth.run_stage("caption", config)
    assert summary["captions"] == 2
    assert len(rfsynth.config_hash(config)) == 16
    moved = dict(config, out="elsewhere")
    assert rfsynth.config_hash(moved) == rfsynth.config_hash(config)
