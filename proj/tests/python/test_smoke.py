import math

import numpy as np
import pytest

import rppg_privacy as rp


@pytest.fixture(scope="module")
def clip72():
    return rp.synthesize_clip(hr_bpm=72.0, frames=300, noise_sigma=1.0, seed=3)


def test_keygen_is_a_permutation():
    k = rp.keygen(5, 4096)
    assert k.dtype == np.uint32
    assert sorted(k.tolist()) == list(range(4096))
    assert np.array_equal(rp.keygen(5, 4096), k)
    inv = rp.inverse_key(k)
    assert np.array_equal(k[inv], np.arange(4096))


def test_shuffle_round_trip_and_means():
    rng = np.random.default_rng(0)
    frame = rng.integers(0, 256, size=(64, 64, 3), dtype=np.uint8)
    key = rp.keygen(9)
    sh = rp.shuffle_pixels(frame, key)
    assert sh.shape == frame.shape
    flat = frame.reshape(-1, 3)
    assert np.array_equal(sh.reshape(-1, 3), flat[key])
    assert np.array_equal(rp.unshuffle_pixels(sh, key), frame)
    assert np.array_equal(sh.sum(axis=(0, 1)), frame.sum(axis=(0, 1)))

    pkey = rp.keygen(9, rp.shuffle_domain(8))
    assert rp.shuffle_domain(8) == 64
    assert np.array_equal(rp.unshuffle_patches(rp.shuffle_patches(frame, 8, pkey), 8, pkey), frame)


def test_blur():
    taps = rp.gaussian_kernel(5)
    assert math.isclose(taps.sum(), 1.0)
    flat = np.full((16, 16, 3), 77, dtype=np.uint8)
    assert np.array_equal(rp.gaussian_blur(flat, 5), flat)
    with pytest.raises(rp.RppgError) as info:
        rp.gaussian_blur(flat, 4)
    assert info.value.code == "bad_kernel"
    assert info.value.exit_status == 3


def test_estimators_recover_hr(clip72):
    frames, ppg = clip72
    assert frames.shape == (300, 64, 64, 3)
    assert ppg.shape == (300,)
    for name in ("chrom", "pos"):
        sig = rp.estimate_signal(frames, name, 30.0)
        hr = rp.estimate_hr(sig, 30.0)
        assert abs(hr["bpm"] - 72.0) <= 2.0
        assert not hr["low_confidence"]
    assert np.allclose(rp.chrom(frames), rp.estimate_signal(frames, "chrom"))


def test_perturb_keeps_the_pulse(clip72):
    frames, _ = clip72
    out = rp.perturb(frames, "roi+sh+b", sample_index=4, master_seed=1)
    assert out.dtype == np.uint8
    assert out.shape == frames.shape
    assert not np.array_equal(out, frames)
    assert abs(rp.estimate_hr(rp.pos(out), 30.0)["bpm"] - 72.0) <= 2.0
    # shuffle without blur leaves the mean traces untouched
    sh = rp.perturb(frames, "roi+sh", key=rp.keygen(3))
    for a, b in zip(rp.mean_traces(sh), rp.mean_traces(frames)):
        assert np.array_equal(a, b)
    mixed = rp.perturb(frames, "instahide", partner=frames[::-1].copy())
    assert mixed.dtype == np.float32
    assert np.abs(mixed).max() <= 1.0


def test_welch_and_metrics():
    t = np.arange(300) / 30.0
    sig = np.sin(2 * np.pi * 1.5 * t)
    freqs, power = rp.welch_psd(sig, 30.0)
    assert freqs.shape == power.shape
    assert abs(freqs[np.argmax(power)] - 1.5) <= 30.0 / 2048
    m = rp.hr_metrics(np.array([72.0, 80.0]), np.array([70.0, 84.0]))
    assert math.isclose(m["mae"], 3.0)
    assert math.isclose(m["rmse"], math.sqrt(10.0))
    assert rp.hr_metrics(np.array([70.0, 70.0]), np.array([60.0, 80.0]))["pearson_r"] is None
    assert math.isclose(rp.smooth_l1(np.array([1.0]), np.array([0.0])), 0.85)
    assert np.allclose(rp.smooth_l1_grad(np.array([0.15, -1.0]), np.zeros(2)), [0.25, -0.5])
    assert rp.log10_keyspace(4096) > 13000


def test_clipfile_round_trip(tmp_path, clip72):
    frames, _ = clip72
    path = tmp_path / "clip.bin"
    rp.write_clipfile(str(path), frames[:10])
    assert path.read_bytes()[:8] == b"RPPGCLIP"
    assert np.array_equal(rp.read_clipfile(str(path)), frames[:10])
    f = (frames[:4].astype(np.float32) / 127.5) - 1.0
    rp.write_clipfile(str(path), f)
    back = rp.read_clipfile(str(path))
    assert back.dtype == np.float32
    assert np.array_equal(back, f)


def test_errors_carry_codes():
    with pytest.raises(rp.RppgError) as info:
        rp.pos(np.zeros((10, 8, 8, 3), dtype=np.uint8))
    assert info.value.code in ("too_short", "zero_channel")
    with pytest.raises(rp.RppgError):
        rp.shuffle_pixels(np.zeros((4, 4, 3), dtype=np.uint8), np.array([0, 0], dtype=np.uint32))
