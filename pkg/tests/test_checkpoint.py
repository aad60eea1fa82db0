import numpy as np
import pytest

from gateracer.checkpoint import (CheckpointError, FORMAT_VERSION, MAGIC,
                                  load_checkpoint, save_checkpoint)


def sample_state(rng):
    return {
        "counters": {"global_step": 123, "episode_count": 4,
                     "update_count": 2, "seed": 7, "last_update_stats": None},
        "config": {"train": {"learning_rate": 1e-4}},
        "track": {"gates": [], "time_limit": 60.0},
        "arrays": {"w": rng.standard_normal((3, 5)),
                   "b": rng.standard_normal(5)},
        "scalars": {"adam_t": 10, "obs_count": 99.0},
        "rng": {"policy": {"state": 1}},
        "env": {"episode_steps": 17},
    }


def test_roundtrip_bitexact(tmp_path):
    rng = np.random.default_rng(0)
    state = sample_state(rng)
    path = tmp_path / "ck.bin"
    save_checkpoint(path, state)
    loaded = load_checkpoint(path)
    for key in ("counters", "config", "track", "scalars", "rng", "env"):
        assert loaded[key] == state[key]
    assert set(loaded["arrays"]) == set(state["arrays"])
    for name, arr in state["arrays"].items():
        got = loaded["arrays"][name]
        assert got.shape == np.asarray(arr).shape
        np.testing.assert_array_equal(got, arr)  # bitwise for float64


def test_save_is_deterministic(tmp_path):
    rng = np.random.default_rng(1)
    state = sample_state(rng)
    p1, p2 = tmp_path / "a.bin", tmp_path / "b.bin"
    save_checkpoint(p1, state)
    save_checkpoint(p2, state)
    assert p1.read_bytes() == p2.read_bytes()


def test_bad_magic(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b"NOTACKPT" + b"\x00" * 64)
    with pytest.raises(CheckpointError, match="magic"):
        load_checkpoint(path)


def test_version_mismatch_names_versions(tmp_path):
    import struct

    path = tmp_path / "v.bin"
    path.write_bytes(MAGIC + struct.pack("<I", FORMAT_VERSION + 1))
    with pytest.raises(CheckpointError) as err:
        load_checkpoint(path)
    assert str(FORMAT_VERSION) in str(err.value)
    assert str(FORMAT_VERSION + 1) in str(err.value)


def test_truncated_file(tmp_path):
    rng = np.random.default_rng(2)
    path = tmp_path / "full.bin"
    save_checkpoint(path, sample_state(rng))
    data = path.read_bytes()
    cut = tmp_path / "cut.bin"
    cut.write_bytes(data[: len(data) // 2])
    with pytest.raises(CheckpointError):
        load_checkpoint(cut)


def test_trailing_garbage(tmp_path):
    rng = np.random.default_rng(3)
    path = tmp_path / "full.bin"
    save_checkpoint(path, sample_state(rng))
    bad = tmp_path / "bad.bin"
    bad.write_bytes(path.read_bytes() + b"extra")
    with pytest.raises(CheckpointError, match="trailing"):
        load_checkpoint(bad)


def test_missing_file():
    with pytest.raises(FileNotFoundError):
        load_checkpoint("/nonexistent/checkpoint.bin")
