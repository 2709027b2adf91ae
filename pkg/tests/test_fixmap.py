import random
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fixscope.fixmap import (
    CountOverflowError,
    FixationMap,
    FixMapError,
    FixMapFormatError,
    ScaleSpec,
    build_map,
    dumps_map,
    loads_map,
    read_map,
    rescale,
    write_map,
)
from fixscope.gaze import GazeSample, Label, RecordingMeta

META = RecordingMeta()


def fix(t, x, y):
    return GazeSample(t, x, y, Label.FIXATION)


def test_coinciding_samples_accumulate():
    fmap = build_map([fix(0, 10, 10), fix(1, 10, 10)], META, 1)
    assert fmap.frame(0)[10, 10] == 2
    assert fmap.total() == 2


def test_empty_map():
    fmap = build_map([], META, 3)
    assert fmap.shape == (3, 480, 640)
    assert fmap.total() == 0 and fmap.max_symbol == 0
    assert not fmap.dense().any()


def test_eight_subjects_one_pixel():
    samples = [fix(3, 100, 50) for _ in range(8)]
    fmap = build_map(samples, META, 2)
    dense = fmap.dense()
    assert dense[0, 50, 100] == 8
    assert int(dense.sum()) == 8
    assert fmap.max_symbol == 8


def test_frame_assignment_uses_sample_rate():
    fmap = build_map([fix(7, 0, 0), fix(8, 0, 0), fix(239, 0, 0)], META, 30)
    sums = fmap.frame_sums()
    assert sums[0] == 1 and sums[1] == 1 and sums[29] == 1


def test_late_sample_errors_or_truncates():
    with pytest.raises(FixMapError, match="frame 1"):
        build_map([fix(8, 0, 0)], META, 1)
    dropped = Counter()
    fmap = build_map([fix(0, 0, 0), fix(8, 0, 0)], META, 1, truncate=True, dropped=dropped)
    assert fmap.total() == 1 and dropped["past_last_frame"] == 1


def test_out_of_bounds_errors_or_skips():
    with pytest.raises(FixMapError, match="outside"):
        build_map([fix(0, 640, 0)], META, 1)
    dropped = Counter()
    fmap = build_map([fix(0, 640, 0), fix(0, 1, 479)], META, 1, skip_oob=True, dropped=dropped)
    assert fmap.total() == 1 and dropped["out_of_bounds"] == 1


def test_overflow_is_hard_error():
    meta = RecordingMeta(frame_width=1, frame_height=1, frame_rate=1, sample_rate=1)
    with pytest.raises(CountOverflowError):
        build_map([fix(0, 0, 0)] * 65536, meta, 1)


def test_storage_is_chosen_by_density():
    sparse = build_map([fix(0, 1, 1)], META, 1)
    assert sparse.is_sparse
    dense = FixationMap.from_dense(np.ones((2, 3, 3), dtype=np.uint16))
    assert not dense.is_sparse
    assert FixationMap.from_dense(dense.dense(), storage="sparse") == dense


def test_rescale_vga_to_forty_pixel_blocks():
    fmap = build_map([fix(0, 639, 479), fix(0, 0, 0), fix(9, 320, 240)], META, 2)
    small = rescale(fmap, ScaleSpec(40, 40))
    assert (small.height, small.width, small.depth) == (12, 16, 2)
    assert small.frame(0)[11, 15] == 1 and small.frame(0)[0, 0] == 1 and small.frame(1)[6, 8] == 1
    np.testing.assert_array_equal(small.frame_sums(), fmap.frame_sums())


def test_rescale_all_ones_hand_sum():
    fmap = FixationMap.from_dense(np.ones((1, 4, 4), dtype=np.uint16))
    np.testing.assert_array_equal(rescale(fmap, ScaleSpec(2, 2)).dense(), np.full((1, 2, 2), 4))


def test_rescale_zero_map():
    assert rescale(FixationMap.zeros(480, 640, 2), ScaleSpec(40, 40)).total() == 0


def test_rescale_drops_partial_windows():
    arr = np.ones((1, 5, 5), dtype=np.uint16)
    out = rescale(FixationMap.from_dense(arr), ScaleSpec(2, 2))
    np.testing.assert_array_equal(out.dense(), np.full((1, 2, 2), 4))


def test_rescale_window_too_large():
    with pytest.raises(FixMapError):
        rescale(FixationMap.zeros(4, 4, 1), ScaleSpec(5, 2))


def test_rescale_overflow():
    arr = np.full((1, 2, 2), 20000, dtype=np.uint16)
    with pytest.raises(CountOverflowError):
        rescale(FixationMap.from_dense(arr), ScaleSpec(2, 2))


def test_golden_bytes():
    fmap = FixationMap.from_dense(np.array([[[0, 1], [2, 3]]], dtype=np.uint16))
    golden = bytes.fromhex(
        "46584d31"  # FXM1
        "02000000" "02000000" "01000000" "00000000"  # M N K reserved
        "0000" "0100" "0200" "0300"
    )
    assert dumps_map(fmap) == golden
    assert loads_map(golden) == fmap


def test_file_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    fmap = FixationMap.from_dense(rng.integers(0, 4, size=(3, 5, 7)).astype(np.uint16))
    write_map(fmap, tmp_path / "m.fxm")
    assert read_map(tmp_path / "m.fxm") == fmap
    sparse = build_map([fix(0, 3, 4)], META, 2)
    write_map(sparse, tmp_path / "s.fxm")
    assert read_map(tmp_path / "s.fxm") == sparse


@pytest.mark.parametrize("mutate, message", [
    (lambda b: b"FXM2" + b[4:], "magic"),
    (lambda b: b[:-1], "truncated"),
    (lambda b: b + b"\0\0", "oversized"),
    (lambda b: b[:10], "truncated header"),
    (lambda b: b[:16] + b"\1\0\0\0" + b[20:], "reserved"),
    (lambda b: b[:4] + b"\0\0\0\0" + b[8:], "zero dimension"),
    (lambda b: b[:4] + b"\xff\xff\xff\xff" * 3 + b[16:], "overflow"),
])
def test_format_errors(mutate, message):
    good = dumps_map(FixationMap.from_dense(np.ones((1, 2, 2), dtype=np.uint16)))
    with pytest.raises(FixMapFormatError, match=message):
        loads_map(mutate(good))


samples_st = st.lists(
    st.tuples(st.integers(0, 79), st.integers(0, 15), st.integers(0, 11)), max_size=200)
SMALL = RecordingMeta(frame_width=16, frame_height=12, frame_rate=30, sample_rate=240)


@given(samples_st)
def test_count_conservation_and_permutation(raw):
    samples = [fix(*s) for s in raw]
    fmap = build_map(samples, SMALL, 10)
    assert fmap.total() == len(samples)
    shuffled = samples[:]
    random.Random(len(raw)).shuffle(shuffled)
    assert build_map(shuffled, SMALL, 10) == fmap


@given(samples_st)
def test_dense_matches_direct_count(raw):
    fmap = build_map([fix(*s) for s in raw], SMALL, 10)
    expected = np.zeros((10, 12, 16), dtype=np.int64)
    for t, x, y in raw:
        expected[t * 30 // 240, y, x] += 1
    np.testing.assert_array_equal(fmap.dense(), expected)


@settings(max_examples=50)
@given(st.integers(0, 2**32), st.sampled_from([(1, 1), (2, 2), (1, 2), (2, 1)]),
       st.sampled_from([(2, 2), (3, 1), (1, 3)]))
def test_rescale_composition(seed, a, b):
    rng = np.random.default_rng(seed)
    M, N = a[0] * b[0] * 2, a[1] * b[1] * 3
    fmap = FixationMap.from_dense(rng.integers(0, 5, size=(3, M, N)).astype(np.uint16))
    two_step = rescale(rescale(fmap, ScaleSpec(*a)), ScaleSpec(*b))
    assert two_step == rescale(fmap, ScaleSpec(a[0] * b[0], a[1] * b[1]))
    np.testing.assert_array_equal(two_step.frame_sums(), fmap.frame_sums())
