import random

import numpy as np
import pytest

from goo import store
from goo.records import ASegment, PrimeRootBlock
from goo.store import (
    CorruptSegmentError,
    GapError,
    ManifestError,
    SegmentStore,
    VersionMismatchError,
    decode_a_segment,
    decode_prime_segment,
    encode_a_segment,
    encode_prime_segment,
    parse_manifest,
    serialize_manifest,
)


def _a_seg(lo, hi, values):
    return ASegment(lo=lo, hi=hi, values=np.asarray(values, dtype=np.int64))


def _pr_block(lo, hi, pairs):
    p = np.asarray([x for x, _ in pairs], dtype=np.int64)
    r = np.asarray([x for _, x in pairs], dtype=np.int64)
    return PrimeRootBlock(lo=lo, hi=hi, p=p, r=r)


# -- geometry ---------------------------------------------------------------


def test_x_limit_values():
    assert store.x_limit(10**4) == 100
    assert store.x_limit(10**16) == 10**8
    assert store.x_limit(100) == 10
    # every candidate below the limit stays under the bound, the next does not
    for b in (100, 101, 10**4, 10**4 + 7, 123456789):
        r = store.x_limit(b)
        assert (r - 1) ** 2 + 1 < b <= r * r + 1


def test_segment_ranges_tile_the_candidate_space():
    for bound, seg in ((10**4, 1024), (10**8, 4096), (10**10, 1 << 12)):
        limit = store.x_limit(bound)
        for ranges, span, align in (
            (store.prime_segment_ranges(bound, seg), 4 * seg, 4),
            (store.a_segment_ranges(bound, seg), 2 * seg, None),
        ):
            assert ranges[0][0] == 1
            assert ranges[-1][1] == limit
            for (alo, ahi), (blo, bhi) in zip(ranges, ranges[1:]):
                assert ahi == blo
            if align:
                assert all(lo % align == 1 for lo, _ in ranges)
            assert all(hi - lo <= span for lo, hi in ranges)


# -- prime segment codec ----------------------------------------------------


def test_prime_segment_round_trip():
    block = _pr_block(1, 100, [(5, 2), (13, 5), (17, 4), (29, 12), (37, 6)])
    out = decode_prime_segment(encode_prime_segment(block))
    assert (out.lo, out.hi) == (1, 100)
    assert out.p.tolist() == [5, 13, 17, 29, 37]
    assert out.r.tolist() == [2, 5, 4, 12, 6]


def test_prime_segment_empty_round_trip():
    out = decode_prime_segment(encode_prime_segment(_pr_block(201, 301, [])))
    assert len(out) == 0 and (out.lo, out.hi) == (201, 301)


def test_prime_segment_header_bytes():
    data = encode_prime_segment(_pr_block(1, 100, [(5, 2)]))
    assert data[:4] == b"GOOP"
    assert data[4] == 1
    assert len(data) == 29 + 16


def test_prime_segment_rejects_damage():
    good = encode_prime_segment(_pr_block(1, 100, [(5, 2), (13, 5)]))
    with pytest.raises(CorruptSegmentError):
        decode_prime_segment(b"GOOA" + good[4:])
    with pytest.raises(VersionMismatchError):
        decode_prime_segment(good[:4] + b"\x02" + good[5:])
    with pytest.raises(CorruptSegmentError):
        decode_prime_segment(good[:-3])  # truncated
    with pytest.raises(CorruptSegmentError):
        decode_prime_segment(good + b"\x00")  # trailing junk
    swapped = _pr_block(1, 100, [(13, 5), (5, 2)])
    with pytest.raises(CorruptSegmentError):
        decode_prime_segment(encode_prime_segment(swapped))  # not ascending
    outside = encode_prime_segment(_pr_block(1, 10, [(13, 5)]))
    with pytest.raises(CorruptSegmentError):
        decode_prime_segment(outside)


# -- a-value segment codec --------------------------------------------------


def test_a_segment_round_trip_and_frozen_deltas():
    data = encode_a_segment(_a_seg(1, 8, [1, 2, 4, 6]))
    assert data[:4] == b"GOOA"
    assert data[4] == 1
    # first value as u64, then deltas 1,2,2 as single varint bytes
    assert data[29:37] == (1).to_bytes(8, "little")
    assert data[37:] == bytes([0x01, 0x02, 0x02])
    out = decode_a_segment(data)
    assert out.values.tolist() == [1, 2, 4, 6]


def test_a_segment_multibyte_deltas():
    values = [10, 10 + 199, 10 + 199 + 130, 10 + 199 + 130 + 16384]
    data = encode_a_segment(_a_seg(1, 40000, values))
    assert data[37:39] == bytes([0xC7, 0x01])  # 199 = 0b1_1000111
    assert decode_a_segment(data).values.tolist() == values


def test_a_segment_empty():
    data = encode_a_segment(_a_seg(500, 600, []))
    assert len(data) == 29
    out = decode_a_segment(data)
    assert len(out) == 0 and (out.lo, out.hi) == (500, 600)


def test_a_segment_random_round_trips():
    rng = random.Random(23)
    for _ in range(40):
        n = rng.randrange(1, 400)
        start = rng.randrange(1, 1 << 40)
        deltas = [rng.choice([1, 2, 3, 127, 128, 300, 16383, 16384, 10**6, 10**7])
                  for _ in range(n - 1)]
        values = [start]
        for d in deltas:
            values.append(values[-1] + d)
        seg = _a_seg(start, values[-1] + 1, values)
        assert decode_a_segment(encode_a_segment(seg)).values.tolist() == values


def test_a_segment_rejects_damage():
    good = encode_a_segment(_a_seg(1, 100, [1, 2, 4, 6, 10]))
    with pytest.raises(CorruptSegmentError):
        decode_a_segment(good[:-1])  # one delta short
    with pytest.raises(CorruptSegmentError):
        decode_a_segment(good + bytes([0x02]))  # one delta too many
    with pytest.raises(CorruptSegmentError):
        decode_a_segment(good[:-1] + bytes([0x82]))  # dangling continuation
    zero_delta = good[:38] + bytes([0x00]) + good[39:]
    with pytest.raises(CorruptSegmentError):
        decode_a_segment(zero_delta)
    with pytest.raises(VersionMismatchError):
        decode_a_segment(good[:4] + b"\x07" + good[5:])
    with pytest.raises(CorruptSegmentError):
        decode_a_segment(b"GOOP" + good[4:])
    # values must sit inside the declared range
    with pytest.raises(CorruptSegmentError):
        decode_a_segment(encode_a_segment(_a_seg(1, 5, [1, 2, 4, 6])))


# -- manifest ---------------------------------------------------------------


def _manifest():
    return store.RunManifest(
        bound_b=10**4,
        segment_len=1024,
        status="in_progress",
        entries=[
            store.ManifestEntry("a_values", 1, 100, 19, "ab" * 32, "a_values-00000.bin"),
            store.ManifestEntry("prime_root", 1, 100, 11, "cd" * 32, "prime_root-00000.bin"),
        ],
    )


def test_manifest_round_trip():
    m = _manifest()
    out = parse_manifest(serialize_manifest(m))
    assert out.bound_b == m.bound_b
    assert out.segment_len == m.segment_len
    assert out.status == m.status
    assert set(out.entries) == set(m.entries)


def test_manifest_canonical_order():
    text = serialize_manifest(_manifest())
    lines = text.splitlines()
    assert lines[0] == "goo-manifest 1"
    # prime_root entries always serialize before a_values
    kinds = [ln.split()[1] for ln in lines if ln.startswith("segment ")]
    assert kinds == ["prime_root", "a_values"]


def test_manifest_parse_rejects_damage():
    good = serialize_manifest(_manifest())
    with pytest.raises(ManifestError):
        parse_manifest("")
    with pytest.raises(ManifestError):
        parse_manifest(good.replace("goo-manifest 1", "something 1"))
    with pytest.raises(VersionMismatchError):
        parse_manifest(good.replace("goo-manifest 1", "goo-manifest 9"))
    with pytest.raises(ManifestError):
        parse_manifest(good.replace("status in_progress", "status paused"))
    with pytest.raises(ManifestError):
        parse_manifest(good.replace("segment prime_root", "segment oddball"))
    with pytest.raises(ManifestError):
        parse_manifest(good.replace("prime_root-00000.bin", "../escape.bin"))
    with pytest.raises(ManifestError):
        parse_manifest("goo-manifest 1\nbound_b 100\nstatus complete\n")


# -- the store itself -------------------------------------------------------


def _make_store(tmp_path, bound=10**4, seg=1024):
    return SegmentStore.create(tmp_path / "d", bound, seg)


def _fill_small(st):
    blocks = {
        (1, 100): [(5, 2), (13, 5), (17, 4), (29, 12), (37, 6), (41, 9),
                   (53, 23), (61, 11), (73, 27), (89, 34), (97, 22)],
    }
    for (lo, hi), pairs in blocks.items():
        st.write_prime_segment(_pr_block(lo, hi, pairs))
    st.write_a_segment(
        _a_seg(1, 100, [1, 2, 4, 6, 10, 14, 16, 20, 24, 26, 36, 40, 54, 56,
                        66, 74, 84, 90, 94])
    )
    st.finalize()
    return st


def test_store_write_read_cycle(tmp_path):
    st = _fill_small(_make_store(tmp_path))
    reopened = SegmentStore.open(st.root)
    assert reopened.manifest.complete
    blocks = list(reopened.read_prime_blocks())
    assert len(blocks) == 1 and blocks[0].p.tolist()[0] == 5
    assert list(reopened.read_a_stream()) == [1, 2, 4, 6, 10, 14, 16, 20, 24,
                                              26, 36, 40, 54, 56, 66, 74, 84,
                                              90, 94]
    assert list(reopened.read_a_stream(70)) == [74, 84, 90, 94]
    assert reopened.lookup_a(74) is True
    assert reopened.lookup_a(76) is False
    assert reopened.resume_plan() == []


def test_store_rejects_unknown_range(tmp_path):
    st = _make_store(tmp_path)
    with pytest.raises(ValueError):
        st.write_a_segment(_a_seg(7, 44, [10]))


def test_store_no_temp_files_after_commit(tmp_path):
    st = _fill_small(_make_store(tmp_path))
    leftovers = [p.name for p in st.root.iterdir() if p.name.endswith(".tmp")]
    assert leftovers == []


def test_store_detects_bit_rot(tmp_path):
    st = _fill_small(_make_store(tmp_path))
    victim = st.root / st.manifest.entries_of("a_values")[0].filename
    raw = bytearray(victim.read_bytes())
    raw[-1] ^= 0x40
    victim.write_bytes(bytes(raw))
    fresh = SegmentStore.open(st.root)
    with pytest.raises(CorruptSegmentError):
        list(fresh.read_a_stream())
    assert fresh.resume_plan() == [("a_values", 1, 100)]


def test_store_detects_missing_file(tmp_path):
    st = _fill_small(_make_store(tmp_path))
    (st.root / st.manifest.entries_of("prime_root")[0].filename).unlink()
    fresh = SegmentStore.open(st.root)
    with pytest.raises(CorruptSegmentError):
        list(fresh.read_prime_blocks())
    assert ("prime_root", 1, 100) in fresh.resume_plan()


def test_store_gap_detection(tmp_path):
    st = _make_store(tmp_path, bound=10**8, seg=1024)
    # bound 10^8 tiles x-space [1, 10^4) into multiple segments of each kind
    ranges = store.a_segment_ranges(10**8, 1024)
    assert len(ranges) >= 3
    st.write_a_segment(_a_seg(*ranges[0], [1, 2, 4]))
    st.write_a_segment(_a_seg(*ranges[2], [ranges[2][0] + 2]))  # skip ranges[1]
    with pytest.raises(GapError):
        list(st.read_a_stream())
    with pytest.raises(GapError):
        st.lookup_a(ranges[1][0] + 2)


def test_store_open_requires_manifest(tmp_path):
    with pytest.raises(ManifestError):
        SegmentStore.open(tmp_path / "nowhere")


def test_store_overwrite_same_range_replaces_entry(tmp_path):
    st = _make_store(tmp_path)
    st.write_a_segment(_a_seg(1, 100, [1, 2]))
    st.write_a_segment(_a_seg(1, 100, [1, 2, 4]))
    entries = st.manifest.entries_of("a_values")
    assert len(entries) == 1
    assert entries[0].count == 3
