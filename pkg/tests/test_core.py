import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from rdafuse.core import (
    TILE_BYTES, ComplexBuffer, Layout, SceneMatrix, convert_layout, make_twiddles,
    read_scene, transpose, write_scene,
)

from conftest import random_complex


def test_interleaved_to_split_definition():
    buf = ComplexBuffer.from_complex([1 + 2j, 3 + 4j])
    split = convert_layout(buf, Layout.SPLIT)
    assert split.layout == Layout.SPLIT
    np.testing.assert_array_equal(split.data[0], [1, 3])
    np.testing.assert_array_equal(split.data[1], [2, 4])


def test_interleaved_storage_is_adjacent_pairs():
    buf = ComplexBuffer.from_complex([1 + 2j, 3 + 4j])
    np.testing.assert_array_equal(buf.data.view(np.float32), [1, 2, 3, 4])


def test_layout_round_trip_is_bit_identical(rng):
    x = random_complex(rng, 4096)
    x[::97] = np.complex64(complex(-0.0, np.nan))
    buf = ComplexBuffer.from_complex(x)
    back = convert_layout(convert_layout(buf, Layout.SPLIT), Layout.INTERLEAVED)
    assert back.data.tobytes() == buf.data.tobytes()


def test_split_preserves_every_element(rng):
    x = random_complex(rng, 4096)
    split = convert_layout(ComplexBuffer.from_complex(x), Layout.SPLIT)
    for k in range(0, 4096, 1):
        assert split.data[0, k] == x[k].real and split.data[1, k] == x[k].imag


@pytest.mark.parametrize("layout", list(Layout))
def test_byte_footprint_is_eight_per_sample(layout):
    buf = ComplexBuffer.from_complex(np.zeros(4096), layout)
    assert buf.nbytes == 8 * 4096 == TILE_BYTES


@given(hnp.arrays(np.float32, st.integers(1, 300).map(lambda n: (2, n)),
                  elements=st.floats(width=32, allow_nan=False)))
def test_layout_round_trip_property(arr):
    split = ComplexBuffer(arr, Layout.SPLIT)
    back = convert_layout(convert_layout(split, Layout.INTERLEAVED), Layout.SPLIT)
    assert back.data.tobytes() == split.data.tobytes()


def test_transpose_fixed_point_and_definition():
    one = SceneMatrix(np.array([[5 + 1j]], dtype=np.complex64))
    assert transpose(one).data.tobytes() == one.data.tobytes()
    a, b, c, d = 1 + 1j, 2, 3j, 4 - 1j
    m = SceneMatrix(np.array([[a, b], [c, d]], dtype=np.complex64))
    np.testing.assert_array_equal(transpose(m).data, np.array([[a, c], [b, d]], np.complex64))


def test_double_transpose_bit_identical(rng):
    m = SceneMatrix(random_complex(rng, (64, 32)))
    t = transpose(m)
    assert t.shape == (32, 64)
    assert transpose(t).data.tobytes() == m.data.tobytes()


def test_scene_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        SceneMatrix(np.zeros((3, 4), np.complex64))


def test_twiddles_small_cases():
    np.testing.assert_array_equal(make_twiddles(1).factors, [1 + 0j])
    np.testing.assert_allclose(make_twiddles(4).factors, [1, -1j, -1, 1j], atol=1e-7)
    assert make_twiddles(4096).factors[0] == 1 + 0j
    with pytest.raises(ValueError):
        make_twiddles(0)


def test_twiddles_unit_modulus_and_conjugate_symmetric():
    n = 4096
    f = make_twiddles(n).factors.astype(np.complex128)
    assert np.abs(f * np.conj(f) - 1).max() <= 1e-6
    k = np.arange(1, n)
    assert np.abs(f[n - k] - np.conj(f[k])).max() <= 1e-6


@pytest.mark.parametrize("layout", list(Layout))
def test_scene_file_round_trip(tmp_path, rng, layout):
    m = SceneMatrix(random_complex(rng, (16, 8)))
    path = tmp_path / "s.sarc"
    write_scene(path, m, layout)
    raw = path.read_bytes()
    assert raw[:4] == b"SARC"
    assert int.from_bytes(raw[4:8], "little") == 16
    assert int.from_bytes(raw[8:12], "little") == 8
    assert int.from_bytes(raw[12:16], "little") == int(layout)
    assert len(raw) == 16 + 16 * 8 * 8
    assert read_scene(path).data.tobytes() == m.data.tobytes()


def test_split_file_payload_order(tmp_path):
    m = SceneMatrix(np.array([[1 + 2j, 3 + 4j]], dtype=np.complex64))
    write_scene(tmp_path / "s.sarc", m, Layout.SPLIT)
    payload = np.frombuffer((tmp_path / "s.sarc").read_bytes()[16:], "<f4")
    np.testing.assert_array_equal(payload, [1, 3, 2, 4])


def test_read_scene_rejects_bad_files(tmp_path):
    bad = tmp_path / "bad.sarc"
    bad.write_bytes(b"XXXX" + bytes(12))
    with pytest.raises(ValueError, match="magic"):
        read_scene(bad)
    bad.write_bytes(b"SARC" + (2).to_bytes(4, "little") * 2 + bytes(4) + bytes(8))
    with pytest.raises(ValueError, match="payload"):
        read_scene(bad)
