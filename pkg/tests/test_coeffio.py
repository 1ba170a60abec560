import struct

import numpy as np
import pytest

from curvescope import coeffio
from curvescope.fdct import forward


@pytest.fixture
def coeffs(plan_cache, rng):
    return forward(plan_cache(70, 64, 3), rng.random((70, 64)))


def test_bit_exact_round_trip(coeffs, tmp_path):
    path = tmp_path / "c.cvl"
    coeffio.save_coeffs(coeffs, path)
    back = coeffio.load_coeffs(path)
    assert (back.m, back.n, back.J, back.n_theta, back.finest) == (70, 64, 3, 16, "curvelets")
    for (_, _, a), (_, _, b) in zip(coeffs, back):
        assert a.tobytes() == b.tobytes()
    assert coeffio.dumps(back) == path.read_bytes()


def test_layout(coeffs):
    buf = coeffio.dumps(coeffs)
    assert buf[:4] == b"CVL1"
    assert struct.unpack_from("<5I", buf, 4) == (70, 64, 3, 16, 0)
    rows, cols = struct.unpack_from("<2I", buf, 24)
    assert (rows, cols) == coeffs[1, 1].shape
    first = np.frombuffer(buf, dtype="<f8", count=2, offset=32)
    assert first[0] == coeffs[1, 1][0, 0].real and first[1] == coeffs[1, 1][0, 0].imag


def test_wavelet_mode(plan_cache, tmp_path):
    c = forward(plan_cache(64, 64, 3, 16, "wavelets"), np.ones((64, 64)))
    back = coeffio.loads(coeffio.dumps(c))
    assert back.finest == "wavelets" and len(back.scale(3)) == 1


@pytest.mark.parametrize(
    "mutate,msg",
    [
        (lambda b: b"XXXX" + b[4:], "magic"),
        (lambda b: b[:10], "truncated"),
        (lambda b: b[:-8], "truncated"),
        (lambda b: b + b"\0", "trailing"),
    ],
)
def test_corrupt(coeffs, mutate, msg):
    with pytest.raises(coeffio.CVLFormatError, match=msg):
        coeffio.loads(mutate(coeffio.dumps(coeffs)))
