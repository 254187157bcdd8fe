import hashlib

import numpy as np
import pytest

from fhutch.compact import PointSet
from fhutch.errors import DimensionError, InputError
from fhutch.render import Viewport, auto_viewport, parse_size, parse_viewport, rasterize


def test_singleton_lights_one_pixel():
    img = rasterize(PointSet([[0.3, -2.0]]), 8, 8)
    assert np.count_nonzero(img.gray()) == 1
    assert img.gray().max() == 255


def test_pixel_placement_and_tone_map():
    pts = PointSet([[0.5, 0.5], [1.5, 1.5], [1.6, 1.6], [1.7, 1.9]])
    img = rasterize(pts, 2, 2, Viewport(0, 0, 2, 2))
    # y grows upward: (0.5, 0.5) is bottom-left, the other three share top-right
    assert img.hits.tolist() == [[0, 3], [1, 0]]
    # 255 * ln 2 / ln 4 = 127.5, rounded half to even
    assert img.gray().tolist() == [[0, 255], [128, 0]]


def test_points_outside_viewport_are_dropped():
    img = rasterize(PointSet([[5.0, 5.0], [0.5, 0.5]]), 4, 4, Viewport(0, 0, 1, 1))
    assert img.hits.sum() == 1


def test_top_right_corner_belongs_to_last_pixel():
    img = rasterize(PointSet([[1.0, 1.0]]), 4, 4, Viewport(0, 0, 1, 1))
    assert img.hits[0, 3] == 1


def test_pgm_bytes():
    img = rasterize(PointSet([[0.0, 0.0]]), 3, 2)
    data = img.to_pgm()
    assert data.startswith(b"P5\n3 2\n255\n")
    assert len(data) == len(b"P5\n3 2\n255\n") + 6


def test_render_is_deterministic():
    rng = np.random.default_rng(0)
    A = PointSet(rng.uniform(size=(5000, 2)))
    digests = {hashlib.sha256(rasterize(A, 64, 48).to_pgm()).hexdigest() for _ in range(3)}
    assert len(digests) == 1


def test_auto_viewport_margin():
    vp = auto_viewport(PointSet([[0.0, 0.0], [1.0, 2.0]]))
    assert (vp.x0, vp.y0, vp.x1, vp.y1) == pytest.approx((-0.05, -0.1, 1.05, 2.1))


def test_auto_viewport_pads_flat_sets():
    vp = auto_viewport(PointSet([[0.0, 1.0], [4.0, 1.0]]))
    assert vp.y1 - vp.y0 == pytest.approx(4.4)
    single = auto_viewport(PointSet([[2.0, 3.0]]))
    assert single.x1 - single.x0 == pytest.approx(1.1)


def test_errors():
    with pytest.raises(DimensionError, match="render requires dimension 2"):
        rasterize(PointSet([[0.0]]), 8, 8)
    with pytest.raises(InputError):
        Viewport(0, 0, 0, 0)
    with pytest.raises(InputError):
        rasterize(PointSet([[0.0, 0.0]]), 0, 8)


def test_parsers():
    assert parse_size("512x256") == (512, 256)
    assert parse_viewport("0,0,1,2") == Viewport(0, 0, 1, 2)
    for bad in ("512", "ax3", "0x5"):
        with pytest.raises(InputError):
            parse_size(bad)
    for bad in ("0,0,1", "a,b,c,d", "1,1,1,1"):
        with pytest.raises(InputError):
            parse_viewport(bad)
