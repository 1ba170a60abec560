import numpy as np

from curvescope import synthetic
from curvescope.edgelab import canny


def test_seeded_and_in_range():
    a = synthetic.texture(seed=4)
    b = synthetic.texture(seed=4)
    assert a.tobytes() == b.tobytes()
    assert a.min() >= 0.0 and a.max() <= 1.0
    assert not np.array_equal(a, synthetic.texture(seed=5))


def test_lowlight_layout():
    img, cells = synthetic.lowlight_cells()
    assert img.shape == (275, 283)
    assert img.min() >= 0.0 and img.max() <= 1.0
    assert cells
    band = synthetic.cell_boundary_band(img.shape, cells[0])
    assert band.dtype == bool and band.any()


def test_faint_cells_escape_canny():
    img, cells = synthetic.lowlight_cells()
    edges = canny(img)
    missed = [c for c in cells if not (edges & synthetic.cell_boundary_band(img.shape, c)).any()]
    assert missed


def test_shapes():
    assert synthetic.disk(radius=5).sum() > 70
    assert synthetic.disk_boundary_band().any()
    step = synthetic.step_edge()
    assert step[0, 31] == 0.2 and step[0, 32] == 0.8
    blob = synthetic.gaussian_blob()
    assert np.unravel_index(blob.argmax(), blob.shape) in {(31, 31), (31, 32), (32, 31), (32, 32)}
