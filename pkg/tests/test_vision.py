import math

import numpy as np
import pytest

from soccerbot.vision import (
    CameraPose, ColorLut, LensModel, OutOfModel, Palette, VisionPipeline,
    classify, pack_yuyv, reference_lut, unpack_yuyv,
)
from soccerbot.vision import detect
from soccerbot.vision.lut import (CLASS_BALL, CLASS_FIELD, CLASS_GOAL,
                                  CLASS_LINE, CLASS_UNKNOWN, MAGIC)
from soccerbot.errors import DomainError

LENS = LensModel()


def solid_frame(yuv, width=800, height=600):
    y = np.full((height, width), yuv[0], dtype=np.uint8)
    u = np.full((height, width), yuv[1], dtype=np.uint8)
    v = np.full((height, width), yuv[2], dtype=np.uint8)
    return y, u, v


# -- lens --------------------------------------------------------------------

def test_undistort_principal_point():
    az, theta = LENS.undistort(400.0, 300.0)
    assert theta == 0.0


def test_undistort_45_right():
    az, theta = LENS.undistort(600.0, 300.0)
    assert theta == pytest.approx(200.0 / 254.65)
    assert theta == pytest.approx(math.radians(45.0), abs=2e-4)
    assert az == pytest.approx(0.0)


def test_undistort_azimuth_up():
    az, theta = LENS.undistort(400.0, 100.0)
    assert theta == pytest.approx(200.0 / 254.65)
    assert az == pytest.approx(math.pi / 2)


def test_undistort_out_of_model():
    tight = LensModel(f=100.0)
    with pytest.raises(OutOfModel):
        tight.undistort(800.0, 300.0)


def test_project_undistort_identity():
    # forward-project then undistort: identity within 0.5 px for theta < 85 deg
    rng = np.random.default_rng(5)
    for _ in range(500):
        u = rng.uniform(0, 800)
        v = rng.uniform(0, 600)
        if LENS.theta_of_r(math.hypot(u - 400, v - 300)) > math.radians(85):
            continue
        ray = LENS.ray(u, v)
        uu, vv = LENS.project(ray)
        assert math.hypot(uu - u, vv - v) < 0.5


def test_project_undistort_identity_with_poly():
    lens = LensModel(k1=0.05, k2=-0.01)
    for u, v in [(500, 300), (400, 150), (650, 450), (100, 80)]:
        ray = lens.ray(u, v)
        uu, vv = lens.project(ray)
        assert math.hypot(uu - u, vv - v) < 0.5


# -- LUT ----------------------------------------------------------------------

def test_lut_file_round_trip(tmp_path):
    lut = reference_lut()
    path = tmp_path / "colors.lut"
    lut.save(path)
    blob = path.read_bytes()
    assert blob[:8] == MAGIC
    assert len(blob) == 8 + 64 ** 3
    again = ColorLut.load(path)
    assert np.array_equal(again.table, lut.table)
    assert (tmp_path / "colors.lut.json").exists()


def test_lut_grow_and_erase():
    lut = ColorLut()
    lut.grow(133, 53, 215, CLASS_BALL, radius=2)
    assert lut.lookup(133, 53, 215) == CLASS_BALL
    assert lut.lookup(133 + 4, 53, 215) == CLASS_BALL  # neighbor cell
    lut.grow(133, 53, 215, CLASS_UNKNOWN, radius=2)
    assert lut.lookup(133, 53, 215) == CLASS_UNKNOWN


def test_lut_rejects_bad_table():
    with pytest.raises(ValueError):
        ColorLut(np.full((64, 64, 64), 9, dtype=np.uint8))


# -- classify ------------------------------------------------------------------

def test_classify_all_unknown_lut():
    frame = pack_yuyv(*solid_frame(Palette().ball))
    counts = classify(frame, ColorLut())
    assert counts[CLASS_BALL].sum() == 0
    assert (counts[CLASS_UNKNOWN] == 16).all()


def test_classify_uniform_orange():
    frame = pack_yuyv(*solid_frame(Palette().ball))
    counts = classify(frame, reference_lut())
    assert (counts[CLASS_BALL] == 16).all()


def test_classify_half_green_half_white_seam():
    palette = Palette()
    y, u, v = solid_frame(palette.field)
    for plane, value in zip((y, u, v), palette.line):
        plane[:, 402:] = value
    counts = classify(pack_yuyv(y, u, v), reference_lut())
    # left of the seam block: pure green; right: pure white
    assert (counts[CLASS_FIELD][:, :100] == 16).all()
    assert (counts[CLASS_LINE][:, 101:] == 16).all()
    # seam block column 100 covers pixels 400..403: split 8/8
    assert (counts[CLASS_FIELD][:, 100] == 8).all()
    assert (counts[CLASS_LINE][:, 100] == 8).all()


def test_classify_counts_sum_to_16():
    rng = np.random.default_rng(9)
    y = rng.integers(0, 256, (600, 800), dtype=np.uint8)
    u = rng.integers(0, 256, (600, 800), dtype=np.uint8)
    v = rng.integers(0, 256, (600, 800), dtype=np.uint8)
    lut = ColorLut(rng.integers(0, 6, (64, 64, 64), dtype=np.uint8))
    counts = classify(pack_yuyv(y, u, v), lut)
    assert (counts.sum(axis=0) == 16).all()


def test_classify_pure_function():
    rng = np.random.default_rng(10)
    y = rng.integers(0, 256, (600, 800), dtype=np.uint8)
    frame = pack_yuyv(y, y, y)
    lut = reference_lut()
    assert np.array_equal(classify(frame, lut), classify(frame, lut))


def test_classify_dimension_mismatch():
    with pytest.raises(DomainError):
        classify(b"\x00" * 100, ColorLut())


def test_yuyv_round_trip_uniform_chroma():
    y, u, v = solid_frame((120, 60, 200), width=16, height=4)
    yy, uu, vv = unpack_yuyv(pack_yuyv(y, u, v), 16, 4)
    assert np.array_equal(y, yy) and np.array_equal(u, uu) and np.array_equal(v, vv)


# -- field boundary -------------------------------------------------------------

def test_boundary_all_green():
    counts = np.full((150, 200), 16, dtype=np.uint8)
    assert (detect.field_boundary(counts) == 0).all()


def test_boundary_no_green_sentinel():
    counts = np.zeros((150, 200), dtype=np.uint8)
    assert (detect.field_boundary(counts) == 150).all()


def test_boundary_green_below_row_50():
    counts = np.zeros((150, 200), dtype=np.uint8)
    counts[50:, :] = 16
    assert (detect.field_boundary(counts) == 50).all()


# -- ball ------------------------------------------------------------------------

def open_boundary(cols=200):
    return np.zeros(cols, dtype=int)


def test_ball_absent():
    assert detect.detect_ball(np.zeros((150, 200), np.uint8), open_boundary()) is None


def test_ball_blob_centroid():
    counts = np.zeros((150, 200), np.uint8)
    counts[99:103, 99:103] = 16  # 4x4-cell solid blob around cell (100, 100)
    blob = detect.detect_ball(counts, open_boundary())
    px, py = blob.centroid_pixel
    assert math.hypot(px - 402, py - 402) <= 2.0 * math.sqrt(2)
    assert abs(px - 402) <= 2 and abs(py - 402) <= 2
    assert blob.area == 16


def test_ball_largest_wins():
    counts = np.zeros((150, 200), np.uint8)
    counts[10:14, 10:15] = 16   # area 20
    counts[100:102, 100:103] = 16  # area 6
    blob = detect.detect_ball(counts, open_boundary())
    assert blob.area == 20
    assert blob.centroid_cell[1] < 50


def test_ball_respects_boundary():
    counts = np.zeros((150, 200), np.uint8)
    counts[10:14, 10:14] = 16
    boundary = np.full(200, 50, dtype=int)  # field starts at row 50
    assert detect.detect_ball(counts, boundary) is None


def test_ball_minimum_area():
    counts = np.zeros((150, 200), np.uint8)
    counts[10:11, 10:13] = 16  # 3 cells < 4
    assert detect.detect_ball(counts, open_boundary()) is None


# -- goal -------------------------------------------------------------------------

def test_goal_empty():
    assert detect.detect_goal(np.zeros((150, 200), np.uint8), open_boundary()) == []


def test_goal_two_posts_ordered():
    counts = np.zeros((150, 200), np.uint8)
    boundary = np.full(200, 40, dtype=int)
    counts[32:52, 60:62] = 16    # left post straddling the boundary
    counts[32:52, 140:142] = 16  # right post
    posts = detect.detect_goal(counts, boundary)
    assert len(posts) == 2
    assert posts[0].centroid_cell[0] < posts[1].centroid_cell[0]


def test_goal_flat_blob_rejected():
    counts = np.zeros((150, 200), np.uint8)
    boundary = np.full(200, 40, dtype=int)
    counts[39:42, 60:90] = 16  # wide flat blob, ratio < 2
    assert detect.detect_goal(counts, boundary) == []


def test_goal_outside_band_rejected():
    counts = np.zeros((150, 200), np.uint8)
    boundary = np.full(200, 20, dtype=int)
    counts[100:130, 60:62] = 16  # tall but far below the boundary
    assert detect.detect_goal(counts, boundary) == []


# -- lines and crossings ------------------------------------------------------------

def stroke_mask():
    return np.zeros((150, 200), np.uint8)


def test_lines_blank():
    segments, crossings = detect.detect_lines_and_crossings(
        stroke_mask(), open_boundary())
    assert segments == [] and crossings == []


def test_plus_crossing():
    counts = stroke_mask()
    counts[75, 55:96] = 16   # horizontal stroke, 41 cells
    counts[55:96, 75] = 16   # vertical stroke
    segments, crossings = detect.detect_lines_and_crossings(counts, open_boundary())
    assert len(crossings) == 1
    assert crossings[0].kind == "X"
    cx, cy = crossings[0].cell
    assert abs(cx - 75) <= 1 and abs(cy - 75) <= 1
    assert len(segments) in (2, 3, 4)


def test_tee_crossing():
    counts = stroke_mask()
    counts[75, 55:96] = 16   # horizontal stroke
    counts[75:106, 75] = 16  # stem going down
    segments, crossings = detect.detect_lines_and_crossings(counts, open_boundary())
    kinds = [c.kind for c in crossings]
    assert kinds == ["T"]


def test_thick_plus_crossing():
    counts = stroke_mask()
    counts[74:77, 45:106] = 16
    counts[45:106, 74:77] = 16
    _, crossings = detect.detect_lines_and_crossings(counts, open_boundary())
    assert [c.kind for c in crossings] == ["X"]


def test_diagonal_plus_crossing():
    counts = stroke_mask()
    for d in range(-25, 26):
        counts[75 + d, 75 + d] = 16
        counts[75 - d, 75 + d] = 16
    _, crossings = detect.detect_lines_and_crossings(counts, open_boundary())
    assert [c.kind for c in crossings] == ["X"]


def test_single_line_no_crossing():
    counts = stroke_mask()
    counts[60, 20:180] = 16
    segments, crossings = detect.detect_lines_and_crossings(counts, open_boundary())
    assert crossings == []
    assert len(segments) == 1
    seg = segments[0]
    assert abs(seg.direction[1]) < 0.05  # horizontal
    assert seg.length > 140


def test_segment_merge():
    counts = stroke_mask()
    counts[60, 20:80] = 16
    counts[60, 82:140] = 16  # gap of 2 cells, collinear
    segments, _ = detect.detect_lines_and_crossings(counts, open_boundary())
    assert len(segments) == 1


def test_thinning_reduces_to_single_cell_width():
    mask = np.zeros((60, 60), bool)
    mask[20:26, 5:55] = True
    skel = detect.zhang_suen_thin(mask)
    assert 40 <= skel.sum() <= 55  # roughly one cell per column


# -- pipeline ------------------------------------------------------------------------

def scene_frame():
    """Synthetic scene: green field lower half, white line, orange ball."""
    palette = Palette()
    y, u, v = solid_frame(palette.background)
    for plane, val in zip((y, u, v), palette.field):
        plane[200:, :] = val
    for plane, val in zip((y, u, v), palette.line):
        plane[400:412, :] = val
    for plane, val in zip((y, u, v), palette.ball):
        yy, xx = np.mgrid[0:600, 0:800]
        disc = (yy - 300) ** 2 + (xx - 500) ** 2 <= 30 ** 2
        plane[disc] = val
    return pack_yuyv(y, u, v)


def test_pipeline_end_to_end_smoke():
    pipe = VisionPipeline(reference_lut())
    det = pipe.process(scene_frame(), CameraPose())
    assert det.ball is not None
    assert abs(det.ball.pixel[0] - 500) < 6
    assert abs(det.ball.pixel[1] - 300) < 6
    assert len(det.line_segments) >= 1
    assert det.field_boundary.shape == (200,)
    assert (det.field_boundary[:4] == 50).all()


def test_pipeline_deterministic():
    pipe = VisionPipeline(reference_lut())
    frame = scene_frame()
    a = pipe.process(frame).to_dict()
    b = pipe.process(frame).to_dict()
    assert a == b
