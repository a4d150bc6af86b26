import json

import numpy as np
import pytest

import smooth_insert as si
from smooth_insert import fileio
from smooth_insert.errors import InputError


def test_field_json_round_trip_box(tmp_path):
    f = si.sample(si.Box([0.0, -1.0], [1.0, 2.0]), (5, 7), lambda x, y: x * y)
    path = tmp_path / "f.json"
    fileio.save_field(f, path)
    g = fileio.load_field(path)
    assert g.domain == f.domain
    assert g.shape == f.shape
    assert np.array_equal(g.values, f.values)
    assert np.array_equal(g.mask, f.mask)


def test_field_json_round_trip_ball_mask(tmp_path):
    f = si.sample(si.Ball([0.5, 0.5], 0.4), (9, 9), lambda x, y: x + y)
    path = tmp_path / "f.json"
    fileio.save_field(f, path)
    obj = json.loads(path.read_text())
    assert "mask" in obj  # partially masked fields serialize their mask
    g = fileio.load_field(path)
    assert np.array_equal(g.mask, f.mask)


def test_field_json_row_major_order(tmp_path):
    f = si.sample(si.Box([0.0, 0.0], [1.0, 1.0]), (2, 3), lambda x, y: 10 * x + y)
    obj = fileio.field_to_json(f)
    assert obj["values"] == [0.0, 0.5, 1.0, 10.0, 10.5, 11.0]


def test_csv_round_trip_1d(tmp_path):
    f = si.sample(si.Box([-1.0], [1.0]), 11, lambda y: y**2)
    path = tmp_path / "f.csv"
    fileio.save_field_csv(f, path)
    g = fileio.load_field_csv(path, f.domain, f.shape)
    assert np.allclose(g.values[g.mask], f.values[f.mask])


def test_csv_round_trip_2d(tmp_path):
    f = si.sample(si.Box([0.0, 0.0], [1.0, 1.0]), (4, 5), lambda x, y: x - y)
    path = tmp_path / "f.csv"
    fileio.save_field_csv(f, path)
    text = path.read_text().splitlines()
    assert text[0] == "x,y,f"
    g = fileio.load_field_csv(path, f.domain, f.shape)
    assert np.allclose(g.values, f.values)


def test_csv_rejects_3d():
    f = si.sample(si.Box([0.0] * 3, [1.0] * 3), (3, 3, 3), lambda x, y, z: x)
    with pytest.raises(InputError):
        fileio.field_to_csv(f)


def test_pgm_round_trip():
    mask = np.zeros((4, 6), dtype=bool)
    mask[1:3, 2:5] = True
    text = fileio.mask_to_pgm(mask)
    assert text.startswith("P2\n6 4\n1\n")
    back = fileio.pgm_to_mask(text)
    assert np.array_equal(back, mask)


def test_pgm_round_trip_1d():
    mask = np.array([True, False, True])
    back = fileio.pgm_to_mask(fileio.mask_to_pgm(mask))
    assert np.array_equal(back, mask)


def test_mask_json_round_trip(tmp_path):
    dom = si.Box([0.0, 0.0], [1.0, 1.0])
    mask = np.zeros((5, 5), dtype=bool)
    mask[2, 2] = mask[0, 4] = True
    path = tmp_path / "m.json"
    fileio.save_mask_json(dom, (5, 5), mask, path)
    dom2, shape2, mask2 = fileio.load_mask_json(path)
    assert dom2 == dom and shape2 == (5, 5)
    assert np.array_equal(mask2, mask)


def test_malformed_domain_kind():
    with pytest.raises(InputError):
        fileio.domain_from_json({"kind": "torus"})


def test_atomic_write_creates_parent(tmp_path):
    target = tmp_path / "nested" / "deep" / "out.txt"
    fileio.atomic_write_text(target, "hello")
    assert target.read_text() == "hello"
