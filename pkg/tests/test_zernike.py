import numpy as np
import pytest

from fringebos.errors import EmptySpec
from fringebos.zernike import (
    ZernikeSpec,
    osa_to_nm,
    unit_disk_coords,
    zernike_eval,
    zernike_term,
)


def test_osa_index_table():
    # first ten single indices and their (n, m)
    expected = [(0, 0), (1, -1), (1, 1), (2, -2), (2, 0), (2, 2),
                (3, -3), (3, -1), (3, 1), (3, 3)]
    assert [osa_to_nm(j) for j in range(10)] == expected


def test_tilt_term_linear_in_y():
    # c = [0, 1]: Z_1 = 2 rho sin(theta) = 2 * y_normalized
    field = zernike_eval(ZernikeSpec((0.0, 1.0)), 33, 33).data
    mid = 16
    assert np.allclose(field[mid, :], 0.0, atol=1e-12)  # zero on center line
    r = min(33, 33) / 2.0
    y = (np.arange(33) - 16.0) / r
    np.testing.assert_allclose(field[:, 5], 2.0 * y, atol=1e-12)


def test_orthonormality_oracle():
    # numerical inner products over the inscribed disk approximate
    # orthonormality (normalized polynomials, area-averaged)
    n = 501
    rho, theta = unit_disk_coords(n, n)
    mask = rho <= 1.0
    area = mask.sum()
    terms = [zernike_term(j, rho, theta) for j in range(8)]
    gram = np.empty((8, 8))
    for a in range(8):
        for b in range(8):
            gram[a, b] = (terms[a] * terms[b])[mask].sum() / area
    np.testing.assert_allclose(gram, np.eye(8), atol=0.02)


def test_eval_is_linear_combination():
    rho, theta = unit_disk_coords(21, 17)
    spec = ZernikeSpec((0.5, -1.0, 0.0, 2.0))
    direct = sum(c * zernike_term(j, rho, theta)
                 for j, c in enumerate(spec.coefficients) if c != 0.0)
    np.testing.assert_allclose(zernike_eval(spec, 21, 17).data, direct, atol=1e-12)


def test_outside_disk_unclipped():
    # corner of a square image has rho = sqrt(2); defocus Z_4 keeps growing
    field = zernike_eval(ZernikeSpec((0.0, 0.0, 0.0, 0.0, 1.0)), 41, 41).data
    assert abs(field[0, 0]) > abs(field[20, 0])  # corner beyond disk edge


def test_empty_spec_rejected():
    with pytest.raises(EmptySpec):
        zernike_eval(ZernikeSpec(()), 8, 8)


def test_piston_constant():
    field = zernike_eval(ZernikeSpec((3.0,)), 16, 12).data
    np.testing.assert_allclose(field, 3.0)
