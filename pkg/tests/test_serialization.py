import json

import numpy as np
import pytest

from mvortho.errors import SchemaError
from mvortho.indexing import MultiIndexSet
from mvortho.serialization import (load_recurrence, recurrence_from_json,
                                   recurrence_to_json, save_recurrence,
                                   write_condition_csv, write_log_error_csv)
from mvortho.tensor_product import canonical_reorder, tensor_recurrence
from mvortho.univariate import jacobi_recurrence


def oracle(d=2, n_max=5):
    iset = MultiIndexSet.build(d, n_max)
    unis = [jacobi_recurrence(n_max, 0.4 * i, 1.1 + i) for i in range(d)]
    return canonical_reorder(tensor_recurrence(unis, iset, n_max), iset)


class TestRoundTrip:
    def test_bit_identical(self, tmp_path):
        rec = oracle()
        path = tmp_path / "rec.json"
        save_recurrence(rec, path)
        back = load_recurrence(path)
        assert back.d == rec.d and back.max_degree == rec.max_degree
        for n in range(1, rec.max_degree + 1):
            for i in range(rec.d):
                assert np.array_equal(back.A[n][i], rec.A[n][i])
                assert np.array_equal(back.B[n][i], rec.B[n][i])
            assert np.array_equal(back.lam[n], rec.lam[n])

    def test_double_round_trip_is_stable_text(self):
        rec = oracle()
        once = recurrence_to_json(rec)
        twice = recurrence_to_json(recurrence_from_json(once))
        assert once == twice

    def test_declares_conventions(self):
        doc = json.loads(recurrence_to_json(oracle()))
        assert doc["format_version"] == 1
        assert doc["ordering"] == "graded-lex"
        assert doc["lambda_order"] == "non-increasing"
        assert doc["d"] == 2 and doc["N"] == 5

    def test_non_canonical_allowed(self):
        iset = MultiIndexSet.build(2, 3)
        unis = [jacobi_recurrence(3, 0.0, 0.0)] * 2
        raw = tensor_recurrence(unis, iset, 3)
        back = recurrence_from_json(recurrence_to_json(raw))
        assert back.lam is None


class TestSchemaValidation:
    def test_dimension_mismatch_rejected(self):
        doc = json.loads(recurrence_to_json(oracle()))
        doc["d"] = 3
        with pytest.raises(SchemaError):
            recurrence_from_json(json.dumps(doc))

    def test_degree_mismatch_rejected(self):
        doc = json.loads(recurrence_to_json(oracle()))
        doc["N"] = 7
        with pytest.raises(SchemaError):
            recurrence_from_json(json.dumps(doc))

    def test_matrix_shape_mismatch_rejected(self):
        doc = json.loads(recurrence_to_json(oracle()))
        doc["B"][2][0] = [[1.0, 2.0], [3.0, 4.0]]
        with pytest.raises(SchemaError):
            recurrence_from_json(json.dumps(doc))

    def test_missing_key_rejected(self):
        doc = json.loads(recurrence_to_json(oracle()))
        del doc["ordering"]
        with pytest.raises(SchemaError):
            recurrence_from_json(json.dumps(doc))

    def test_garbage_rejected(self):
        with pytest.raises(SchemaError):
            recurrence_from_json("not json at all")


class TestCsvEmitters:
    def test_log_error_square_and_inf_literals(self, tmp_path):
        err = np.array([[0.0, 1e-3], [1e-3, 1.0]])
        path = tmp_path / "e.csv"
        write_log_error_csv(path, err)
        rows = path.read_text().strip().splitlines()
        assert len(rows) == 2 and all(len(r.split(",")) == 2 for r in rows)
        assert "-inf" in rows[0]
        for token in rows[1].split(","):
            float(token)  # parses as a float, including inf literals

    def test_condition_rows(self, tmp_path):
        path = tmp_path / "cond.csv"
        write_condition_csv(path, [1.0, 10.0, np.inf])
        rows = path.read_text().strip().splitlines()
        assert rows[0] == "degree,cond"
        assert len(rows) == 4
        assert rows[3].split(",")[1] == "inf"
