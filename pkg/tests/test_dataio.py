import numpy as np
import pytest

from symode.dataio import (ScaleRecord, denormalize_series, load_csv,
                           load_series_csv, load_trajectories_csv,
                           normalize_series, save_trajectories_csv)
from symode.datasets import TrajectoryDataset
from symode.errors import (DataError, EmptyFileError, MissingColumnError,
                           NonNumericCellError)


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


SERIES_CSV = """date,Q,D,R
2020-01-22,500,17,28
2020-01-23,640,18,30
2020-01-24,900,26,36
"""


class TestLoadSeries:
    def test_loads_single_trajectory(self, tmp_path):
        path = write(tmp_path, "series.csv", SERIES_CSV)
        data = load_csv(path, dt=1.0)
        assert data.n_trajectories == 1
        assert data.var_names == ("Q", "D", "R")
        assert data.trajectories[0].shape == (3, 3)
        assert data.trajectories[0][1, 0] == 640

    def test_expected_columns_enforced(self, tmp_path):
        path = write(tmp_path, "series.csv", SERIES_CSV)
        with pytest.raises(MissingColumnError) as err:
            load_series_csv(path, expected_columns=("Q", "D", "R", "X"))
        assert err.value.column == "X"

    def test_non_numeric_cell_location(self, tmp_path):
        bad = SERIES_CSV.replace("900", "n/a")
        path = write(tmp_path, "series.csv", bad)
        with pytest.raises(NonNumericCellError) as err:
            load_series_csv(path)
        assert err.value.row == 3
        assert err.value.column == "Q"
        assert err.value.value == "n/a"

    def test_bad_date_rejected(self, tmp_path):
        bad = SERIES_CSV.replace("2020-01-23", "23/01/2020")
        path = write(tmp_path, "series.csv", bad)
        with pytest.raises(DataError):
            load_series_csv(path)

    def test_empty_file(self, tmp_path):
        path = write(tmp_path, "empty.csv", "")
        with pytest.raises(EmptyFileError):
            load_csv(path)

    def test_single_data_row_rejected(self, tmp_path):
        path = write(tmp_path, "short.csv",
                     "date,Q\n2020-01-22,500\n")
        with pytest.raises(DataError):
            load_series_csv(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            load_csv(tmp_path / "nope.csv")


class TestTrajectoryRoundTrip:
    def test_round_trip_full_precision(self, tmp_path, sir_dataset):
        path = tmp_path / "traj.csv"
        save_trajectories_csv(path, sir_dataset)
        loaded = load_csv(path, dt=sir_dataset.dt)
        assert loaded.var_names == sir_dataset.var_names
        assert loaded.n_trajectories == sir_dataset.n_trajectories
        for a, b in zip(loaded.trajectories, sir_dataset.trajectories):
            assert np.array_equal(a, b)

    def test_header_dispatch(self, tmp_path, sir_dataset):
        path = tmp_path / "traj.csv"
        save_trajectories_csv(path, sir_dataset)
        direct = load_trajectories_csv(path, sir_dataset.dt)
        assert direct.var_names == sir_dataset.var_names

    def test_unknown_header_rejected(self, tmp_path):
        path = write(tmp_path, "odd.csv", "foo,bar\n1,2\n")
        with pytest.raises(MissingColumnError):
            load_csv(path)

    def test_short_trajectory_rejected(self, tmp_path):
        path = write(tmp_path, "short.csv",
                     "trajectory_id,step,x\n0,0,1.0\n")
        with pytest.raises(DataError):
            load_csv(path)


class TestNormalization:
    def make_data(self):
        rows = np.array([[100.0, 50.0], [200.0, 100.0], [400.0, 100.0]])
        return TrajectoryDataset([rows], 1.0, ("a", "b"))

    def test_none_is_identity(self):
        data = self.make_data()
        out, record = normalize_series(data, "none")
        assert record == ScaleRecord("none", 1.0)
        assert np.array_equal(out.trajectories[0], data.trajectories[0])

    def test_by_constant(self):
        out, record = normalize_series(self.make_data(), "by_constant",
                                       constant=1000.0)
        assert record.scale == 1000.0
        assert out.trajectories[0][0, 0] == pytest.approx(0.1)

    def test_by_constant_requires_value(self):
        with pytest.raises(ValueError):
            normalize_series(self.make_data(), "by_constant")

    def test_by_max_total(self):
        out, record = normalize_series(self.make_data(), "by_max_total")
        assert record.scale == 500.0
        totals = out.trajectories[0].sum(axis=1)
        assert totals.max() == pytest.approx(1.0)

    def test_round_trip(self):
        data = self.make_data()
        out, record = normalize_series(data, "by_max_total")
        back = denormalize_series(out, record)
        assert np.max(np.abs(back.trajectories[0] - data.trajectories[0])) <= 1e-12

    def test_invalid_mode(self):
        with pytest.raises(ValueError):
            normalize_series(self.make_data(), "standardize")

    def test_nonpositive_scale_rejected(self):
        with pytest.raises(ValueError):
            normalize_series(self.make_data(), "by_constant", constant=0.0)
