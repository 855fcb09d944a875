import numpy as np
import pytest

from cfdrisk.errors import DataError, FormatError
from cfdrisk.io import ingest_timeseries, read_table, write_table, write_timeseries


def _write(path, rows, header="hour,plant,value"):
    path.write_text(header + "\n" + "".join(r + "\n" for r in rows))
    return path


def test_ingest_two_rows(tmp_path):
    out = ingest_timeseries(_write(tmp_path / "a.csv", ["0,w,0.5", "1,w,0.25"]), hours=2)
    assert list(out) == ["w"]
    assert out["w"].tolist() == [0.5, 0.25]


def test_ingest_missing_hour_names_hour_and_key(tmp_path):
    rows = [f"{h},DK_wind,0.1" for h in range(8760) if h != 7]
    with pytest.raises(FormatError, match=r"missing hour 7 for plant DK_wind"):
        ingest_timeseries(_write(tmp_path / "a.csv", rows), hours=8760)


@pytest.mark.parametrize("value", ["NaN", "inf", "abc", ""])
def test_ingest_bad_values(tmp_path, value):
    with pytest.raises(FormatError):
        ingest_timeseries(_write(tmp_path / "a.csv", ["0,w,0.5", f"1,w,{value}"]))


def test_ingest_duplicate(tmp_path):
    with pytest.raises(FormatError, match="duplicate"):
        ingest_timeseries(_write(tmp_path / "a.csv", ["0,w,0.5", "0,w,0.5", "1,w,0.2"]))


def test_ingest_bad_header_and_missing_file(tmp_path):
    with pytest.raises(FormatError):
        ingest_timeseries(_write(tmp_path / "a.csv", ["0,w,0.5"], header="t,plant,v"))
    with pytest.raises(DataError):
        ingest_timeseries(tmp_path / "nope.csv")
    with pytest.raises(FormatError, match="outside"):
        ingest_timeseries(_write(tmp_path / "b.csv", ["0,w,1", "5,w,1"]), hours=2)


@pytest.mark.parametrize("name", ["s.csv", "s.csv.gz"])
def test_timeseries_round_trip(tmp_path, rng, name):
    series = {"b": rng.uniform(0, 1, 50), "a": rng.normal(0, 1e6, 50)}
    path = write_timeseries(tmp_path / name, series, "zone")
    back = ingest_timeseries(path)
    for k, v in series.items():
        assert np.array_equal(back[k], v)


def test_gzip_is_deterministic(tmp_path):
    series = {"a": np.linspace(0, 1, 20)}
    a = write_timeseries(tmp_path / "a.csv.gz", series).read_bytes()
    b = write_timeseries(tmp_path / "b.csv.gz", series).read_bytes()
    assert a == b


def test_table_round_trip(tmp_path):
    path = write_table(tmp_path / "t.csv", ["x", "y"], [["a", 0.1], ["b", None]])
    rows = read_table(path, required=["x", "y"])
    assert rows == [{"x": "a", "y": "0.1"}, {"x": "b", "y": ""}]
    with pytest.raises(FormatError):
        read_table(path, required=["z"])
