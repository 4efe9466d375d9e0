import pytest

from slpplots.csvio import SchemaError, read_sweep_csv

HEADER = ("precoder,gamma_db,xi,delta,epsilon,avg_power_dbw,ser_avg,"
          "ser_user_1,ser_user_2,ser_user_3,ser_user_4,"
          "eta,infeasible_rate,blocks,slots,seed")

ROW = "nonrobust,10,0.05,0.141421356,0.01,23.5991189,0.109618,0.1,0.11,0.12,0.1,0.111671,0,200,50,1"


def write(tmp_path, text):
    p = tmp_path / "sweep.csv"
    p.write_text(text)
    return p


def test_reads_valid_file(tmp_path):
    table = read_sweep_csv(write(tmp_path, HEADER + "\n" + ROW + "\n"))
    assert table.n_users == 4
    assert len(table.rows) == 1
    r = table.rows[0]
    assert r.precoder == "nonrobust"
    assert r.gamma_db == 10.0
    assert r.ser_user == [0.1, 0.11, 0.12, 0.1]
    assert r.blocks == 200 and r.seed == 1


def test_header_only_is_schema_valid(tmp_path):
    table = read_sweep_csv(write(tmp_path, HEADER + "\n"))
    assert table.rows == [] and table.n_users == 4


def test_missing_column_named_in_error(tmp_path):
    broken = HEADER.replace("avg_power_dbw,", "")
    with pytest.raises(SchemaError, match="avg_power_dbw"):
        read_sweep_csv(write(tmp_path, broken + "\n" + ROW + "\n"))


def test_renamed_user_column_rejected(tmp_path):
    broken = HEADER.replace("ser_user_1", "ser_1")
    with pytest.raises(SchemaError, match="ser_user_1"):
        read_sweep_csv(write(tmp_path, broken + "\n"))


def test_missing_suffix_column(tmp_path):
    broken = HEADER.replace(",infeasible_rate", "")
    with pytest.raises(SchemaError, match="infeasible_rate"):
        read_sweep_csv(write(tmp_path, broken + "\n"))


def test_trailing_column_rejected(tmp_path):
    with pytest.raises(SchemaError, match="extra"):
        read_sweep_csv(write(tmp_path, HEADER + ",extra\n"))


def test_empty_file_rejected(tmp_path):
    with pytest.raises(SchemaError, match="header"):
        read_sweep_csv(write(tmp_path, ""))


def test_single_user_schema(tmp_path):
    header = HEADER.replace("ser_user_1,ser_user_2,ser_user_3,ser_user_4", "ser_user_1")
    row = "perfect,0,0.05,0.14,0.01,10,0.2,0.2,0.1,0,10,5,7"
    table = read_sweep_csv(write(tmp_path, header + "\n" + row + "\n"))
    assert table.n_users == 1
    assert table.rows[0].ser_user == [0.2]


def test_series_sorted_and_precoders_ordered(tmp_path):
    rows = [
        ROW.replace("nonrobust,10", "worstcase,20"),
        ROW,
        ROW.replace("nonrobust,10", "nonrobust,0"),
    ]
    table = read_sweep_csv(write(tmp_path, HEADER + "\n" + "\n".join(rows) + "\n"))
    assert table.precoders == ["worstcase", "nonrobust"]
    assert [r.gamma_db for r in table.series("nonrobust")] == [0.0, 10.0]
