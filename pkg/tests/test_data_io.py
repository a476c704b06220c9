from pathlib import Path

import numpy as np
import pytest

from core.csv_exporter import CSVExporter
from core.data_loader import DataLoader
from core.errors import DataParseError, StructuralError
from core.nmf import SynergySet
from core.signal_model import Condition, ForceTrace, PositionTrace
from core.synergy import build_command_stream
from core.synthgen import SynthSpec, generate


@pytest.fixture
def exporter() -> CSVExporter:
    return CSVExporter()


def test_dataset_round_trip_force_format(tmp_path: Path, exporter: CSVExporter):
    dataset = generate(SynthSpec(seed=3, trials=4))
    exporter.export_dataset(dataset, tmp_path, force_format="force")
    loaded = DataLoader.load_trial_set(tmp_path)
    assert loaded.condition_labels == dataset.conditions
    for a, b in zip(dataset.trial_set, loaded):
        assert np.allclose(a.emg.data, b.emg.data, rtol=0, atol=1e-12)
        assert np.allclose(a.force.values, b.force.values, rtol=0, atol=1e-12)
        assert np.allclose(a.position.points, b.position.points, rtol=0, atol=1e-12)
        assert a.emg.channel_labels == b.emg.channel_labels
        assert a.emg.sample_rate_hz == b.emg.sample_rate_hz


def test_dataset_round_trip_pressure_format(tmp_path: Path, exporter: CSVExporter):
    dataset = generate(SynthSpec(seed=3, trials=2))
    written = exporter.export_dataset(dataset, tmp_path)
    assert (tmp_path / "trial_01_pressure.csv") in written
    loaded = DataLoader.load_trial_set(tmp_path)
    for a, b in zip(dataset.trial_set, loaded):
        assert np.allclose(a.force.values, b.force.values, rtol=1e-12, atol=1e-12)


def test_synergy_file_round_trip(tmp_path: Path, exporter: CSVExporter, rng):
    s = SynergySet(
        W=rng.random((16, 3)),
        C=rng.random((3, 25)),
        vaf=0.93,
        seed=5,
        iterations_run=120,
        final_objective=1.25,
        zero_columns=(1,),
    )
    path = exporter.export_synergies(s, tmp_path / "synergies.txt")
    back = DataLoader.load_synergies(path)
    assert np.array_equal(back.W, s.W)
    assert np.array_equal(back.C, s.C)
    assert (back.vaf, back.seed, back.iterations_run) == (0.93, 5, 120)
    assert back.zero_columns == (1,)


def test_synergy_file_bad_magic(tmp_path: Path):
    path = tmp_path / "s.txt"
    path.write_text("d=1\n", encoding="utf-8")
    with pytest.raises(DataParseError):
        DataLoader.load_synergies(path)


def test_synergy_file_bad_cell(tmp_path: Path, exporter: CSVExporter):
    path = exporter.export_synergies(SynergySet(np.ones((2, 1)), np.ones((1, 3)), 1.0), tmp_path / "s.txt")
    lines = path.read_text(encoding="utf-8").splitlines()
    bad_row = lines.index("C") + 1
    lines[bad_row] = "1.0,abc,1.0"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    with pytest.raises(DataParseError) as info:
        DataLoader.load_synergies(path)
    assert info.value.row == bad_row + 1
    assert info.value.column == "2"


def test_emg_parse_error_names_row_and_column(tmp_path: Path):
    path = tmp_path / "trial_01_emg.csv"
    path.write_text("t,ch1,ch2\n0.0,1.0,2.0\n0.005,x,2.0\n", encoding="utf-8")
    with pytest.raises(DataParseError) as info:
        DataLoader.load_emg(path)
    assert info.value.row == 3
    assert info.value.column == "ch1"


def test_emg_missing_cell(tmp_path: Path):
    path = tmp_path / "emg.csv"
    path.write_text("t,ch1,ch2\n0.0,1.0,2.0\n0.005,1.0,\n", encoding="utf-8")
    with pytest.raises(DataParseError) as info:
        DataLoader.load_emg(path)
    assert (info.value.row, info.value.column) == (3, "ch2")


def test_emg_bad_header(tmp_path: Path):
    path = tmp_path / "emg.csv"
    path.write_text("t,a,b\n0,1,2\n", encoding="utf-8")
    with pytest.raises(DataParseError):
        DataLoader.load_emg(path)


def test_empty_file_is_structural(tmp_path: Path):
    path = tmp_path / "emg.csv"
    path.write_text("", encoding="utf-8")
    with pytest.raises(StructuralError):
        DataLoader.load_emg(path)


def test_missing_file(tmp_path: Path):
    with pytest.raises(FileNotFoundError):
        DataLoader.load_position(tmp_path / "absent.csv")


def test_pressure_grid_shape(tmp_path: Path):
    path = tmp_path / "p.csv"
    path.write_text("t,cell_1_1,cell_1_2,cell_2_1,cell_2_2\n0,1,2,3,4\n1,0,0,0,5\n", encoding="utf-8")
    frames = DataLoader.load_pressure(path)
    assert frames.grid_shape == (2, 2)
    assert frames.frames[0].tolist() == [[1.0, 2.0], [3.0, 4.0]]


def test_pressure_incomplete_grid(tmp_path: Path):
    path = tmp_path / "p.csv"
    path.write_text("t,cell_1_1,cell_2_2\n0,1,2\n", encoding="utf-8")
    with pytest.raises(DataParseError):
        DataLoader.load_pressure(path)


def test_segments_round_trip(tmp_path: Path, exporter: CSVExporter):
    conditions = [Condition.WEAK, Condition.WEAK, Condition.STRONG]
    path = exporter.export_segments([3, 4, 5], conditions, tmp_path / "segments.csv")
    segments = DataLoader.load_segments(path)
    assert [s.length for s in segments] == [3, 4, 5]
    assert [s.condition for s in segments] == conditions
    assert segments[-1].stop == 12


def test_segments_with_gap(tmp_path: Path):
    path = tmp_path / "segments.csv"
    path.write_text("trial,condition,start,stop\n1,weak,0,3\n2,strong,4,6\n", encoding="utf-8")
    with pytest.raises(StructuralError):
        DataLoader.load_segments(path)


def test_command_file_round_trip(tmp_path: Path, exporter: CSVExporter, rng):
    stream = build_command_stream(
        ForceTrace(rng.random(7)), PositionTrace(rng.random((2, 7))), 20.0, Condition.STRONG, [3, 4]
    )
    f_h = ForceTrace(rng.random(7))
    path = exporter.export_command(stream, tmp_path / "command_strong.csv", f_h)
    force, position, human, lengths = DataLoader.load_command(path)
    assert np.array_equal(force.values, stream.force.values)
    assert np.array_equal(position.points, stream.position.points)
    assert np.array_equal(human.values, f_h.values)
    assert lengths == [3, 4]


def test_exported_floats_keep_full_precision(tmp_path: Path, exporter: CSVExporter):
    value = 0.1 + 0.2
    path = exporter.export_force(ForceTrace([value]), tmp_path / "force.csv")
    assert DataLoader.load_force(path).values[0] == value


@pytest.mark.parametrize("cell,message", [("inf", "非有限"), ("-5.0", "≥ 0")])
def test_force_rejects_infinite_and_negative(tmp_path: Path, cell: str, message: str):
    path = tmp_path / "force.csv"
    path.write_text(f"t,force\n0,1.0\n1,2.0\n2,{cell}\n3,1.0\n", encoding="utf-8")
    with pytest.raises(DataParseError) as info:
        DataLoader.load_force(path)
    assert (info.value.row, info.value.column) == (4, "force")
    assert message in str(info.value)


def test_position_allows_negative_but_not_infinite(tmp_path: Path):
    path = tmp_path / "position.csv"
    path.write_text("t,x,y\n0,-0.1,0.2\n1,0.0,-0.3\n", encoding="utf-8")
    assert DataLoader.load_position(path).points[:, 1].tolist() == [0.0, -0.3]
    path.write_text("t,x,y\n0,-0.1,0.2\n1,0.0,-inf\n", encoding="utf-8")
    with pytest.raises(DataParseError) as info:
        DataLoader.load_position(path)
    assert (info.value.row, info.value.column) == (3, "y")


def test_pressure_rejects_negative_cell(tmp_path: Path):
    path = tmp_path / "p.csv"
    path.write_text("t,cell_1_1,cell_1_2\n0,1,2\n1,0,-1\n", encoding="utf-8")
    with pytest.raises(DataParseError) as info:
        DataLoader.load_pressure(path)
    assert (info.value.row, info.value.column) == (3, "cell_1_2")


@pytest.mark.parametrize("block,cell", [("W", "-3.0"), ("C", "nan"), ("C", "inf")])
def test_synergy_file_rejects_negative_or_non_finite(
    tmp_path: Path, exporter: CSVExporter, block: str, cell: str
):
    path = exporter.export_synergies(SynergySet(np.ones((2, 2)), np.ones((2, 3)), 1.0), tmp_path / "s.txt")
    lines = path.read_text(encoding="utf-8").splitlines()
    bad_row = lines.index(block) + 2
    cells = lines[bad_row].split(",")
    cells[1] = cell
    lines[bad_row] = ",".join(cells)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    with pytest.raises(DataParseError) as info:
        DataLoader.load_synergies(path)
    assert (info.value.row, info.value.column) == (bad_row + 1, "2")


def test_command_file_rejects_negative_force(tmp_path: Path):
    path = tmp_path / "command_weak.csv"
    path.write_text("t,force,x,y,f_h,trial\n0,1.0,0,0,0.5,1\n1,2.0,0,0,-0.5,1\n", encoding="utf-8")
    with pytest.raises(DataParseError) as info:
        DataLoader.load_command(path)
    assert (info.value.row, info.value.column) == (3, "f_h")


def _manifest(tmp_path: Path, body: str) -> Path:
    (tmp_path / "trials.csv").write_text("trial,condition\n" + body, encoding="utf-8")
    return tmp_path


def test_manifest_rejects_fractional_trial_id(tmp_path: Path):
    with pytest.raises(DataParseError) as info:
        DataLoader.load_manifest(_manifest(tmp_path, "1,weak\n1.5,strong\n"))
    assert (info.value.row, info.value.column) == (3, "trial")


def test_manifest_rejects_duplicate_trial_id(tmp_path: Path):
    with pytest.raises(DataParseError) as info:
        DataLoader.load_manifest(_manifest(tmp_path, "1,weak\n2,weak\n1,strong\n"))
    assert (info.value.row, info.value.column) == (4, "trial")


def test_segments_reject_fractional_bounds(tmp_path: Path):
    path = tmp_path / "segments.csv"
    path.write_text("trial,condition,start,stop\n1,weak,0,3.5\n", encoding="utf-8")
    with pytest.raises(DataParseError) as info:
        DataLoader.load_segments(path)
    assert (info.value.row, info.value.column) == (2, "stop")
