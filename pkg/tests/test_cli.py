import numpy as np
import pytest

from semgkit import cli, ingest
from semgkit.ingest import (ConversionSpec, counts_to_volts, encode_frames,
                            read_recording)
from semgkit.protocol import GestureLabel

SUBCOMMANDS = ["synth-session", "theory-cmrr", "bench-cmrr", "decode",
               "train", "evaluate"]


def run(argv):
    return cli.main(argv)


@pytest.mark.parametrize("sub", SUBCOMMANDS)
def test_help_lists_flags_with_units(sub, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.build_parser().parse_args([sub, "--help"])
    assert exc.value.code == 0
    text = capsys.readouterr().out
    assert "--" in text
    if sub in ("synth-session", "theory-cmrr", "bench-cmrr", "decode"):
        assert "Hz" in text
    if sub in ("synth-session", "bench-cmrr", "train", "evaluate"):
        assert "(s)" in text


def test_usage_error_exit_code(capsys):
    assert run(["synth-session", "--bogus-flag"]) == cli.EXIT_USAGE
    assert run(["no-such-command"]) == cli.EXIT_USAGE


def test_synth_session_reproducible(tmp_path):
    a, b = tmp_path / "a.semg", tmp_path / "b.semg"
    args = ["--seed", "5", "--reps", "2", "--subject", "Z"]
    assert run(["synth-session", "--out", str(a)] + args) == 0
    assert run(["synth-session", "--out", str(b)] + args) == 0
    assert a.read_bytes() == b.read_bytes()


def test_synth_session_block_arithmetic(tmp_path, capsys):
    out = tmp_path / "one.semg"
    assert run(["synth-session", "--out", str(out), "--reps", "1",
                "--gestures", "thumb"]) == 0
    rec = read_recording(out)
    assert rec.channels == 4
    assert rec.sample_rate == 250.0
    assert rec.n_samples == int((5 + 5) * 250)
    hist = rec.label_histogram()
    assert hist[GestureLabel.THUMB] == int(5 * 250)
    assert hist[GestureLabel.NEUTRAL] == int(5 * 250)
    assert "Thumb" in capsys.readouterr().out


def test_out_dir_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("SEMGKIT_OUT_DIR", str(tmp_path / "outputs"))
    assert run(["synth-session", "--reps", "1", "--gestures", "thumb",
                "--seed", "3"]) == 0
    files = list((tmp_path / "outputs").glob("*.semg"))
    assert len(files) == 1


def test_theory_cmrr_stdout(capsys):
    assert run(["theory-cmrr", "--points", "4"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "freq_hz,cmrr_db"
    assert len(lines) == 5
    first = [float(x) for x in lines[1].split(",")]
    assert first[0] == pytest.approx(10.0)


def test_theory_cmrr_set_override(tmp_path, capsys):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    assert run(["theory-cmrr", "--points", "3", "--out", str(out1)]) == 0
    assert run(["theory-cmrr", "--points", "3", "--out", str(out2),
                "--set", "filter_rc_mismatch = 0.01"]) == 0
    assert out1.read_text() != out2.read_text()


def test_unknown_model_key_named(capsys):
    code = run(["theory-cmrr", "--set", "made_up_key = 1"])
    assert code == cli.EXIT_USAGE
    assert "made_up_key" in capsys.readouterr().err


def test_bench_cmrr_outputs(tmp_path, capsys):
    outdir = tmp_path / "bench"
    assert run(["bench-cmrr", "--out", str(outdir), "--points", "5"]) == 0
    sweep = (outdir / "sweep.csv").read_text()
    assert sweep.splitlines()[0] == "freq_hz,cmrr_db,source,flag"
    assert (outdir / "report.txt").exists()
    assert "mean measured CMRR" in capsys.readouterr().out


def test_bench_cmrr_flags_nyquist_violation(tmp_path):
    outdir = tmp_path / "bench"
    code = run(["bench-cmrr", "--out", str(outdir), "--points", "3",
                "--freq-min", "400", "--freq-max", "600", "--fs", "1000"])
    assert code == cli.EXIT_FLAGGED
    assert "error" in (outdir / "sweep.csv").read_text()


def test_bench_cmrr_plot(tmp_path):
    outdir = tmp_path / "bench"
    assert run(["bench-cmrr", "--out", str(outdir), "--points", "4",
                "--plot"]) == 0
    assert (outdir / "sweep.svg").stat().st_size > 1000


def test_decode_round_trip(tmp_path, capsys):
    rng = np.random.default_rng(6)
    counts = rng.integers(-(1 << 23), 1 << 23, size=(500, 4))
    raw = tmp_path / "raw.bin"
    raw.write_bytes(encode_frames(np.arange(500) % 256, counts))
    out = tmp_path / "rec.semg"
    assert run(["decode", "--in", str(raw), "--out", str(out),
                "--vref", "4.5", "--gain", "24"]) == 0
    rec = read_recording(out)
    expected = counts_to_volts(counts, ConversionSpec()).T.astype(np.float32)
    assert np.array_equal(rec.samples, expected)
    assert "ok=500" in capsys.readouterr().out


def test_decode_flags_dirty_stream(tmp_path):
    rng = np.random.default_rng(7)
    counts = rng.integers(-(1 << 23), 1 << 23, size=(50, 4))
    data = encode_frames(np.arange(50) % 256, counts)
    raw = tmp_path / "raw.bin"
    raw.write_bytes(data[:16 * 10] + data[16 * 11:])  # one frame excised
    assert run(["decode", "--in", str(raw), "--out",
                str(tmp_path / "o.semg")]) == cli.EXIT_FLAGGED


def test_decode_empty_stream_is_data_error(tmp_path):
    raw = tmp_path / "raw.bin"
    raw.write_bytes(b"\x00" * 100)
    assert run(["decode", "--in", str(raw), "--out",
                str(tmp_path / "o.semg")]) == cli.EXIT_DATA


def test_train_and_evaluate_round_trip(tmp_path, capsys):
    rec_a = tmp_path / "a.semg"
    rec_b = tmp_path / "b.semg"
    assert run(["synth-session", "--out", str(rec_a), "--reps", "6",
                "--seed", "1", "--subject", "A"]) == 0
    assert run(["synth-session", "--out", str(rec_b), "--reps", "6",
                "--seed", "2", "--subject", "B"]) == 0
    model = tmp_path / "m.semgmodel"
    assert run(["train", "--data", str(rec_a), "--out", str(model)]) == 0
    capsys.readouterr()
    code = run(["evaluate", "--data", str(rec_a), str(rec_b),
                "--threshold", "60", "--csv", str(tmp_path / "r.csv")])
    out = capsys.readouterr().out
    assert "Classification accuracy (%)" in out
    assert "PASS" in out
    assert code == 0
    assert (tmp_path / "r.csv").read_text().startswith("gesture,A,B,avg")


def test_evaluate_split_seed_changes_cells_not_layout(tmp_path, capsys):
    rec = tmp_path / "a.semg"
    assert run(["synth-session", "--out", str(rec), "--reps", "4",
                "--seed", "1", "--noise-scale", "8"]) == 0
    capsys.readouterr()
    run(["evaluate", "--data", str(rec), "--split-seed", "1",
         "--threshold", "0"])
    out1 = capsys.readouterr().out
    run(["evaluate", "--data", str(rec), "--split-seed", "2",
         "--threshold", "0"])
    out2 = capsys.readouterr().out
    head1 = out1.splitlines()[1]
    head2 = out2.splitlines()[1]
    assert head1 == head2  # same layout
    assert len(out1.splitlines()) == len(out2.splitlines())


def test_train_missing_gesture_names_it(tmp_path, capsys):
    rec = tmp_path / "partial.semg"
    assert run(["synth-session", "--out", str(rec), "--reps", "4",
                "--gestures", "thumb,index"]) == 0
    code = run(["train", "--data", str(rec), "--out", str(tmp_path / "m")])
    assert code == cli.EXIT_DATA
    err = capsys.readouterr().err
    assert "Middle" in err and "Ring" in err and "Hand" in err


def test_evaluate_snr_sweep(capsys):
    code = run(["evaluate", "--snr-sweep", "1,20", "--sweep-seeds", "1"])
    assert code == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "noise_scale,mean_accuracy_pct"
    assert len(out.splitlines()) == 3


def test_missing_data_file_is_data_error(tmp_path):
    assert run(["evaluate", "--data", str(tmp_path / "nope.semg")]) == cli.EXIT_DATA
    assert run(["train", "--data", str(tmp_path / "nope.semg")]) == cli.EXIT_DATA
