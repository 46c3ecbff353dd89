import json
import math
import wave
from pathlib import Path

import pytest

import mvforge


def test_metrics_match_hand_values():
    assert mvforge.bleu(["a b c"], ["a b d"], max_n=1) == pytest.approx(200 / 3)
    p, r, f = mvforge.rouge_l("a b c d", "a c d")
    assert (p, r) == pytest.approx((75.0, 100.0))
    assert f == pytest.approx(600 / 7)
    assert mvforge.round_half_up(0.05) == 0.1


def test_identity_pairs_score_one_hundred():
    pairs = [("a red car drives past", "a red car drives past"), ("night, rain.", "night, rain.")]
    report = mvforge.evaluate_pairs(pairs, jobs=2)
    assert list(report) == mvforge.METRIC_COLUMNS
    assert all(mvforge.round_half_up(v) == 100.0 for v in report.values())


def test_table_render_highlights_top_rows():
    rows = [("1234", {c: 50.0 for c in mvforge.METRIC_COLUMNS}), ("14", {c: 10.0 for c in mvforge.METRIC_COLUMNS})]
    md = mvforge.render_table(rows, "markdown", 1)
    assert "**50.0**" in md and "**10.0**" not in md
    csv = mvforge.render_table(rows, "csv", 0)
    assert mvforge.parse_table_csv(csv)[1][0] == "14"


def test_target_round_trip():
    times = mvforge.sample_frame_times(30.0)
    assert len(times) == 15
    text = mvforge.render_target("A dancer in a hall.", [(t, f"frame {i}") for i, t in enumerate(times)])
    overview, breakdown = mvforge.parse_target(text)
    assert overview == "A dancer in a hall."
    assert [t for t, _ in breakdown] == times


def test_masks_and_split():
    assert mvforge.mask_name("41") == "14"
    assert len(mvforge.table_masks()) == 8
    ids = [f"t{i}" for i in range(100)]
    train, test = mvforge.split_ids(ids, 90, 5)
    assert (train, test) == mvforge.split_ids(ids, 90, 5)
    assert len(test) == 10 and sorted(train + test) == sorted(ids)
    with pytest.raises(mvforge.ArgumentError):
        mvforge.split_ids(ids, 0, 5)


def write_click(path: Path, bpm: float, seconds: float, rate: int = 22050) -> None:
    samples = bytearray()
    period = int(rate * 60 / bpm)
    for n in range(int(seconds * rate)):
        k = n % period
        v = int(20000 * math.exp(-k / 80) * math.sin(2 * math.pi * 1000 * k / rate)) if k < 800 else 0
        samples += v.to_bytes(2, "little", signed=True)
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(rate)
        w.writeframes(bytes(samples))


def test_features_on_click_track(tmp_path):
    wav = tmp_path / "click.wav"
    write_click(wav, 120.0, 12.0)
    f = mvforge.extract_features(wav)
    assert abs(f["tempo_bpm"] - 120.0) <= 2.0
    assert f["chords"][0][1] == 0.0


def test_cli_pipeline(tmp_path):
    out = tmp_path / "out"
    toy = ["toy-corpus", "--dir", str(tmp_path / "toy"), "--tracks", "4", "--duration", "6"]
    code, _, err = mvforge.run_cli(["--out", str(out)] + toy)
    assert code == 0, err
    manifest = next((tmp_path / "toy").glob("*.tsv"))
    for args in (["ingest", "--manifest", str(manifest)], ["filter"], ["split", "--train-count", "3"],
                 ["build", "--mask", "14", "--created-at", "2024-01-01T00:00:00Z"]):
        code, _, err = mvforge.run_cli(["--out", str(out)] + args)
        assert code == 0, err
    lines = (out / "datasets" / "14" / "test.jsonl").read_text().splitlines()
    assert lines and all(mvforge.check_example_line(l, "14") == "" for l in lines)
    assert json.loads((out / "runs" / "build.json").read_text())["command"] == "build"


def test_cli_usage_error():
    code, _, err = mvforge.run_cli(["no-such-command"])
    assert code == 1 and err
