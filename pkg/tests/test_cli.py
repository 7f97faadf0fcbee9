import numpy as np

from garble.audio_io import AudioBuffer, read_wav, write_wav
from garble.cli import main

from conftest import band_limited_noise, make_corpus, write_descriptor


def test_attack_single_file(tmp_path):
    src = tmp_path / "in.wav"
    write_wav(band_limited_noise(1, n=2000), src)
    out = tmp_path / "out.wav"
    code = main(["attack", "--in", str(src), "--out", str(out),
                 "--kind", "reverse-overlay", "--gain-db", "-15"])
    assert code == 0
    assert len(read_wav(out).samples) == 2000


def test_attack_batch(tmp_path):
    in_dir = tmp_path / "in"
    in_dir.mkdir()
    for i in range(2):
        write_wav(band_limited_noise(i, n=1500), in_dir / f"s{i}.wav")
    out_dir = tmp_path / "out"
    code = main(["attack", "--in-dir", str(in_dir), "--out-dir", str(out_dir),
                 "--gains", "0,-5,-10,-15,-20"])
    assert code == 0
    assert len(list(out_dir.rglob("*.wav"))) == 10
    assert (out_dir / "x+d-15" / "s0.wav").exists()


def test_analyze_emits_csv_pgm_and_figures(tmp_path):
    src = tmp_path / "sig.wav"
    write_wav(band_limited_noise(3, n=8000), src)
    out_dir = tmp_path / "analysis"
    code = main(["analyze", "--in", str(src), "--out-dir", str(out_dir)])
    assert code == 0
    for name in ("sig_fft.csv", "sig_fft.png", "sig_melspec.csv", "sig_melspec.pgm",
                 "sig_melspec.png", "sig_mfcc.csv", "sig_mfcc.pgm"):
        assert (out_dir / name).exists(), name


def test_wer_command_prints_tsv(tmp_path, capsys):
    ref = tmp_path / "ref.txt"
    hyp = tmp_path / "hyp.txt"
    ref.write_text("0 100 she had your dark suit\n")
    hyp.write_text("she had dark suit\n")
    assert main(["wer", "--ref", str(ref), "--hyp", str(hyp)]) == 0
    fields = capsys.readouterr().out.strip().split("\t")
    assert fields[:4] == ["0", "1", "0", "5"]
    assert float(fields[4]) == 0.2


def test_simil_command(tmp_path, capsys):
    a, b = tmp_path / "a.wav", tmp_path / "b.wav"
    x = band_limited_noise(5, n=2000)
    write_wav(x, a)
    write_wav(AudioBuffer(x.samples * 0.1, x.sample_rate_hz), b)
    assert main(["simil", "--a", str(a), "--b", str(b)]) == 0
    cos_text, db_text = capsys.readouterr().out.strip().split("\t")
    assert float(cos_text) > 0.999
    assert abs(float(db_text) + 20.0) < 0.05


def test_run_exit_codes(tmp_path):
    corpus = make_corpus(tmp_path / "corpus", count=2)
    echo = write_descriptor(tmp_path / "echo.desc", "echo", "mock")

    empty = tmp_path / "empty"
    empty.mkdir()
    cfg_empty = tmp_path / "empty.cfg"
    cfg_empty.write_text(f"corpus_dir={empty}\noutput_dir={tmp_path/'o1'}\n"
                         f"transcribers={echo}\n")
    assert main(["run", "--config", str(cfg_empty)]) == 2

    cfg_bad = tmp_path / "bad.cfg"
    cfg_bad.write_text(f"corpus_dir={corpus}\noutput_dir={tmp_path/'o2'}\n"
                       f"transcribers={echo}\noffsets=10\n")
    assert main(["run", "--config", str(cfg_bad)]) == 3

    cfg_ok = tmp_path / "ok.cfg"
    cfg_ok.write_text(f"corpus_dir={corpus}\noutput_dir={tmp_path/'o3'}\n"
                      f"transcribers={echo}\noffsets=0,-20\nseed=1\n")
    assert main(["run", "--config", str(cfg_ok), "--no-figures"]) == 0
    assert (tmp_path / "o3" / "records.csv").exists()
    assert (tmp_path / "o3" / "table1.md").exists()
    assert (tmp_path / "o3" / "table2.md").exists()


def test_run_out_flag_overrides_config(tmp_path):
    corpus = make_corpus(tmp_path / "corpus", count=1)
    echo = write_descriptor(tmp_path / "echo.desc", "echo", "mock")
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(f"corpus_dir={corpus}\noutput_dir={tmp_path/'ignored'}\n"
                   f"transcribers={echo}\noffsets=0\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "chosen"),
                 "--no-figures"]) == 0
    assert (tmp_path / "chosen" / "records.csv").exists()
    assert not (tmp_path / "ignored").exists()


def test_missing_input_reports_error(tmp_path, capsys):
    code = main(["simil", "--a", str(tmp_path / "no.wav"), "--b", str(tmp_path / "no.wav")])
    assert code == 1
    assert "error" in capsys.readouterr().err
