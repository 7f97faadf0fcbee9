"""Command-line entry points.

Subcommands: attack (single file or batch), analyze (FFT/mel/MFCC exports
with figures), wer, simil, run (full experiment), serve (annotation service).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import dsp
from .annotation import AnnotationStore
from .attack import AttackKind, AttackSpec, generate_attack
from .audio_io import read_wav, write_wav
from .errors import ConfigInvalidError, EmptyCorpusError, GarbleError
from .harness import emit_report, load_config, run_experiment
from .metrics import cosine_similarity, db_relative, normalize_text, wer
from .server import make_server
from .transcribers import load_reference

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_EMPTY_CORPUS = 2
EXIT_CONFIG_INVALID = 3


def _parse_offsets(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _cmd_attack(args) -> int:
    kind = AttackKind(args.kind)
    if args.in_dir:
        out_dir = Path(args.out_dir)
        offsets = _parse_offsets(args.gains)
        wavs = sorted(Path(args.in_dir).glob("*.wav"))
        if not wavs:
            print(f"no wav files in {args.in_dir}", file=sys.stderr)
            return EXIT_EMPTY_CORPUS
        for wav_path in wavs:
            clean = read_wav(wav_path)
            for p in offsets:
                spec = AttackSpec(kind, p, overlay_path=Path(args.overlay) if args.overlay else None)
                target = out_dir / f"x+d{p:g}" / wav_path.name
                target.parent.mkdir(parents=True, exist_ok=True)
                write_wav(generate_attack(clean, spec), target)
        print(f"wrote {len(wavs) * len(offsets)} attacked files under {out_dir}")
        return EXIT_OK

    clean = read_wav(args.input)
    spec = AttackSpec(kind, args.gain_db,
                      overlay_path=Path(args.overlay) if args.overlay else None)
    write_wav(generate_attack(clean, spec), args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_analyze(args) -> int:
    from . import figures

    buf = read_wav(args.input)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.input).stem
    wanted = {name for name, flag in
              (("fft", args.fft), ("melspec", args.melspec), ("mfcc", args.mfcc)) if flag}
    if not wanted:
        wanted = {"fft", "melspec", "mfcc"}

    if "fft" in wanted:
        n = dsp._next_power_of_two(len(buf.samples))
        padded = np.zeros(n)
        padded[: len(buf.samples)] = buf.samples
        spectrum = dsp.fft(padded, sample_rate_hz=buf.sample_rate_hz)
        half = n // 2 + 1
        rows = np.column_stack([
            np.arange(half) * spectrum.bin_hz,
            spectrum.bins[:half].real,
            spectrum.bins[:half].imag,
            np.abs(spectrum.bins[:half]),
        ])
        np.savetxt(out_dir / f"{stem}_fft.csv", rows, fmt="%.10g", delimiter=",",
                   header="freq_hz,re,im,magnitude", comments="")
        figures.render_fft_overlay([(stem, buf)], out_dir / f"{stem}_fft.png")
    if "melspec" in wanted:
        spec = dsp.mel_spectrogram(buf)
        dsp.export_matrix(spec, out_dir / f"{stem}_melspec")
        figures.render_spectrogram(spec, out_dir / f"{stem}_melspec.png", title=stem)
    if "mfcc" in wanted:
        frames = dsp.mfcc(buf)
        matrix = np.stack([f.coeffs for f in frames])
        dsp.write_matrix(matrix, out_dir / f"{stem}_mfcc")
    print(f"analysis written under {out_dir}")
    return EXIT_OK


def _cmd_wer(args) -> int:
    ref = load_reference(args.ref)
    hyp = normalize_text(Path(args.hyp).read_text(encoding="utf-8"))
    breakdown = wer(ref, hyp)
    print("\t".join([
        str(breakdown.substitutions), str(breakdown.deletions),
        str(breakdown.insertions), str(breakdown.ref_len), f"{breakdown.wer:.6f}",
    ]))
    return EXIT_OK


def _cmd_simil(args) -> int:
    a = read_wav(args.a)
    b = read_wav(args.b)
    print(f"{cosine_similarity(a, b):.6f}\t{db_relative(b, a):.4f}")
    return EXIT_OK


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.out:
        cfg.output_dir = Path(args.out)
    if args.include_delta_rows:
        cfg.include_delta_rows = True
    report = run_experiment(cfg)
    emit_report(report, cfg.output_dir, figures=not args.no_figures)
    cells = len(report.aggregates)
    print(f"{len(report.records)} records, {len(report.errors)} errors, "
          f"{cells} table cells -> {cfg.output_dir}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    store = AnnotationStore(args.conditions_dir, args.records, seed=args.seed)
    server = make_server(store, port=args.port, ui_dir=args.ui_dir)
    host, port = server.server_address[:2]
    print(f"annotation service on http://{host}:{port}/ "
          f"({len(store.conditions())} conditions)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="garble",
                                     description="speech obfuscation workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("attack", help="render obfuscated audio")
    p.add_argument("--in", dest="input", help="input wav (single-file mode)")
    p.add_argument("--out", help="output wav (single-file mode)")
    p.add_argument("--in-dir", help="input directory (batch mode)")
    p.add_argument("--out-dir", help="output directory (batch mode)")
    p.add_argument("--kind", default="reverse-overlay",
                   choices=[k.value for k in AttackKind])
    p.add_argument("--gain-db", type=float, default=0.0)
    p.add_argument("--gains", default="0,-5,-10,-15,-20",
                   help="comma list of dB offsets (batch mode)")
    p.add_argument("--overlay", help="perturbation wav (precomputed kind)")
    p.set_defaults(func=_cmd_attack)

    p = sub.add_parser("analyze", help="export FFT / mel spectrogram / MFCC")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--fft", action="store_true")
    p.add_argument("--melspec", action="store_true")
    p.add_argument("--mfcc", action="store_true")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("wer", help="word error rate between two transcript files")
    p.add_argument("--ref", required=True)
    p.add_argument("--hyp", required=True)
    p.set_defaults(func=_cmd_wer)

    p = sub.add_parser("simil", help="cosine similarity and relative dB of two wavs")
    p.add_argument("--a", required=True, help="reference wav")
    p.add_argument("--b", required=True, help="comparison wav")
    p.set_defaults(func=_cmd_simil)

    p = sub.add_parser("run", help="run the full experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="override output_dir from the config")
    p.add_argument("--include-delta-rows", action="store_true",
                   help="also transcribe the bare perturbation signals")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("serve", help="start the annotation service")
    p.add_argument("--conditions-dir", required=True)
    p.add_argument("--records", required=True)
    p.add_argument("--port", type=int, default=8321)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ui-dir", help="built frontend bundle to serve at /")
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EmptyCorpusError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY_CORPUS
    except ConfigInvalidError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_INVALID
    except (GarbleError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
