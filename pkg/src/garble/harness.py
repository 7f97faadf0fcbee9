"""Experiment orchestration: corpus x conditions x transcribers -> report.

For every corpus file each attack condition is rendered to disk, every
transcriber runs on every rendered file, and word error rates against the
reference plus cosine similarities against the clean audio are aggregated
into the emitted reports (records.csv, table1.md, table2.md).
"""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .attack import AttackKind, AttackSpec, apply_gain_db, generate_attack, reverse
from .audio_io import AudioBuffer, read_wav, write_wav
from .errors import ConfigInvalidError, EmptyCorpusError, GarbleError
from .metrics import (
    Provenance,
    Transcript,
    WerBreakdown,
    cosine_similarity,
    mean_std,
    normalize_text,
    wer,
)
from .transcribers import TranscriberDescriptor, load_reference, parse_descriptor, transcribe

log = logging.getLogger(__name__)

DEFAULT_OFFSETS = (0.0, -5.0, -10.0, -15.0, -20.0)
HUMAN_COLUMN = "Humans"
CLEAN_LABEL = "x"
CW_LABEL = "x+CW"


def _format_offset(p: float) -> str:
    return f"{p:g}"


@dataclass
class ExperimentConfig:
    corpus_dir: Path
    output_dir: Path
    transcriber_descriptors: list[Path] = field(default_factory=list)
    attack_offsets_db: tuple[float, ...] = DEFAULT_OFFSETS
    include_clean: bool = True
    include_delta_rows: bool = False
    precomputed_overlays_dir: Path | None = None
    human_records: Path | None = None
    seed: int = 0
    workers: int = 1

    def validate(self) -> None:
        if not Path(self.corpus_dir).is_dir():
            raise ConfigInvalidError(f"corpus_dir {self.corpus_dir} is not a directory")
        for p in self.attack_offsets_db:
            if not (-60.0 <= p <= 0.0):
                raise ConfigInvalidError(f"attack offset {p} outside [-60, 0]")
        if self.workers < 1:
            raise ConfigInvalidError(f"workers must be >= 1, got {self.workers}")
        if not self.transcriber_descriptors and self.human_records is None:
            raise ConfigInvalidError("need at least one transcriber or a human records file")
        if self.precomputed_overlays_dir is not None and not Path(self.precomputed_overlays_dir).is_dir():
            raise ConfigInvalidError(
                f"overlays_dir {self.precomputed_overlays_dir} is not a directory"
            )
        if self.human_records is not None and not Path(self.human_records).is_file():
            raise ConfigInvalidError(f"human_records {self.human_records} is not a file")


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _parse_bool(value: str, key: str) -> bool:
    lowered = value.lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise ConfigInvalidError(f"{key}: expected a boolean, got {value!r}")


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse a flat key=value experiment config file."""
    path = Path(path)
    fields: dict[str, str] = {}
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigInvalidError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigInvalidError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        fields[key.strip()] = value.strip()

    def path_or_none(key: str) -> Path | None:
        return Path(fields[key]) if fields.get(key) else None

    if "corpus_dir" not in fields or "output_dir" not in fields:
        raise ConfigInvalidError(f"{path}: corpus_dir and output_dir are required")
    try:
        offsets = tuple(
            float(tok) for tok in fields.get("offsets", "0,-5,-10,-15,-20").split(",") if tok.strip()
        )
        seed = int(fields.get("seed", "0"))
        workers = int(fields.get("workers", "1"))
    except ValueError as exc:
        raise ConfigInvalidError(f"{path}: {exc}") from exc

    descriptors = [Path(tok.strip()) for tok in fields.get("transcribers", "").split(",") if tok.strip()]
    return ExperimentConfig(
        corpus_dir=Path(fields["corpus_dir"]),
        output_dir=Path(fields["output_dir"]),
        transcriber_descriptors=descriptors,
        attack_offsets_db=offsets,
        include_clean=_parse_bool(fields.get("include_clean", "true"), "include_clean"),
        include_delta_rows=_parse_bool(fields.get("include_delta_rows", "false"), "include_delta_rows"),
        precomputed_overlays_dir=path_or_none("overlays_dir"),
        human_records=path_or_none("human_records"),
        seed=seed,
        workers=workers,
    )


@dataclass(frozen=True)
class WerRecord:
    audio_id: str
    condition: str
    transcriber: str
    breakdown: WerBreakdown


@dataclass(frozen=True)
class ErrorRecord:
    audio_id: str
    condition: str
    transcriber: str
    message: str


@dataclass
class ExperimentReport:
    records: list[WerRecord]
    errors: list[ErrorRecord]
    aggregates: dict[tuple[str, str], tuple[float, float, int]]
    similarity: dict[str, tuple[float, float]]
    condition_order: list[str]
    transcriber_order: list[str]
    corpus_size: int


def scan_corpus(corpus_dir: str | Path) -> list[tuple[Path, Path]]:
    """Match X.wav with X.txt by stem (case-sensitive), sorted by stem.

    Unpaired files are logged as warnings; no pairs at all raises
    EmptyCorpusError.
    """
    corpus_dir = Path(corpus_dir)
    wavs = {p.stem: p for p in corpus_dir.glob("*.wav")}
    txts = {p.stem: p for p in corpus_dir.glob("*.txt")}
    for stem in sorted(set(wavs) - set(txts)):
        log.warning("corpus: %s.wav has no %s.txt reference", stem, stem)
    for stem in sorted(set(txts) - set(wavs)):
        log.warning("corpus: %s.txt has no %s.wav audio", stem, stem)
    pairs = [(wavs[stem], txts[stem]) for stem in sorted(set(wavs) & set(txts))]
    if not pairs:
        raise EmptyCorpusError(f"no (wav, txt) pairs found in {corpus_dir}")
    return pairs


def _plan_conditions(cfg: ExperimentConfig) -> list[str]:
    labels: list[str] = []
    if cfg.include_clean:
        labels.append(CLEAN_LABEL)
    if cfg.include_delta_rows:
        labels.extend(f"d{_format_offset(p)}" for p in cfg.attack_offsets_db)
    labels.extend(f"x+d{_format_offset(p)}" for p in cfg.attack_offsets_db)
    if cfg.precomputed_overlays_dir is not None:
        labels.append(CW_LABEL)
    return labels


def _render_condition(label: str, clean: AudioBuffer, cfg: ExperimentConfig) -> AudioBuffer:
    if label == CLEAN_LABEL:
        return clean
    if label == CW_LABEL:
        overlay_path = Path(cfg.precomputed_overlays_dir) / f"{clean.source_id}.wav"
        if not overlay_path.is_file():
            raise GarbleError(f"no precomputed overlay for {clean.source_id}")
        spec = AttackSpec(AttackKind.PRECOMPUTED_OVERLAY, 0.0, overlay_path=overlay_path)
        return generate_attack(clean, spec)
    if label.startswith("x+d"):
        return generate_attack(clean, AttackSpec(AttackKind.REVERSE_OVERLAY, float(label[3:])))
    # bare perturbation row
    return apply_gain_db(reverse(clean), float(label[1:]))


def _parse_human_records(path: Path) -> list[tuple[str, str, str, str]]:
    """Rows of (annotator_id, audio_id, condition, raw_text) from an export file."""
    from .annotation import unescape_text

    rows = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) < 4:
            raise ConfigInvalidError(f"{path}:{lineno}: expected >=4 tab-separated fields")
        annotator, audio_id, condition, text = parts[0], parts[1], parts[2], parts[3]
        rows.append((annotator, audio_id, condition, unescape_text(text)))
    return rows


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Execute the full grid and aggregate WER and similarity statistics.

    Per-file transcriber failures become error entries, excluded from the
    aggregates but counted; they never suppress other cells.
    """
    cfg.validate()
    pairs = scan_corpus(cfg.corpus_dir)
    try:
        descriptors = [parse_descriptor(p) for p in cfg.transcriber_descriptors]
    except (GarbleError, OSError, ValueError) as exc:
        raise ConfigInvalidError(f"bad transcriber descriptor: {exc}") from exc
    names = [d.name for d in descriptors]
    if len(set(names)) != len(names):
        raise ConfigInvalidError(f"transcriber names must be unique, got {names}")

    references: dict[str, Transcript] = {}
    fixtures: dict[str, str] = {}
    cleans: dict[str, AudioBuffer] = {}
    for wav_path, txt_path in pairs:
        try:
            ref = load_reference(txt_path)
            clean = read_wav(wav_path)
        except (GarbleError, OSError) as exc:
            log.warning("corpus: skipping %s: %s", wav_path.stem, exc)
            continue
        references[wav_path.stem] = ref
        fixtures[wav_path.stem] = " ".join(ref.words)
        cleans[wav_path.stem] = clean
    if not cleans:
        raise EmptyCorpusError(f"no usable (wav, txt) pairs in {cfg.corpus_dir}")

    conditions = _plan_conditions(cfg)
    conditions_dir = Path(cfg.output_dir) / "conditions"
    errors: list[ErrorRecord] = []
    similarity_values: dict[str, list[float]] = {c: [] for c in conditions if c != CLEAN_LABEL}
    rendered: list[tuple[str, str, Path]] = []  # (audio_id, condition, wav path)

    for stem in sorted(cleans):
        clean = cleans[stem]
        for label in conditions:
            try:
                buf = _render_condition(label, clean, cfg)
            except GarbleError as exc:
                errors.append(ErrorRecord(stem, label, "", f"generation: {exc}"))
                continue
            out_path = conditions_dir / label / f"{stem}.wav"
            out_path.parent.mkdir(parents=True, exist_ok=True)
            write_wav(buf, out_path)
            if label != CLEAN_LABEL:
                similarity_values[label].append(cosine_similarity(clean, buf))
            rendered.append((stem, label, out_path))

    def run_one(task: tuple[str, str, Path, TranscriberDescriptor]):
        stem, label, wav_path, desc = task
        try:
            raw = transcribe(desc, wav_path, fixtures=fixtures, seed=cfg.seed)
            hyp = normalize_text(raw, Provenance.MACHINE, audio_id=stem)
            return WerRecord(stem, label, desc.name, wer(references[stem], hyp))
        except GarbleError as exc:
            return ErrorRecord(stem, label, desc.name, str(exc))

    tasks = [(stem, label, path, desc) for (stem, label, path) in rendered for desc in descriptors]
    records: list[WerRecord] = []
    if tasks:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            for outcome in pool.map(run_one, tasks):
                if isinstance(outcome, WerRecord):
                    records.append(outcome)
                else:
                    errors.append(outcome)

    transcriber_order = list(names)
    if cfg.human_records is not None:
        human_rows = _parse_human_records(Path(cfg.human_records))
        for annotator, audio_id, condition, text in human_rows:
            if audio_id not in references:
                errors.append(ErrorRecord(audio_id, condition, HUMAN_COLUMN,
                                          f"no reference for annotation by {annotator}"))
                continue
            hyp = normalize_text(text, Provenance.HUMAN, audio_id=audio_id)
            records.append(WerRecord(audio_id, condition, HUMAN_COLUMN,
                                     wer(references[audio_id], hyp)))
            if condition not in conditions:
                conditions.append(condition)
        if HUMAN_COLUMN not in transcriber_order:
            transcriber_order.append(HUMAN_COLUMN)

    cond_index = {c: i for i, c in enumerate(conditions)}
    trans_index = {t: i for i, t in enumerate(transcriber_order)}
    records.sort(key=lambda r: (cond_index.get(r.condition, len(conditions)),
                                trans_index.get(r.transcriber, len(trans_index)),
                                r.audio_id))
    errors.sort(key=lambda e: (cond_index.get(e.condition, len(conditions)),
                               e.transcriber, e.audio_id))

    aggregates: dict[tuple[str, str], tuple[float, float, int]] = {}
    by_cell: dict[tuple[str, str], list[float]] = {}
    for rec in records:
        by_cell.setdefault((rec.condition, rec.transcriber), []).append(rec.breakdown.wer)
    for cell, values in by_cell.items():
        mean, std = mean_std(values)
        aggregates[cell] = (mean, std, len(values))

    similarity = {
        label: mean_std(values)
        for label, values in similarity_values.items()
        if values
    }
    return ExperimentReport(
        records=records,
        errors=errors,
        aggregates=aggregates,
        similarity=similarity,
        condition_order=conditions,
        transcriber_order=transcriber_order,
        corpus_size=len(pairs),
    )


def _cell_text(rep: ExperimentReport, condition: str, transcriber: str,
               failure_counts: dict[tuple[str, str], int], notes: list[str]) -> str:
    agg = rep.aggregates.get((condition, transcriber))
    failed = failure_counts.get((condition, transcriber), 0)
    if agg is None:
        if failed:
            notes.append(f"{transcriber} on {condition}: {failed} failed")
            return "—[^fail]"
        return "—"
    mean, std, _count = agg
    if failed:
        notes.append(f"{transcriber} on {condition}: {failed} failed")
    return f"{mean:.2f} ({std:.2f})"


def emit_report(rep: ExperimentReport, out_dir: str | Path, figures: bool = True) -> None:
    """Write records.csv, table1.md, table2.md (and report figures) under out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    with open(out_dir / "records.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["audio_id", "condition", "transcriber", "S", "D", "I", "N", "wer"])
        for rec in rep.records:
            b = rec.breakdown
            writer.writerow([rec.audio_id, rec.condition, rec.transcriber,
                             b.substitutions, b.deletions, b.insertions, b.ref_len,
                             str(b.wer)])

    if rep.errors:
        with open(out_dir / "errors.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["audio_id", "condition", "transcriber", "error"])
            for err in rep.errors:
                writer.writerow([err.audio_id, err.condition, err.transcriber, err.message])

    failure_counts: dict[tuple[str, str], int] = {}
    for err in rep.errors:
        if err.transcriber:
            key = (err.condition, err.transcriber)
            failure_counts[key] = failure_counts.get(key, 0) + 1

    notes: list[str] = []
    lines = ["| Audio Files | " + " | ".join(rep.transcriber_order) + " |",
             "|---" * (len(rep.transcriber_order) + 1) + "|"]
    for condition in rep.condition_order:
        cells = [_cell_text(rep, condition, t, failure_counts, notes)
                 for t in rep.transcriber_order]
        lines.append(f"| {condition} | " + " | ".join(cells) + " |")
    lines.append("")
    if notes:
        lines.append("[^fail]: excluded failures — " + "; ".join(dict.fromkeys(notes)))
        lines.append("")
    (out_dir / "table1.md").write_text("\n".join(lines), encoding="utf-8")

    lines = ["| Audio File | Mean | Standard Deviation |", "|---|---|---|"]
    for condition in rep.condition_order:
        if condition in rep.similarity:
            mean, std = rep.similarity[condition]
            lines.append(f"| {condition} | {mean:.6f} | {std:.6f} |")
    lines.append("")
    (out_dir / "table2.md").write_text("\n".join(lines), encoding="utf-8")

    if figures:
        from . import figures as fig
        fig.render_wer_summary(rep, out_dir / "wer_summary.png")
        if rep.similarity:
            fig.render_similarity_trend(rep, out_dir / "similarity_trend.png")
