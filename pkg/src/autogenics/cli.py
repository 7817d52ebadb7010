"""Command-line entry points for corpus, generation, evaluation, and serving.

Exit codes are a stable contract: 0 success, 2 usage error, 3 batch paused on
quota exhaustion, 1 any other failure.
"""

from __future__ import annotations

import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click

from . import corpus as corpus_mod
from . import evaluation, quartiles, service
from .engine import AnnotatedSnippet, CommentEngine, Mode
from .gateway import (
    Gateway,
    MockProvider,
    ProviderConfig,
    QuotaExhausted,
    QuotaLedger,
    annotating_responder,
)
from .model import Language, Snippet

logger = logging.getLogger(__name__)

EXIT_QUOTA_PAUSED = 3


@click.group()
@click.option("--verbose", is_flag=True, help="Enable debug logging.")
def main(verbose: bool) -> None:
    """Inline-comment generation toolkit for Q&A code snippets."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )


@main.command()
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              required=True, help="Answer records, one JSON object per line.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False, path_type=Path),
              required=True, help="Corpus output (snippet JSONL).")
@click.option("--language", type=click.Choice(["python", "java", "auto"]), default="auto",
              show_default=True, help="Keep only snippets detected as this language.")
def ingest(in_path: Path, out_path: Path, language: str) -> None:
    """Extract eligible answer snippets into a corpus file."""
    records, skipped = corpus_mod.load_answers(in_path)
    if not records and skipped:
        raise click.ClickException(f"no usable records in {in_path} ({skipped} malformed)")
    report = corpus_mod.ingest_records(records)
    snippets = list(report.snippets)
    if language != "auto":
        wanted = Language.parse(language)
        snippets = [s for s in snippets if s.language is wanted]
    count = corpus_mod.write_corpus(snippets, out_path)
    by_language = {lang.value: sum(1 for s in snippets if s.language is lang) for lang in Language}
    click.echo(f"records: {report.total_records} (+{skipped} malformed, skipped)")
    click.echo(
        f"excluded: {report.ineligible} ineligible, {report.unknown_language} unknown "
        f"language, {report.blank_code} blank code"
    )
    click.echo(f"snippets written: {count} ({by_language})")


@main.command()
@click.option("--corpus", "corpus_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              required=True)
@click.option("--reference-bins", is_flag=True,
              help="Use the built-in reference quartile bins instead of deriving them.")
def analyze(corpus_path: Path, reference_bins: bool) -> None:
    """Print per-language quartile tables and counts for a corpus."""
    snippets = corpus_mod.read_corpus(corpus_path)
    if not snippets:
        raise click.ClickException(f"corpus {corpus_path} is empty")
    for language in Language:
        locs = [s.loc for s in snippets if s.language is language]
        if not locs:
            continue
        if reference_bins:
            table = quartiles.REFERENCE_TABLES[language]
            counts = {q: 0 for q in quartiles.Quartile}
            for loc in locs:
                counts[table.quartile_for(loc)] += 1
            table = quartiles.QuartileTable(
                language=language, bounds=table.bounds,
                counts=tuple(counts[q] for q in quartiles.Quartile),
            )
        else:
            try:
                table = quartiles.derive_boundaries(locs, language)
            except ValueError as exc:
                raise click.ClickException(f"{language.value}: {exc}") from exc
        click.echo(table.to_json())


@main.command()
@click.option("--corpus", "corpus_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              required=True)
@click.option("--per-quartile", type=click.IntRange(min=0), required=True)
@click.option("--seed", type=int, required=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False, path_type=Path), required=True)
def sample(corpus_path: Path, per_quartile: int, seed: int, out_path: Path) -> None:
    """Draw a seeded stratified sample from a corpus."""
    snippets = corpus_mod.read_corpus(corpus_path)
    try:
        chosen = quartiles.sample_stratified(snippets, per_quartile, seed)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w", encoding="utf-8") as handle:
        for snippet in chosen:
            handle.write(json.dumps(snippet.to_json_dict()) + "\n")
    click.echo(f"sampled {len(chosen)} snippets -> {out_path}")


def _read_checkpoint(path: Path) -> set[str]:
    if not path.exists():
        return set()
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
        done = data.get("done", [])
        if not isinstance(done, list):
            raise ValueError("'done' must be a list")
        return {str(s) for s in done}
    except (ValueError, OSError) as exc:
        raise click.ClickException(f"unreadable checkpoint {path}: {exc}") from exc


def _write_checkpoint(path: Path, done: set[str]) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps({"done": sorted(done)}) + "\n", encoding="utf-8")
    os.replace(tmp, path)


def _mock_engines(
    daily_quota: int, quota_file: Path | None
) -> dict[Language, CommentEngine]:
    """One mock engine per language (comment marker differs), one shared budget."""
    ledger = QuotaLedger(daily_quota, quota_file)
    engines: dict[Language, CommentEngine] = {}
    for language, marker in ((Language.PYTHON, "#"), (Language.JAVA, "//")):
        config = ProviderConfig(provider="mock", daily_quota=daily_quota, quota_path=quota_file)
        provider = MockProvider(responder=annotating_responder(marker))
        engines[language] = CommentEngine(Gateway(config, provider=provider, ledger=ledger))
    return engines


def _remote_engines(
    endpoint: str, model: str, daily_quota: int, quota_file: Path | None
) -> dict[Language, CommentEngine]:
    config = ProviderConfig(
        provider="remote", endpoint=endpoint, model_name=model,
        daily_quota=daily_quota, quota_path=quota_file,
    )
    engine = CommentEngine(Gateway(config))
    return {language: engine for language in Language}


@main.command()
@click.option("--corpus", "corpus_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              required=True)
@click.option("--mode", type=click.Choice(["plain", "context"]), default="plain", show_default=True)
@click.option("--questions", "questions_path",
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Answer records supplying question text (required for context mode).")
@click.option("--out", "out_path", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.option("--provider", type=click.Choice(["mock", "remote"]), default="mock", show_default=True)
@click.option("--endpoint", help="Remote provider URL (remote only).")
@click.option("--model", default="gemini-1.5-flash", show_default=True)
@click.option("--daily-quota", type=click.IntRange(min=1), default=50, show_default=True)
@click.option("--quota-file", type=click.Path(dir_okay=False, path_type=Path),
              help="Persist daily quota usage here.")
@click.option("--resume", is_flag=True, help="Skip snippets recorded in the checkpoint.")
@click.option("--jobs", type=click.IntRange(min=1), default=1, show_default=True)
def generate(
    corpus_path: Path,
    mode: str,
    questions_path: Path | None,
    out_path: Path,
    provider: str,
    endpoint: str | None,
    model: str,
    daily_quota: int,
    quota_file: Path | None,
    resume: bool,
    jobs: int,
) -> None:
    """Generate annotated snippets for a corpus; resumable on quota pauses."""
    engine_mode = Mode.PLAIN if mode == "plain" else Mode.CONTEXT_AWARE
    if engine_mode is Mode.CONTEXT_AWARE and questions_path is None:
        raise click.UsageError("--mode context requires --questions")
    if provider == "remote" and not endpoint:
        raise click.UsageError("--provider remote requires --endpoint")

    snippets = corpus_mod.read_corpus(corpus_path)
    questions: dict[str, str] = {}
    if questions_path is not None:
        records, _ = corpus_mod.load_answers(questions_path)
        for record in records:
            questions.setdefault(record.question_id, corpus_mod.question_text(record))
    if engine_mode is Mode.CONTEXT_AWARE:
        missing = sorted({s.question_id for s in snippets} - set(questions))
        if missing:
            raise click.ClickException(
                f"--questions lacks question text for: {', '.join(missing)}"
            )

    if provider == "mock":
        engines = _mock_engines(daily_quota, quota_file)
    else:
        engines = _remote_engines(endpoint or "", model, daily_quota, quota_file)

    checkpoint_path = Path(str(out_path) + ".checkpoint.json")
    done: set[str] = set()
    if resume:
        done = _read_checkpoint(checkpoint_path)
    else:
        if checkpoint_path.exists():
            checkpoint_path.unlink()
        if out_path.exists():
            out_path.unlink()
    todo = [s for s in snippets if s.snippet_id not in done]

    def run_one(snippet: Snippet) -> AnnotatedSnippet:
        return engines[snippet.language].generate(
            snippet,
            question=questions.get(snippet.question_id),
            mode=engine_mode,
        )

    out_path.parent.mkdir(parents=True, exist_ok=True)
    paused = False
    processed = 0
    with out_path.open("a", encoding="utf-8") as handle:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [(s, pool.submit(run_one, s)) for s in todo]
            for snippet, future in futures:
                try:
                    annotated = future.result()
                except QuotaExhausted:
                    paused = True
                    for _, pending in futures:
                        pending.cancel()
                    break
                handle.write(json.dumps(annotated.to_json_dict()) + "\n")
                handle.flush()
                done.add(snippet.snippet_id)
                _write_checkpoint(checkpoint_path, done)
                processed += 1

    click.echo(f"annotated {processed} snippet(s); {len(done)}/{len(snippets)} complete")
    if paused:
        click.echo("daily quota exhausted; re-run with --resume to continue", err=True)
        sys.exit(EXIT_QUOTA_PAUSED)


@main.group(name="eval")
def eval_group() -> None:
    """Rating aggregation and inter-rater agreement."""


@eval_group.command()
@click.option("--ratings", "ratings_path",
              type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--corpus", "corpus_path",
              type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False, path_type=Path),
              help="Also write the aggregate as CSV.")
def aggregate(ratings_path: Path, corpus_path: Path, out_path: Path | None) -> None:
    """Mean/median per language, quartile, and metric."""
    try:
        records = evaluation.load_ratings_csv(ratings_path)
        snippets = corpus_mod.read_corpus(corpus_path)
        rows = evaluation.aggregate(records, snippets)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(evaluation.format_table(rows))
    if out_path is not None:
        evaluation.write_aggregate_csv(rows, out_path)
        click.echo(f"wrote {out_path}")


@eval_group.command()
@click.option("--ratings-a", "path_a",
              type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--ratings-b", "path_b",
              type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
def kappa(path_a: Path, path_b: Path) -> None:
    """Cohen's kappa between two raters' files, joined on (snippet, metric)."""
    try:
        records_a = evaluation.load_ratings_csv(path_a)
        records_b = evaluation.load_ratings_csv(path_b)
        by_key_a = {(r.snippet_id, r.metric): r.score for r in records_a}
        by_key_b = {(r.snippet_id, r.metric): r.score for r in records_b}
        if set(by_key_a) != set(by_key_b):
            only_a = len(set(by_key_a) - set(by_key_b))
            only_b = len(set(by_key_b) - set(by_key_a))
            raise ValueError(
                f"rating keys differ between files ({only_a} only in A, {only_b} only in B)"
            )
        keys = sorted(by_key_a)
        value = evaluation.cohen_kappa(
            [by_key_a[k] for k in keys], [by_key_b[k] for k in keys]
        )
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"kappa: {value:.4f} over {len(keys)} paired ratings")


@main.command()
@click.option("--config", "config_path",
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="JSON config; defaults serve the mock provider on 127.0.0.1:8178.")
def serve(config_path: Path | None) -> None:
    """Run the local HTTP backend for the browser extension."""
    try:
        config = service.load_config(config_path) if config_path else service.ServiceConfig()
    except (ValueError, OSError, TypeError) as exc:
        raise click.ClickException(f"bad config: {exc}") from exc
    click.echo(f"serving on http://{config.host}:{config.port} (provider: {config.provider.provider})")
    service.run(config)


if __name__ == "__main__":
    main()
