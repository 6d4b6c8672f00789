"""``kusuri`` command-line tools.

Exit status: 0 on success, 2 for a bad config or a missing input path
(checked before any work starts), 1 for any failure during the run.
"""

from __future__ import annotations

import contextlib
import functools
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import click

from ._io import atomic_directory, atomic_write, write_json
from .config import ConfigError, RunConfig, load_run_config
from .ensemble import load_ensemble, save_ensemble, train_ensemble
from .evaluation import confusion, error_report, mcnemar, metrics_report
from .models.checks import model_gradient_check
from .models.embeddings import EmbeddingTable, load_embeddings
from .models.networks import ARCHITECTURES, KUSURI, WEAK, Predictor
from .models.training import build_weak_training_set, load_model, save_model, train
from .pipeline import ClassificationRecord, build_gold_candidates, classify_tweets
from .prefilter.lexicon import Lexicon, load_lexicon, read_phrase_lines, write_lexicon
from .prefilter.mining import mine_context_ngrams
from .prefilter.patterns import PatternSet, compile_patterns
from .prefilter.verdict import FilterVerdict, run_filters_batch
from .textcore import Corpus, iter_records, load_corpus, record_of, tweet_of, write_corpus
from .variantgen import VariantConfig, build_variant_lexicon

GRADCHECK_TOLERANCE = 1e-4
CHUNK = 4096

log = logging.getLogger("kusuri")


@dataclass
class Run:
    config: RunConfig
    out: Path
    threads: int
    seed: int | None

    @property
    def digest(self) -> str:
        return self.config.digest()

    def require(self, *keys: str) -> None:
        try:
            self.config.require(*keys)
        except ConfigError as exc:
            _exit(2, str(exc))

    def optional(self, key: str) -> Path | None:
        try:
            return self.config.path(key, required=False)
        except ConfigError as exc:
            _exit(2, str(exc))


def _exit(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    click.get_current_context().exit(code)


@contextlib.contextmanager
def _work():
    try:
        yield
    except click.exceptions.Exit:
        raise
    except Exception as exc:  # every module error becomes exit status 1
        _exit(1, f"{type(exc).__name__}: {exc}")


def _common():
    """Attach --config/--seed/--out/--threads and build a :class:`Run`."""
    def decorate(fn):
        @click.option("--config", "config_path", type=click.Path(dir_okay=False),
                      help="JSON run configuration")
        @click.option("--seed", type=int, default=None, help="overrides the training seeds")
        @click.option("--out", "out_dir", type=click.Path(file_okay=False), default=".",
                      show_default=True, help="output directory")
        @click.option("--threads", type=click.IntRange(min=1), default=1, show_default=True)
        @functools.wraps(fn)
        def wrapper(config_path, seed, out_dir, threads, **kwargs):
            try:
                cfg = load_run_config(config_path).with_seed(seed)
            except ConfigError as exc:
                _exit(2, str(exc))
            return fn(Run(cfg, Path(out_dir), threads, seed), **kwargs)
        return wrapper
    return decorate


_input = click.Path(exists=True, dir_okay=False)


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="log progress to stderr")
def main(verbose: bool):
    """Two-stage drug-mention detection for tweets."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


# -- loaders --------------------------------------------------------------

def _read_corpus(path) -> Corpus:
    with open(path, encoding="utf-8") as fh:
        return load_corpus(fh, str(path))


def _read_lexicon(path) -> Lexicon:
    with open(path, encoding="utf-8") as fh:
        return load_lexicon(fh, str(path))


def _read_phrases(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return read_phrase_lines(fh)


def _read_embeddings(path) -> EmbeddingTable:
    with open(path, encoding="utf-8") as fh:
        return load_embeddings(fh)


def _read_patterns(path) -> PatternSet:
    with open(path, encoding="utf-8") as fh:
        return compile_patterns(fh)


def _variant_config(run: Run) -> VariantConfig:
    common = run.optional("common_words")
    words = frozenset(w for line in _read_phrases(common) for w in line.split()) if common else frozenset()
    return VariantConfig(common_words=words, **run.config.variants)


def _variants(run: Run, lexicon: Lexicon) -> Lexicon:
    path = run.optional("variants")
    if path is not None:
        return _read_lexicon(path)
    return build_variant_lexicon(lexicon, _variant_config(run))


def _weak_model(run: Run, emb: EmbeddingTable):
    path = run.optional("weak_model")
    if path is None:
        log.warning("no weak_model configured; the weak filter never fires")
        return None
    with open(path, encoding="utf-8") as fh:
        params = load_model(fh)
    if params.architecture != WEAK:
        raise ValueError(f"{path} holds a {params.architecture} model, expected {WEAK}")
    return Predictor(params, emb)


def _meta(path: Path, run: Run, command: str, **extra) -> None:
    write_json(path.with_name(path.name + ".meta.json"),
               {"command": command, "config_hash": run.digest, **extra})


def _header(run: Run, **fields) -> str:
    lines = [f"config-hash: {run.digest}"] + [f"{k}: {v}" for k, v in fields.items()]
    return "\n".join(lines)


# -- commands -------------------------------------------------------------

@main.command("variants-generate")
@click.argument("lexicon", type=_input)
@_common()
def variants_generate(run: Run, lexicon):
    """Write the misspelling variants of LEXICON in lexicon file format."""
    run.optional("common_words")
    with _work():
        lex = _read_lexicon(lexicon)
        variants = build_variant_lexicon(lex, _variant_config(run))
        target = run.out / "variants.txt"
        with atomic_write(target) as fh:
            write_lexicon(variants, fh, header=_header(run, source=lexicon))
        click.echo(f"{len(variants)} variants -> {target}")


@main.command("patterns-mine")
@click.argument("corpus", type=_input)
@click.argument("seeds", type=_input)
@click.option("--n", "n", type=click.IntRange(1, 3), default=2, show_default=True)
@click.option("--top-k", type=click.IntRange(min=1), default=50, show_default=True)
@_common()
def patterns_mine(run: Run, corpus, seeds, n, top_k):
    """Rank the n-grams around seed-name mentions as material for patterns."""
    with _work():
        ranked = mine_context_ngrams(_read_corpus(corpus), _read_phrases(seeds), n, top_k)
        target = run.out / "mined_ngrams.tsv"
        with atomic_write(target) as fh:
            for line in _header(run, n=n, top_k=top_k).splitlines():
                fh.write(f"# {line}\n")
            fh.write("ngram\tside\tcount\n")
            for ngram, side, count in ranked:
                fh.write(f"{ngram}\t{side}\t{count}\n")
        click.echo(f"{len(ranked)} n-grams -> {target}")


@main.command("weak-build")
@click.argument("corpus", type=_input)
@click.argument("seeds", type=_input)
@_common()
def weak_build(run: Run, corpus, seeds):
    """Weakly label CORPUS: seed-name tweets positive, a same-size sample negative."""
    with _work():
        labeled = build_weak_training_set(_read_corpus(corpus), _read_phrases(seeds),
                                          run.config.weak_train.rng_seed)
        target = run.out / "weak_train.jsonl"
        with atomic_write(target) as fh:
            write_corpus(labeled, fh)
        _meta(target, run, "weak-build", n=len(labeled))
        click.echo(f"{len(labeled)} weakly labeled tweets -> {target}")


def _labeled(path) -> Corpus:
    corpus = _read_corpus(path)
    missing = [t.id for t, y in zip(corpus.tweets, corpus.labels) if y is None]
    if missing:
        raise ValueError(f"{len(missing)} unlabeled records in {path}, e.g. {missing[0]!r}")
    return corpus


@main.command("weak-train")
@click.argument("labeled", type=_input)
@click.argument("embeddings", type=_input)
@_common()
def weak_train(run: Run, labeled, embeddings):
    """Train the weak LSTM filter on a labeled corpus."""
    with _work():
        emb = _read_embeddings(embeddings)
        result = train(WEAK, _labeled(labeled), emb, run.config.weak_train)
        target = run.out / "weak_model.json"
        with atomic_write(target) as fh:
            save_model(result.params, fh, {"config_hash": run.digest,
                                           "best_epoch": result.best_epoch})
        click.echo(f"weak model (best epoch {result.best_epoch}) -> {target}")


@main.command("gold-build")
@click.argument("corpus", type=_input)
@_common()
def gold_build(run: Run, corpus):
    """Run the four filters and propose a candidate label for every tweet."""
    run.require("lexicon", "patterns")
    run.optional("variants")
    if run.optional("weak_model") is not None:
        run.require("embeddings")
    with _work():
        data = _read_corpus(corpus)
        lex = _read_lexicon(run.config.path("lexicon"))
        weak = None
        if run.config.paths.get("weak_model") is not None:
            weak = _weak_model(run, _read_embeddings(run.config.path("embeddings")))
        verdicts = run_filters_batch(data.tweets, lex, _variants(run, lex),
                                     _read_patterns(run.config.path("patterns")),
                                     weak, run.config.weak_threshold)
        target = run.out / "gold_candidates.jsonl"
        counts: dict[str, int] = {}
        with atomic_write(target) as fh:
            for item, cand, v in zip(data.items, build_gold_candidates(data, verdicts), verdicts):
                rec = {**record_of(item), "candidate": cand.proposed_label,
                       "fired_count": cand.fired_count, **v.as_dict()}
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
                counts[cand.proposed_label] = counts.get(cand.proposed_label, 0) + 1
        _meta(target, run, "gold-build", counts=dict(sorted(counts.items())))
        click.echo(" ".join(f"{k}={v}" for k, v in sorted(counts.items())) + f" -> {target}")


@main.command("train-ensemble")
@click.argument("labeled", type=_input)
@click.argument("embeddings", type=_input)
@_common()
def train_ensemble_cmd(run: Run, labeled, embeddings):
    """Train K independently seeded Kusuri DNNs and write an ensemble manifest."""
    with _work():
        emb = _read_embeddings(embeddings)
        settings = run.config.ensemble
        seeds = settings.member_seeds(run.config.train.rng_seed)
        ensemble = train_ensemble(_labeled(labeled), emb, run.config.train, seeds,
                                  settings.threshold, run.threads)
        with atomic_directory(run.out / "ensemble") as tmp:
            save_ensemble(ensemble, tmp, embeddings_ref=str(embeddings), config_hash=run.digest)
        click.echo(f"{ensemble.k} members -> {run.out / 'ensemble' / 'manifest.json'}")


@main.command("classify")
@click.argument("corpus", type=_input)
@_common()
def classify(run: Run, corpus):
    """Label every tweet: filters select, the ensemble decides."""
    run.require("lexicon", "patterns", "embeddings", "ensemble")
    run.optional("weak_model")
    run.optional("variants")
    with _work():
        cfg = run.config
        lex = _read_lexicon(cfg.path("lexicon"))
        variants = _variants(run, lex)
        patterns = _read_patterns(cfg.path("patterns"))
        emb = _read_embeddings(cfg.path("embeddings"))
        weak = _weak_model(run, emb)
        ensemble = load_ensemble(cfg.path("ensemble"))
        target = run.out / "classification.jsonl"
        n = selected = positive = 0
        with open(corpus, encoding="utf-8") as src, atomic_write(target) as fh:
            chunk = []
            seen: set[str] = set()

            def flush():
                nonlocal selected, positive
                for rec in classify_tweets(chunk, lex, variants, patterns, weak, ensemble, emb,
                                           cfg.weak_threshold):
                    fh.write(json.dumps(rec.as_dict()) + "\n")
                    selected += rec.probability is not None
                    positive += rec.label
                chunk.clear()

            for lineno, item in iter_records(src):
                if item.id in seen:
                    raise ValueError(f"line {lineno}: duplicate id {item.id!r}")
                seen.add(item.id)
                chunk.append(tweet_of(item))
                n += 1
                if len(chunk) >= CHUNK:
                    flush()
            flush()
        _meta(target, run, "classify", n=n, selected=selected, positive=positive)
        click.echo(f"{n} tweets, {selected} selected, {positive} positive -> {target}")


def _read_classification(path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(rec, dict) or "id" not in rec or rec.get("label") not in (0, 1):
                raise ValueError(f"{path}:{lineno}: expected an object with 'id' and 0/1 'label'")
            records.append(rec)
    return records


def _gold(path) -> tuple[Corpus, dict]:
    corpus = _labeled(path)
    return corpus, {t.id: y for t, y in zip(corpus.tweets, corpus.labels)}


@main.command("evaluate")
@click.argument("classification", type=_input)
@click.argument("gold", type=_input)
@click.option("--errors/--no-errors", default=False,
              help="also export false positives and false negatives")
@_common()
def evaluate(run: Run, classification, gold, errors):
    """Precision, recall and F1 of CLASSIFICATION against GOLD."""
    with _work():
        corpus, gold_map = _gold(gold)
        recs = _read_classification(classification)
        pred_map = {r["id"]: r["label"] for r in recs}
        report = metrics_report(confusion(pred_map, gold_map))
        write_json(run.out / "metrics.json", {**report, "config_hash": run.digest})
        if errors:
            by_id = {r["id"]: r for r in recs}
            ordered = [by_id[t.id] for t in corpus.tweets]
            records = [ClassificationRecord(
                r["id"], r["label"], r.get("probability"),
                FilterVerdict(*(bool(r.get(k, False)) for k in ("lex", "var", "pat", "weak"))))
                for r in ordered]
            fps, fns = error_report([r["label"] for r in ordered], corpus.labels, corpus, records)
            for name, rows in (("errors_fp.jsonl", fps), ("errors_fn.jsonl", fns)):
                with atomic_write(run.out / name) as fh:
                    for row in rows:
                        fh.write(json.dumps(row, ensure_ascii=False) + "\n")
        click.echo(" ".join(f"{k}={report[k]}" for k in ("precision", "recall", "f1")))


@main.command("compare")
@click.argument("output_a", type=_input)
@click.argument("output_b", type=_input)
@click.argument("gold", type=_input)
@_common()
def compare(run: Run, output_a, output_b, gold):
    """Exact McNemar test between two classification outputs."""
    with _work():
        _, gold_map = _gold(gold)
        a = {r["id"]: r["label"] for r in _read_classification(output_a)}
        b = {r["id"]: r["label"] for r in _read_classification(output_b)}
        result = mcnemar(a, b, gold_map)
        write_json(run.out / "compare.json", {"b": result.b, "c": result.c,
                                              "p_value": result.p_value,
                                              "config_hash": run.digest})
        click.echo(f"b={result.b} c={result.c} p={result.p_value:.6g}")


@main.command("gradcheck")
@click.argument("architecture", type=click.Choice(ARCHITECTURES), default=KUSURI)
@_common()
def gradcheck(run: Run, architecture):
    """Compare backprop with central differences on a tiny random model."""
    with _work():
        worst, where = model_gradient_check(architecture, 0 if run.seed is None else run.seed)
    ok = worst < GRADCHECK_TOLERANCE
    click.echo(f"{architecture}: max relative error {worst:.3e} at {where} "
               f"({'pass' if ok else 'FAIL'}, tolerance {GRADCHECK_TOLERANCE:g})")
    if not ok:
        click.get_current_context().exit(1)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
