"""Command-line front end: ``voxsel <subcommand> [options]``.

Exit codes: 0 success, 1 usage error, 2 data error. Option values resolve as
flag > ``VOXSEL_<SUBCOMMAND>_<OPTION>`` environment variable > ``--config`` file
table > built-in default.
"""

import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import click
import numpy as np
from dotenv import find_dotenv, load_dotenv
from pydantic import ValidationError

from . import __version__
from .core.dsp import design_pqmf, pqmf_analyze, pqmf_roundtrip_snr
from .core.embeddings import target_embedding
from .core.losses import (
    combined_sp_terms, multi_resolution_stft_loss, stft_loss_single, subband_buffers
)
from .core.selection import GROUP_NONE, GROUP_TAG, build_adaptation_list, score_histogram, selection_stats
from .errors import VoxselError
from .models.audio import AudioBuffer
from .models.config import (
    Criterion, EvalConfig, F0Config, PqmfConfig, RunConfig, SelectionConfig, StftConfig,
    StftLossConfig, get_config, load_config_file, set_config
)
from .models.embedding import EmbeddingPool
from .services.evaluation_service import evaluate_pair_set
from .services.selection_service import compare_criteria, rank_pool
from .services.synthetic import generate_synthetic_plda, generate_synthetic_pool, generate_target_records
from .storage import (
    apply_speaker_tags, build_document, load_id_list, load_pairs, load_plda, load_pool,
    load_speaker_tags, read_selection_report, read_wav, save_plda, save_pool, write_document,
    write_histogram_csv, write_id_list
)
from .utils.logging_config import LOG_LEVELS, WarningCollector, setup_logging

logger = logging.getLogger(__name__)

ENV_PREFIX = "VOXSEL"

# Output destinations are not part of the echoed configuration.
OUTPUT_PARAMS = frozenset({"out", "list_out", "report", "plda_out", "target_out"})

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


@dataclass
class CliState:
    run: RunConfig
    warnings: WarningCollector


def _state() -> CliState:
    return click.get_current_context().find_object(CliState)


def _effective_config(ctx: click.Context, **extra: Any) -> Dict[str, Any]:
    config = {name: value for name, value in ctx.params.items() if name not in OUTPUT_PARAMS}
    config.update(extra)
    return {name: list(value) if isinstance(value, tuple) else value for name, value in config.items()}


def _emit(path: str, kind: str, payload: Dict[str, Any], config: Dict[str, Any]) -> None:
    write_document(path, build_document(kind, payload, config, _state().warnings.messages))


def _parse_sizes(ctx, param, value) -> tuple:
    """Comma-separated positive integers (a list is accepted from config files)."""
    if value is None or value == "":
        return ()
    items = value if isinstance(value, (list, tuple)) else str(value).split(",")
    try:
        sizes = tuple(sorted({int(str(item).strip()) for item in items if str(item).strip()}))
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got '{value}'") from None
    if any(size < 1 for size in sizes):
        raise click.BadParameter("selection sizes must be positive")
    return sizes


def _load_candidates(pool_path: str, speaker_tags: Optional[str], tag: Optional[str]) -> EmbeddingPool:
    pool = load_pool(pool_path)
    if speaker_tags:
        pool = apply_speaker_tags(pool, load_speaker_tags(speaker_tags))
    if tag:
        pool = pool.with_tag(tag)
        logger.info(f"Restricted candidates to tag '{tag}': {len(pool)} utterances")
    return pool


def _exclusions(pool: EmbeddingPool, exclude_path: Optional[str], target: EmbeddingPool) -> List[str]:
    """Listed speakers plus target speakers that also appear among the candidates."""
    excluded = set(load_id_list(exclude_path)) if exclude_path else set()
    overlapping = set(target.speaker_index) & set(pool.speaker_index)
    if overlapping:
        logger.info(f"Excluding {len(overlapping)} target speaker(s) from the candidate pool")
    return sorted(excluded | overlapping)


# Shared option sets
def _selection_inputs(command):
    options = [
        click.option("--pool", required=True, help="Candidate pool (.jsonl or .xvb)."),
        click.option("--plda", "plda_path", required=True, help="PLDA model JSON."),
        click.option("--target", required=True, help="Target-speaker utterances (.jsonl or .xvb)."),
        click.option("--k", type=int, default=85, show_default=True, help="Utterances to select."),
        click.option("--alpha", type=float, default=0.1, show_default=True, help="Regularizer exponent."),
        click.option("--sigmoid-c", type=float, default=0.5, show_default=True, help="Sigmoid temperature constant."),
        click.option("--epsilon", type=float, default=1e-6, show_default=True, help="Divergence floor."),
        click.option("--exclude-speakers", default=None, help="File of speaker ids to leave out."),
        click.option("--speaker-tags", default=None, help="spk2gender-style '<speaker> <tag>' file."),
        click.option("--tag", default=None, help="Only consider candidates with this tag."),
    ]
    for option in reversed(options):
        command = option(command)
    return command


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="voxsel")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="TOML or YAML file with one table per subcommand.")
@click.option("--threads", type=click.IntRange(min=1), default=None,
              help="Worker threads (default: available CPUs).")
@click.option("--log-level", type=click.Choice(list(LOG_LEVELS)), default="warn", show_default=True)
@click.option("--log-file", default=None, help="Also log to this rotating file.")
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for synthetic signals and pools.")
@click.pass_context
def cli(ctx, config_path, threads, log_level, log_file, seed):
    """Speaker-similarity data selection and vocoder evaluation toolkit."""
    collector = setup_logging(log_level=log_level, log_file=log_file)
    if config_path:
        try:
            ctx.default_map = load_config_file(config_path)
        except (ValueError, OSError) as e:
            raise click.BadParameter(str(e), param_hint="--config") from None
        logger.info(f"Loaded option defaults from {config_path}")

    values = {"log_level": log_level, "seed": seed, "config_path": config_path}
    if threads is not None:
        values["threads"] = threads
    run_config = RunConfig(**values)
    set_config(run_config)
    ctx.obj = CliState(run=run_config, warnings=collector)


@cli.command("pool-info")
@click.option("--pool", required=True, help="Embedding pool (.jsonl or .xvb).")
@click.option("--speaker-tags", default=None, help="spk2gender-style '<speaker> <tag>' file.")
def pool_info(pool, speaker_tags):
    """Print dimension, record count and speaker count of a pool."""
    loaded = load_pool(pool)
    if speaker_tags:
        loaded = apply_speaker_tags(loaded, load_speaker_tags(speaker_tags))
    click.echo(f"dimension: {loaded.dimension}")
    click.echo(f"records: {len(loaded)}")
    click.echo(f"speakers: {len(loaded.speaker_index)}")
    tags = sorted({record.tag for record in loaded.records if record.tag is not None})
    if tags:
        counts = {tag: sum(1 for r in loaded.records if r.tag == tag) for tag in tags}
        click.echo("tags: " + ", ".join(f"{tag}={counts[tag]}" for tag in tags))


@cli.command()
@_selection_inputs
@click.option("--criterion", type=click.Choice([c.value for c in Criterion]), default="dc3", show_default=True)
@click.option("--out", required=True, help="Selection report JSON.")
@click.option("--list-out", default=None, help="Adaptation list (default: report path with .list suffix).")
@click.option("--reference", default=None, help="Earlier selection report to measure overlap against.")
@click.option("--threshold-k", type=click.UNPROCESSED, default=None, callback=_parse_sizes,
              help="Comma-separated selection sizes whose score thresholds are reported.")
@click.pass_context
def select(ctx, pool, plda_path, target, k, alpha, sigmoid_c, epsilon, exclude_speakers,
           speaker_tags, tag, criterion, out, list_out, reference, threshold_k):
    """Rank candidate utterances by similarity to a target speaker and select the top k."""
    cfg = SelectionConfig(criterion=criterion, k=k, alpha=alpha, sigmoid_c=sigmoid_c, epsilon=epsilon)
    candidates = _load_candidates(pool, speaker_tags, tag)
    targets = load_pool(target)
    model = load_plda(plda_path)
    reference_selected = read_selection_report(reference).selected if reference else None

    report = rank_pool(
        candidates, model, target_embedding(targets.records), cfg,
        exclude_speakers=_exclusions(candidates, exclude_speakers, targets),
        threads=_state().run.threads,
        threshold_ks=threshold_k,
        reference=reference_selected,
    )
    adaptation = build_adaptation_list(report.selected, targets.records)

    list_path = list_out or str(Path(out).with_suffix(".list"))
    write_id_list(list_path, adaptation)
    _emit(out, "selection", {**report.to_dict(), "adaptation_list": adaptation}, _effective_config(ctx))
    click.echo(
        f"selected {len(report.selected)} of {len(report.ranked)} utterances from "
        f"{report.stats.num_speakers} speakers (threshold {report.threshold_score:.6g}); "
        f"adaptation list of {len(adaptation)} written to {list_path}"
    )


@cli.command()
@_selection_inputs
@click.option("--out", required=True, help="Comparison table JSON.")
@click.pass_context
def compare(ctx, pool, plda_path, target, k, alpha, sigmoid_c, epsilon, exclude_speakers,
            speaker_tags, tag, out):
    """Select with DC1, DC2 and DC3 and tabulate statistics against DC1."""
    cfg = SelectionConfig(k=k, alpha=alpha, sigmoid_c=sigmoid_c, epsilon=epsilon)
    candidates = _load_candidates(pool, speaker_tags, tag)
    targets = load_pool(target)
    model = load_plda(plda_path)

    comparison = compare_criteria(
        candidates, model, target_embedding(targets.records), cfg,
        exclude_speakers=_exclusions(candidates, exclude_speakers, targets),
        threads=_state().run.threads,
    )
    payload = {
        "criteria": comparison.to_dict(),
        "selected": {
            criterion.value: [list(key) for key in report.selected_keys]
            for criterion, report in comparison.reports.items()
        },
    }
    _emit(out, "comparison", payload, _effective_config(ctx))

    click.echo(f"{'criterion':<10}{'speakers':>10}{'suspected':>11}{'utt %':>9}{'spk %':>9}")
    for criterion, row in comparison.stats.items():
        click.echo(
            f"{criterion.value:<10}{row.num_speakers:>10}{row.num_suspected:>11}"
            f"{row.utterance_overlap_pct:>9.1f}{row.speaker_overlap_pct:>9.1f}"
        )


@cli.command()
@click.option("--report", "report_path", required=True, help="Selection report JSON.")
@click.option("--reference", default=None, help="Reference selection report JSON.")
@click.option("--out", default=None, help="Optional statistics JSON.")
@click.pass_context
def stats(ctx, report_path, reference, out):
    """Statistics of a selection, optionally with overlap against a reference."""
    report = read_selection_report(report_path)
    reference_selected = read_selection_report(reference).selected if reference else None
    result = selection_stats(report.selected, reference_selected)

    click.echo(f"num_speakers: {result.num_speakers}")
    click.echo(f"num_suspected: {result.num_suspected}")
    if result.utterance_overlap_pct is not None:
        click.echo(f"utterance_overlap_pct: {result.utterance_overlap_pct:.2f}")
        click.echo(f"speaker_overlap_pct: {result.speaker_overlap_pct:.2f}")
    if out:
        _emit(out, "stats", {"stats": result.to_dict()}, _effective_config(ctx))


@cli.command()
@click.option("--report", "report_path", required=True, help="Selection report JSON.")
@click.option("--bins", type=click.IntRange(min=1), default=20, show_default=True)
@click.option("--group-by", type=click.Choice([GROUP_NONE, GROUP_TAG]), default=GROUP_NONE, show_default=True)
@click.option("--out", required=True, help="Histogram CSV.")
def hist(report_path, bins, group_by, out):
    """Histogram of raw PLDA scores over all ranked candidates, as CSV."""
    report = read_selection_report(report_path)
    histogram = score_histogram(report.ranked, bins, group_by)
    write_histogram_csv(out, histogram, report.thresholds)
    click.echo(f"wrote {bins} bins for {len(histogram.counts)} group(s) to {out}")


@cli.command("eval")
@click.option("--pairs", required=True, help="TSV of ref_path, test_path[, ref_emb_id, test_emb_id].")
@click.option("--plda", "plda_path", default=None, help="PLDA model JSON for the plda row.")
@click.option("--embeddings", default=None, help="Pool holding the embeddings named in the pair list.")
@click.option("--out", required=True, help="Evaluation report JSON.")
@click.option("--fft-size", type=int, default=2048, show_default=True)
@click.option("--hop", type=int, default=220, show_default=True)
@click.option("--mcd-order", type=int, default=24, show_default=True)
@click.option("--num-mels", type=int, default=80, show_default=True)
@click.option("--f0-min", type=float, default=70.0, show_default=True)
@click.option("--f0-max", type=float, default=400.0, show_default=True)
@click.option("--frame-period", type=float, default=5.0, show_default=True, help="F0 frame period in ms.")
@click.pass_context
def evaluate(ctx, pairs, plda_path, embeddings, out, fft_size, hop, mcd_order, num_mels,
             f0_min, f0_max, frame_period):
    """Objective metrics over reference/test pairs."""
    stft = StftConfig(fft_size=fft_size, hop=hop, window_length=fft_size)
    cfg = EvalConfig(
        lsd_stft=stft, mcd_stft=stft, mcd_order=mcd_order, num_mels=num_mels,
        f0=F0Config(fmin_hz=f0_min, fmax_hz=f0_max, frame_period_ms=frame_period),
    )
    pool = load_pool(embeddings) if embeddings else None
    model = load_plda(plda_path) if plda_path else None

    report = evaluate_pair_set(load_pairs(pairs, pool), model, cfg, threads=_state().run.threads)
    _emit(out, "evaluation", report.to_dict(), _effective_config(ctx))
    for name, value in report.to_dict()["aggregates"].items():
        click.echo(f"{name}: {value:.4f}")


@cli.command()
@click.option("--bands", type=int, default=5, show_default=True)
@click.option("--taps", type=int, default=62, show_default=True)
@click.option("--beta", type=float, default=9.0, show_default=True)
@click.option("--roundtrip", default=None, help="WAV file to analyze and resynthesize (default: seeded white noise).")
@click.option("--duration", type=float, default=1.0, show_default=True, help="Noise length in seconds.")
@click.option("--sample-rate", type=int, default=44100, show_default=True, help="Noise sample rate.")
@click.option("--report", default=None, help="Filterbank report JSON.")
@click.pass_context
def pqmf(ctx, bands, taps, beta, roundtrip, duration, sample_rate, report):
    """Design a PQMF bank and measure its analysis-synthesis SNR."""
    cfg = PqmfConfig(num_bands=bands, taps=taps, kaiser_beta=beta)
    bank = design_pqmf(cfg.num_bands, cfg.taps, cfg.kaiser_beta)

    seed = get_config().seed
    if roundtrip:
        audio = read_wav(roundtrip)
        source = {"kind": "file", "path": roundtrip}
    else:
        if duration <= 0 or sample_rate <= 0:
            raise click.BadParameter("duration and sample rate must be positive")
        rng = np.random.default_rng(seed)
        audio = AudioBuffer(rng.uniform(-0.5, 0.5, int(round(duration * sample_rate))), sample_rate)
        source = {"kind": "white_noise", "seed": seed}

    result = pqmf_roundtrip_snr(bank, audio)
    payload = {
        "bands": bank.num_bands,
        "taps": bank.taps,
        "beta": bank.kaiser_beta,
        "cutoff": bank.cutoff,
        "objective": bank.objective,
        "snr_db": result.snr_db,
        "delay": result.delay,
        "source": source,
    }
    if report:
        _emit(report, "pqmf", payload, _effective_config(ctx, seed=seed))
    click.echo(f"cutoff: {bank.cutoff:.6f}")
    click.echo(f"snr_db: {result.snr_db:.2f} (delay {result.delay})")


def _loss_terms(x: AudioBuffer, y: AudioBuffer, cfg: StftLossConfig) -> List[Dict[str, Any]]:
    rows = []
    for resolution in cfg.resolutions:
        terms = stft_loss_single(x, y, resolution)
        rows.append({"fft_size": resolution.fft_size, "hop": resolution.hop,
                     "window_length": resolution.window_length, "sc": terms.sc, "mag": terms.mag})
    return rows


@cli.command()
@click.option("--a", "a_path", required=True, help="Generated (test) WAV.")
@click.option("--b", "b_path", required=True, help="Reference WAV.")
@click.option("--preset", type=click.Choice(["fullband", "subband", "combined"]), default="fullband", show_default=True)
@click.option("--out", required=True, help="Loss report JSON.")
@click.pass_context
def stftloss(ctx, a_path, b_path, preset, out):
    """Multi-resolution STFT loss of --a against reference --b."""
    x = read_wav(a_path)
    y = read_wav(b_path)
    payload: Dict[str, Any] = {"preset": preset}

    if preset == "fullband":
        full_cfg = StftLossConfig.fullband()
        payload["resolutions"] = _loss_terms(x, y, full_cfg)
        payload["loss"] = multi_resolution_stft_loss(x, y, full_cfg)
    else:
        pqmf_cfg = PqmfConfig()
        bank = design_pqmf(pqmf_cfg.num_bands, pqmf_cfg.taps, pqmf_cfg.kaiser_beta)
        x_sub = pqmf_analyze(bank, x)
        y_sub = pqmf_analyze(bank, y)
        sub_cfg = StftLossConfig.subband()
        if preset == "subband":
            per_band = [
                multi_resolution_stft_loss(xb, yb, sub_cfg)
                for xb, yb in zip(subband_buffers(x_sub, x.sample_rate_hz), subband_buffers(y_sub, y.sample_rate_hz))
            ]
            payload["subbands"] = per_band
            payload["loss"] = float(np.mean(per_band))
        else:
            combined = combined_sp_terms(x, y, x_sub, y_sub, StftLossConfig.fullband(), sub_cfg)
            payload["fullband"] = combined.fullband
            payload["subbands"] = combined.subbands
            payload["loss"] = combined.total

    _emit(out, "stftloss", payload, _effective_config(ctx))
    click.echo(f"loss: {payload['loss']:.6f}")


@cli.command("synth-pool")
@click.option("--speakers", type=click.IntRange(min=1), default=3, show_default=True)
@click.option("--utterances", type=click.IntRange(min=1), default=10, show_default=True)
@click.option("--dim", type=click.IntRange(min=1), default=16, show_default=True)
@click.option("--spread", type=float, default=0.3, show_default=True, help="Within-speaker standard deviation.")
@click.option("--separation", type=float, default=3.0, show_default=True, help="Standard deviation of speaker centres.")
@click.option("--out", required=True, help="Pool file (.jsonl or .xvb).")
@click.option("--plda-out", default=None, help="Also write a matching synthetic PLDA model.")
@click.option("--target-out", default=None, help="Also write target utterances around the first speaker.")
@click.option("--target-count", type=click.IntRange(min=1), default=5, show_default=True)
def synth_pool(speakers, utterances, dim, spread, separation, out, plda_out, target_out, target_count):
    """Generate a seeded Gaussian-cluster pool for experiments."""
    seed = get_config().seed
    corpus = generate_synthetic_pool(speakers, utterances, dim, seed=seed, spread=spread, separation=separation)
    save_pool(corpus.pool, out)
    if plda_out:
        save_plda(generate_synthetic_plda(dim, seed=seed), plda_out)
    if target_out:
        records = generate_target_records(corpus.centres[0], target_count, seed=seed + 1, spread=spread)
        save_pool(EmbeddingPool.from_records(records, dim), target_out)
    click.echo(f"wrote {len(corpus.pool)} records of {speakers} speakers to {out}")


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run the command line and map failures onto exit codes."""
    load_dotenv(find_dotenv(usecwd=True))
    try:
        result = cli.main(
            args=list(argv) if argv is not None else None,
            prog_name="voxsel",
            standalone_mode=False,
            auto_envvar_prefix=ENV_PREFIX,
        )
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except click.Abort:
        click.echo("Aborted!", err=True)
        return EXIT_USAGE
    except ValidationError as e:
        click.echo(f"error [config]: {e}", err=True)
        return EXIT_USAGE
    except VoxselError as e:
        logger.debug("Data error", exc_info=True)
        click.echo(e.qualified(), err=True)
        return EXIT_DATA
    # click returns the exit code of --help/--version style exits
    return result if isinstance(result, int) else EXIT_OK


def main() -> None:
    sys.exit(run())
