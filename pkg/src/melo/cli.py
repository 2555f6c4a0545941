"""Command-line entry point: simulate, ingest, eval, sweep, recommend, serve.

Every artifact-producing subcommand writes a manifest.json alongside its
outputs holding the resolved parameters, input hashes and output hashes.
Manifests contain no timestamps, so two runs with the same arguments produce
byte-identical artifact trees.
"""

from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path

import click

from .evaluation import (
    EvalMode,
    EvalProtocol,
    EvalReport,
    run_eval,
    sigma_sweep,
    sweep_to_csv,
)
from .kddcup import KddItemRegistry, ParseError, dataset_stats, parse_kdd
from .logio import (
    read_interactions,
    read_item_registry,
    write_ground_truth,
    write_interactions,
    write_item_registry,
)
from .model import EngineConfig, MeloError, Variant, replay
from .recommend import RecommendationRequest, recommend
from .synth import CohortSpec, simulate


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(out_dir: Path, command: str, arguments: dict,
                   inputs: list[Path], outputs: list[Path]) -> Path:
    manifest = {
        "command": command,
        "arguments": arguments,
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": {p.name: _sha256(p) for p in outputs},
    }
    path = out_dir / "manifest.json"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=1)
        fh.write("\n")
    return path


def engine_options(fn):
    fn = click.option("--config", "config_path",
                      type=click.Path(exists=True, path_type=Path), default=None,
                      help="JSON engine-config file; explicit flags win.")(fn)
    fn = click.option("--variant", type=click.Choice(["elo", "melo"]),
                      default="melo", show_default=True,
                      help="Model variant.")(fn)
    fn = click.option("--k", type=float, default=None,
                      help="Constant sensitivity; overrides gamma/beta.")(fn)
    fn = click.option("--gamma", type=float, default=1.8, show_default=True,
                      help="Uncertainty-function starting value.")(fn)
    fn = click.option("--beta", type=float, default=0.05, show_default=True,
                      help="Uncertainty-function decay slope.")(fn)
    fn = click.option("--guess-correction", is_flag=True, default=False,
                      help="Shift predictions by the 1/options guess floor.")(fn)
    fn = click.option("--init-rating", type=float, default=0.0, show_default=True,
                      help="Initial rating for new students and items.")(fn)
    return fn


def build_config(ctx, config_path, variant, k, gamma, beta, guess_correction,
                 init_rating) -> EngineConfig:
    """Resolve the engine config: built-in defaults < config file < flags."""
    merged: dict = {}
    if config_path is not None:
        try:
            merged = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise click.ClickException(f"invalid config file {config_path}: {exc}")
    flags = {"variant": variant, "k": k, "gamma": gamma, "beta": beta,
             "guess_correction": guess_correction, "init_rating": init_rating}
    for name, value in flags.items():
        explicit = ctx.get_parameter_source(name) == click.core.ParameterSource.COMMANDLINE
        if explicit or name not in merged:
            merged[name] = value
    try:
        return EngineConfig.from_dict(merged)
    except MeloError as exc:
        raise click.ClickException(str(exc)) from exc


@click.group()
def main():
    """Elo / M-Elo learner modeling toolkit."""


@main.command(name="simulate")
@click.option("--students", type=int, default=100, show_default=True)
@click.option("--items", type=int, default=1000, show_default=True)
@click.option("--answers", type=int, default=70_000, show_default=True)
@click.option("--concepts", type=int, default=10, show_default=True)
@click.option("--sigma", type=float, default=1.0, show_default=True,
              help="Spread of each student's knowledge across concepts.")
@click.option("--tag-min", type=int, default=1, show_default=True)
@click.option("--tag-max", type=int, default=3, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), required=True,
              help="Output directory.")
def simulate_cmd(students, items, answers, concepts, sigma, tag_min, tag_max,
                 seed, out):
    """Generate a synthetic cohort: interaction log, registry, ground truth."""
    spec = CohortSpec(
        n_students=students, n_items=items, n_answers=answers,
        n_concepts=concepts, sigma=sigma, tag_range=(tag_min, tag_max),
        seed=seed,
    )
    out.mkdir(parents=True, exist_ok=True)
    truth, stream = simulate(spec)
    log_path = out / "interactions.tsv"
    registry_path = out / "items.json"
    truth_path = out / "ground_truth.json"
    write_interactions(log_path, stream)
    write_item_registry(registry_path, truth.tags)
    write_ground_truth(truth_path, truth)
    write_manifest(out, "simulate", spec.to_dict(), [],
                   [log_path, registry_path, truth_path])
    click.echo(f"wrote {len(stream)} interactions to {log_path}")


@main.command()
@click.option("--train", "train_path", type=click.Path(exists=True, path_type=Path),
              required=True, help="KDD-style TSV file.")
@click.option("--test", "test_path", type=click.Path(exists=True, path_type=Path),
              default=None, help="Companion test TSV sharing the item registry.")
@click.option("--kc-column", default=None,
              help="Name of the KC column; default: first column starting with KC.")
@click.option("--out", type=click.Path(path_type=Path), required=True)
def ingest(train_path, test_path, kc_column, out):
    """Convert KDD-style TSV logs to the internal interaction format."""
    out.mkdir(parents=True, exist_ok=True)
    registry = KddItemRegistry()
    try:
        datasets = [parse_kdd(train_path, registry, kc_column)]
        if test_path is not None:
            datasets.append(parse_kdd(test_path, registry, kc_column))
    except ParseError as exc:
        raise click.ClickException(str(exc)) from exc
    outputs = []
    names = ["train", "test"]
    inputs = [train_path] + ([test_path] if test_path else [])
    for name, ds in zip(names, datasets):
        log_path = out / f"{name}.tsv"
        write_interactions(log_path, ds.interactions)
        outputs.append(log_path)
        click.echo(
            f"{name}: kept {ds.report.kept} of {ds.report.total_rows} rows "
            f"({ds.report.discarded_untagged} untagged, "
            f"{ds.report.discarded_malformed} malformed)"
        )
    registry_path = out / "items.json"
    write_item_registry(registry_path, registry.tags)
    outputs.append(registry_path)
    stats = dataset_stats(datasets)
    stats_path = out / "stats.json"
    with open(stats_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump({
            "students": stats.students, "kcs": stats.kcs, "items": stats.items,
            "multi_kc_items": stats.multi_kc_items,
            "interactions": stats.interactions,
        }, fh, sort_keys=True, indent=1)
        fh.write("\n")
    outputs.append(stats_path)
    write_manifest(out, "ingest",
                   {"kc_column": kc_column}, inputs, outputs)
    click.echo(f"students={stats.students} kcs={stats.kcs} items={stats.items} "
               f"multi_kc={stats.multi_kc_items} interactions={stats.interactions}")


def _format_report(report: EvalReport) -> str:
    lines = ["run   auc      rmse     acc      n"]
    for i, m in enumerate(report.runs):
        auc_s = "undef " if m.auc is None else f"{m.auc:.4f}"
        lines.append(f"{i:<5} {auc_s}   {m.rmse:.4f}   {m.acc:.4f}   {m.n_scored}")
    mean_auc = report.mean_auc()
    auc_s = "undef " if mean_auc is None else f"{mean_auc:.4f}"
    lines.append(f"mean  {auc_s}   {report.mean_rmse():.4f}   "
                 f"{report.mean_acc():.4f}")
    return "\n".join(lines)


@main.command(name="eval")
@click.option("--log", "log_path", type=click.Path(exists=True, path_type=Path),
              required=True, help="Interaction log (train, or full stream).")
@click.option("--test-log", type=click.Path(exists=True, path_type=Path),
              default=None, help="Separate test log for a provided split.")
@click.option("--registry", type=click.Path(exists=True, path_type=Path),
              default=None, help="Item registry JSON (required for melo).")
@click.option("--mode", type=click.Choice(["split-frozen", "online"]),
              default="split-frozen", show_default=True)
@click.option("--split-fraction", type=float, default=0.7, show_default=True)
@click.option("--threshold", type=float, default=0.5, show_default=True)
@engine_options
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.pass_context
def eval_cmd(ctx, log_path, test_log, registry, mode, split_fraction, threshold,
             config_path, variant, k, gamma, beta, guess_correction,
             init_rating, out):
    """Replay a stream and report AUC / RMSE / ACC."""
    cfg = build_config(ctx, config_path, variant, k, gamma, beta,
                       guess_correction, init_rating)
    protocol = EvalProtocol(mode=EvalMode(mode), split_fraction=split_fraction,
                            repeats=1, threshold=threshold)
    out.mkdir(parents=True, exist_ok=True)
    train = read_interactions(log_path)
    test = read_interactions(test_log) if test_log else None
    tags = read_item_registry(registry) if registry else None
    inputs = [p for p in (log_path, test_log, registry) if p]
    try:
        dump_path = out / "predictions.csv"
        report = run_eval(train, cfg, protocol, test=test, item_tags=tags,
                          dump_path=dump_path)
    except MeloError as exc:
        raise click.ClickException(str(exc)) from exc
    report_path = out / "report.json"
    with open(report_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump({
            "config": report.config,
            "protocol": report.protocol,
            "runs": [
                {"auc": m.auc, "rmse": m.rmse, "acc": m.acc,
                 "n_scored": m.n_scored, "n_pos": m.n_pos, "n_neg": m.n_neg}
                for m in report.runs
            ],
            "mean": {"auc": report.mean_auc(), "rmse": report.mean_rmse(),
                     "acc": report.mean_acc()},
        }, fh, sort_keys=True, indent=1)
        fh.write("\n")
    write_manifest(out, "eval", {
        "mode": mode, "split_fraction": split_fraction, "threshold": threshold,
        "config": cfg.to_dict(),
    }, inputs, [dump_path, report_path])
    click.echo(_format_report(report))


@main.command()
@click.option("--sigmas", default="0.0,0.5,1.0,2.0,4.0", show_default=True,
              help="Comma-separated sigma grid.")
@click.option("--concept-counts", default="10,100", show_default=True,
              help="Comma-separated concept-count grid.")
@click.option("--students", type=int, default=100, show_default=True)
@click.option("--items", type=int, default=1000, show_default=True)
@click.option("--answers", type=int, default=70_000, show_default=True)
@click.option("--repeats", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--gamma", type=float, default=1.8, show_default=True)
@click.option("--beta", type=float, default=0.05, show_default=True)
@click.option("--k", type=float, default=None)
@click.option("--out", type=click.Path(path_type=Path), required=True)
def sweep(sigmas, concept_counts, students, items, answers, repeats, seed,
          gamma, beta, k, out):
    """Run both variants over a (sigma, concept-count) grid and emit CSV."""
    sigma_values = [float(s) for s in sigmas.split(",")]
    l_values = [int(s) for s in concept_counts.split(",")]
    template = CohortSpec(
        n_students=students, n_items=items, n_answers=answers,
        n_concepts=max(l_values), sigma=1.0, seed=seed,
    )
    cfgs = [
        EngineConfig(variant=Variant.STANDARD_ELO, k=k, gamma=gamma, beta=beta),
        EngineConfig(variant=Variant.M_ELO, k=k, gamma=gamma, beta=beta),
    ]
    protocol = EvalProtocol(repeats=repeats)
    out.mkdir(parents=True, exist_ok=True)
    rows = sigma_sweep(template, sigma_values, l_values, cfgs, protocol)
    csv_path = out / "sweep.csv"
    sweep_to_csv(rows, csv_path)
    write_manifest(out, "sweep", {
        "sigmas": sigma_values, "concept_counts": l_values,
        "students": students, "items": items, "answers": answers,
        "repeats": repeats, "seed": seed,
        "gamma": gamma, "beta": beta, "k": k,
    }, [], [csv_path])
    click.echo(f"wrote {len(rows)} rows to {csv_path}")


@main.command(name="recommend")
@click.option("--log", "log_path", type=click.Path(exists=True, path_type=Path),
              required=True, help="Interaction log to rebuild state from.")
@click.option("--registry", type=click.Path(exists=True, path_type=Path),
              required=True, help="Item registry JSON.")
@click.option("--student", required=True)
@click.option("-k", "--top-k", type=int, default=5, show_default=True)
@click.option("--target-success", type=float, default=0.65, show_default=True)
@click.option("--include-attempted", is_flag=True, default=False)
@engine_options
@click.pass_context
def recommend_cmd(ctx, log_path, registry, student, top_k, target_success,
                  include_attempted, config_path, variant, k, gamma, beta,
                  guess_correction, init_rating):
    """Print top-k recommendations for a student from a saved stream."""
    from .evaluation import initial_state
    from .model import DomainModel

    cfg = build_config(ctx, config_path, variant, k, gamma, beta,
                       guess_correction, init_rating)
    stream = read_interactions(log_path)
    tags = read_item_registry(registry)
    state = initial_state(tags, cfg)
    final, _ = replay(stream, cfg, state, collect=False)
    learner = final.learners.get(student)
    if learner is None:
        raise click.ClickException(f"student {student!r} not in stream")
    concepts: dict[str, None] = {}
    for t in tags.values():
        for c in t:
            concepts.setdefault(c)
    attempted = {rec.item for rec in stream if rec.student == student}
    req = RecommendationRequest(
        student, k=top_k, target_success=target_success,
        exclude_attempted=not include_attempted,
    )
    try:
        result = recommend(req, learner, final.items, DomainModel(tuple(concepts)),
                           cfg, attempted=attempted)
    except MeloError as exc:
        raise click.ClickException(str(exc)) from exc
    if result.status != "ok":
        click.echo(f"no candidates ({result.status})")
        return
    click.echo("item        combined  gap     match   p_success")
    for s in result.items:
        click.echo(f"{s.item:<11} {s.combined:.4f}    {s.gap_score:.4f}  "
                   f"{s.difficulty_match:.4f}  {s.predicted_success:.4f}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--data-dir", type=click.Path(path_type=Path), required=True,
              envvar="MELO_DATA_DIR", help="Course storage directory.")
@click.option("--token", default=None, envvar="MELO_API_TOKEN",
              help="Static API token; unset disables auth.")
@click.option("--engine-config", type=click.Path(exists=True, path_type=Path),
              default=None, envvar="MELO_ENGINE_CONFIG",
              help="JSON engine config used for courses created without one.")
@click.option("--dashboard-dir", type=click.Path(path_type=Path), default=None,
              envvar="MELO_DASHBOARD_DIR",
              help="Static dashboard bundle to serve under /app.")
@click.option("--snapshot-every", type=int, default=500, show_default=True)
def serve(host, port, data_dir, token, engine_config, dashboard_dir,
          snapshot_every):
    """Launch the practice service."""
    import uvicorn

    from .service import create_app

    default_config = None
    if engine_config is not None:
        try:
            default_config = EngineConfig.from_dict(
                json.loads(engine_config.read_text(encoding="utf-8"))
            )
        except (json.JSONDecodeError, MeloError) as exc:
            raise click.ClickException(f"bad engine config: {exc}") from exc
    data_dir.mkdir(parents=True, exist_ok=True)
    app = create_app(data_dir, api_token=token, snapshot_every=snapshot_every,
                     dashboard_dir=dashboard_dir, default_config=default_config)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
