"""Command-line entry points for the whole pipeline.

Exit codes: 0 success, 1 runtime failure, 2 usage error (click's own
convention for bad flags, plus explicit usage checks below).
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import click

from .demo import DEMO_FPS, DEMO_SEED, run_demo
from .harness import StudyStore, create_app, load_study_config
from .ingest import ClipManifest, IngestError, MediaToolConfig, register_clip, sample_frames
from .providers import MockProvider, ProviderConfig, HttpProvider
from .schema import SchemaError, load_schema
from .stats import analyze_study1, analyze_study2
from .stats.bootstrap import DEFAULT_ITERATIONS, DEFAULT_SEED
from .workspace import Workspace


def _workspace(path: str) -> Workspace:
    return Workspace.at(path).ensure()


def _media_config(ws: Workspace) -> MediaToolConfig:
    if ws.media_config_path.exists():
        return MediaToolConfig.from_file(ws.media_config_path)
    return MediaToolConfig()


@click.group()
@click.version_option(package_name="scentplan")
def main() -> None:
    """Plan, validate, and study scent tracks for short video clips."""


@main.command()
@click.option("--workspace", required=True, type=click.Path(), help="Workspace directory.")
@click.option("--fps", default=1.0, show_default=True,
              type=click.FloatRange(min=0, min_open=True), help="Frame sampling rate.")
@click.argument("videos", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
def ingest(workspace: str, fps: float, videos: tuple[str, ...]) -> None:
    """Register VIDEOS and sample frames into the workspace."""
    ws = _workspace(workspace)
    media = _media_config(ws)
    manifest = ClipManifest.load(ws.clip_manifest_path)
    try:
        for video in videos:
            clip_id = Path(video).stem
            clip = register_clip(video, clip_id, media, manifest)
            clip = sample_frames(clip, fps, media, ws.frames_dir, manifest)
            click.echo(
                f"{clip.clip_id}: {clip.duration_ms} ms, {len(clip.frame_paths)} frames"
            )
    except IngestError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"{len(videos)} clip(s) ingested into {ws.root}")


@main.command()
@click.option("--workspace", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--schema", "schema_path", default="default", show_default=True,
              help="Odor schema JSON, or 'default' for the bundled one.")
@click.option("--mock", is_flag=True,
              help="Replay fixture responses from the workspace instead of calling a model.")
@click.option("--provider-config", type=click.Path(exists=True, dir_okay=False),
              help="Provider JSON (endpoint, model, budget, credential env var).")
@click.option("--all", "plan_all", is_flag=True, help="Plan every ingested clip.")
@click.option("--strategy", type=click.Choice(["system", "over_inclusive", "naive"]),
              help="Generate only this strategy (default: all three).")
@click.option("--max-concurrent", default=2, show_default=True,
              help="Concurrency cap enforced on system plans.")
@click.option("--max-repair-attempts", default=2, show_default=True,
              help="Total model attempts per stage (initial call + repairs).")
@click.argument("clip_ids", nargs=-1)
def plan(workspace: str, schema_path: str, mock: bool, provider_config: str | None,
         plan_all: bool, strategy: str | None, max_concurrent: int,
         max_repair_attempts: int, clip_ids: tuple[str, ...]) -> None:
    """Produce system, over-inclusive, and naive plans for ingested clips."""
    ws = _workspace(workspace)
    if mock and provider_config:
        raise click.UsageError("--mock and --provider-config are mutually exclusive")
    if not mock and not provider_config:
        raise click.UsageError("choose a provider: --mock or --provider-config")
    if plan_all and clip_ids:
        raise click.UsageError("--all and explicit clip ids are mutually exclusive")
    if not plan_all and not clip_ids:
        raise click.UsageError("name clip ids or pass --all")

    try:
        schema = load_schema(schema_path)
    except (OSError, SchemaError, json.JSONDecodeError) as exc:
        raise click.ClickException(f"cannot load schema '{schema_path}': {exc}") from exc

    manifest = ClipManifest.load(ws.clip_manifest_path)
    if clip_ids:
        unknown = [c for c in clip_ids if c not in manifest.clips]
        if unknown:
            raise click.UsageError(f"clip id(s) not in manifest: {', '.join(unknown)}")
        clips = [manifest.clips[c] for c in clip_ids]
    else:
        clips = list(manifest.clips.values())
    if not clips:
        raise click.ClickException(f"no ingested clips in {ws.root}")

    if mock:
        provider = MockProvider(ws.fixtures_dir)
    else:
        config = ProviderConfig.from_file(provider_config)
        if config.credential_env and not os.environ.get(config.credential_env):
            raise click.ClickException(
                f"environment variable {config.credential_env} is not set"
            )
        provider = HttpProvider(config)

    from .planners import generate_stimuli

    strategies = (strategy,) if strategy else ("system", "over_inclusive", "naive")
    result = generate_stimuli(
        clips, schema, provider, ws,
        max_concurrent=max_concurrent, max_repair_attempts=max_repair_attempts,
        strategies=strategies,
    )
    click.echo(f"{result.plan_count} plan file(s) written to {ws.plans_dir}")
    if result.failures:
        for failure in result.failures:
            click.echo(f"  failed {failure.clip_id}/{failure.strategy}: {failure.error}", err=True)
        raise click.ClickException(
            f"{len(result.failures)} stimulus failure(s); see {ws.failures_path()}"
        )


def _study_configs(ws: Workspace, seed: int) -> dict:
    configs = {}
    for study_id in ("study1", "study2"):
        config_path = ws.study_dir(study_id) / "config.json"
        if config_path.exists():
            configs[study_id] = load_study_config(config_path)
    if configs:
        return configs

    from .harness import default_study1, default_study2, load_plan_texts

    texts = load_plan_texts(ws)
    s1_clips = [c for c in ClipManifest.load(ws.clip_manifest_path).clips
                if all((c, s) in texts for s in ("system", "over_inclusive", "naive"))]
    if not s1_clips:
        raise click.ClickException(
            f"no clips in {ws.root} have all three plans; run `scentplan plan` first"
        )
    return {
        "study1": default_study1(s1_clips, seed),
        "study2": default_study2(s1_clips[:3], seed),
    }


@main.command()
@click.option("--workspace", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8765, show_default=True)
@click.option("--seed", default=DEMO_SEED, show_default=True,
              help="Presentation-order seed when study configs are created fresh.")
def serve(workspace: str, host: str, port: int, seed: int) -> None:
    """Run the study harness HTTP service against a prepared workspace."""
    import uvicorn

    ws = _workspace(workspace)
    try:
        app = create_app(ws, _study_configs(ws, seed))
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"serving studies from {ws.root} on http://{host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command()
@click.option("--workspace", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--study", required=True, type=click.Choice(["study1", "study2"]))
@click.option("--iterations", default=DEFAULT_ITERATIONS, show_default=True,
              help="Bootstrap resamples.")
@click.option("--seed", default=DEFAULT_SEED, show_default=True, help="Bootstrap seed.")
@click.option("--per-trial-friedman", is_flag=True,
              help="Sensitivity mode: Friedman over per-trial ranks instead of "
                   "participant means (study 1 only).")
def analyze(workspace: str, study: str, iterations: int, seed: int,
            per_trial_friedman: bool) -> None:
    """Export collected responses and produce the study's report tables."""
    ws = _workspace(workspace)
    config_path = ws.study_dir(study) / "config.json"
    if not config_path.exists():
        raise click.ClickException(f"no {study} configuration under {ws.studies_dir}")
    store = StudyStore(load_study_config(config_path), ws.study_dir(study))
    dataset, sidecar = store.export()

    export_path = ws.exports_dir / f"{study}.export.json"
    export_path.write_text(json.dumps(dataset, indent=2, sort_keys=True) + "\n", "utf-8")
    (ws.exports_dir / f"{study}.exclusions.json").write_text(
        json.dumps(sidecar, indent=2, sort_keys=True) + "\n", "utf-8"
    )

    try:
        if study == "study1":
            report = analyze_study1(dataset, iterations=iterations, seed=seed,
                                    per_trial_friedman=per_trial_friedman)
        else:
            if per_trial_friedman:
                raise click.UsageError("--per-trial-friedman applies to study1 only")
            report = analyze_study2(dataset, iterations=iterations, seed=seed)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc

    text = report.render_text()
    (ws.reports_dir / f"{study}.report.txt").write_text(text, "utf-8")
    (ws.reports_dir / f"{study}.report.json").write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", "utf-8"
    )
    click.echo(text, nl=False)
    click.echo(
        f"\nExcluded {sidecar['excluded_incomplete']} incomplete of "
        f"{sidecar['total_sessions']} session(s). Artifacts in {ws.reports_dir}."
    )


@main.command()
@click.option("--workspace", default="scentplan-demo", show_default=True,
              type=click.Path(file_okay=False))
@click.option("--fps", default=DEMO_FPS, show_default=True,
              type=click.FloatRange(min=0, min_open=True))
@click.option("--seed", default=DEMO_SEED, show_default=True)
def demo(workspace: str, fps: float, seed: int) -> None:
    """Run the bundled ten-clip pipeline offline and prepare both studies."""
    result = run_demo(workspace, fps=fps, seed=seed)
    click.echo(
        f"Registered {len(result.clip_ids)} clips; "
        f"wrote {result.stimuli.plan_count} plan file(s)."
    )
    if result.stimuli.failures:
        raise click.ClickException(
            f"{len(result.stimuli.failures)} stimulus failure(s); "
            f"see {result.workspace.failures_path()}"
        )
    click.echo(
        f"Workspace ready at {result.workspace.root}; "
        f"next: scentplan serve --workspace {result.workspace.root}"
    )


if __name__ == "__main__":
    main()
