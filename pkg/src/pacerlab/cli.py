"""Command-line entry points."""

from __future__ import annotations

import os
import sys
from pathlib import Path

import click

from . import biosignal, guide, protocol
from .gateway import analysis, headless, service, sources
from .gateway.clock import VirtualClock
from .subjectsim import SimulatedSubject, SubjectParams

ENV_PORT = "PACERLAB_PORT"


def _load_config(path: Path | None) -> service.ServiceConfig:
    """Plain-text config: one ``key = value`` per line, # comments."""
    cfg = service.ServiceConfig()
    if path is None:
        return cfg
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise click.ClickException(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "port":
            cfg.port = int(value)
        elif key == "frame_rate_hz":
            cfg.frame_rate_hz = float(value)
        elif key == "data_dir":
            cfg.data_dir = Path(value)
        elif key == "questionnaire_path":
            cfg.questionnaire_path = Path(value)
        else:
            raise click.ClickException(f"{path}:{lineno}: unknown key {key!r}")
    return cfg


@click.group()
def main():
    """Heart-rate-coupled breathing guide platform."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path))
@click.option("--port", type=int, default=None, help="overrides config and environment")
def serve(config_path, port):
    """Run the HTTP session service."""
    import uvicorn

    cfg = _load_config(config_path)
    if os.environ.get(ENV_PORT):
        cfg.port = int(os.environ[ENV_PORT])
    if port is not None:
        cfg.port = port
    app = service.create_app(cfg)
    uvicorn.run(app, host="127.0.0.1", port=cfg.port)


@main.command()
@click.option(
    "--condition",
    type=click.Choice(["focus-dynamic", "focus-static", "ambient-dynamic", "ambient-static"]),
    default=None,
    help="single condition; omit for a full balanced study",
)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--subjects", "n_subjects", type=int, default=1, show_default=True)
@click.option("--out", "out_dir", type=click.Path(path_type=Path), default=Path("sessions"))
def simulate(condition, seed, n_subjects, out_dir):
    """Run headless simulated sessions and write their logs."""
    if condition is None:
        logs = headless.run_simulated_study(n_subjects, seed=seed, data_dir=out_dir)
    else:
        cond = protocol.Condition.parse(condition)
        logs = [
            headless.run_headless(
                cond,
                SubjectParams(seed=seed + k),
                seed=seed + k,
                participant_id=f"sim-{cond}-{k + 1:02d}",
                data_dir=out_dir,
            )
            for k in range(n_subjects)
        ]
    click.echo(f"wrote {len(logs)} session log(s) to {out_dir}/")


@main.command()
@click.option("--file", "path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--speed", type=float, default=1.0, show_default=True, help="playback multiplier")
@click.option("--virtual-clock", is_flag=True, help="no real-time pacing")
def replay(path, speed, virtual_clock):
    """Replay a recorded inter-beat-interval file and report summary stats."""
    clock = VirtualClock() if virtual_clock else None
    samples = list(sources.ingest(sources.ReplaySource(path, speed=speed), clock=clock))
    if not samples:
        raise click.ClickException("no usable samples in file")
    series = biosignal.IbiSeries(samples)
    kept = biosignal.artifact_filter(series)
    click.echo(f"samples: {len(samples)} (kept {len(kept)} after artifact filter)")
    click.echo(f"mean HR: {biosignal.mean_hr(kept):.1f} bpm")
    click.echo(f"RMSSD:   {biosignal.rmssd(kept).value_s * 1000:.1f} ms")


@main.command()
@click.option(
    "--in",
    "in_",
    type=click.Path(exists=True, path_type=Path),
    multiple=True,
    required=True,
    help="session logs (.ndjson), dataset tables (.csv), or directories of them",
)
@click.option("--out", "out_dir", type=click.Path(path_type=Path), default=Path("report"))
@click.option("--nperm", type=int, default=999, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def analyze(in_, out_dir, nperm, seed):
    """Run the study analysis battery and write report files."""
    paths: list[Path] = []
    for p in in_:
        if p.is_dir():
            paths.extend(sorted(p.glob("*.ndjson")))
            paths.extend(sorted(p.glob("*.csv")))
        else:
            paths.append(p)
    report, diagnostics = analysis.analyze_paths(paths, out_dir, n_perm=nperm, seed=seed)
    click.echo(report.to_text())
    for d in diagnostics:
        click.echo(f"excluded: {d}", err=True)
    if diagnostics:
        sys.exit(1)


@main.command()
@click.option("--rates", default="4.5,5.0,5.5,6.0,6.5", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--seconds-per-rate", type=float, default=60.0, show_default=True)
def calibrate(rates, seed, seconds_per_rate):
    """Resonance sweep against a simulated subject; prints the chosen rate."""
    rate_list = [float(r) for r in rates.split(",")]
    subject = SimulatedSubject(SubjectParams(seed=seed))
    state = guide.GuideState()
    series_per_rate = []
    for rate in rate_list:
        samples = []
        end = subject.state.t_ms + seconds_per_rate * 1000.0
        while subject.state.t_ms < end:
            beat = subject.beat(guide_phase=state.phase)
            state = guide.smooth_hr(state, beat)
            state = guide.step(state, beat.ibi_ms, guide.StaticMode(rate))
            samples.append(beat)
        series_per_rate.append(biosignal.IbiSeries(samples))
    result = guide.calibrate_resonance(rate_list, series_per_rate)
    for rate, value in zip(rate_list, result.per_candidate_rmssd):
        click.echo(f"  {rate:4.1f} breaths/min  rmssd {value * 1000:7.2f} ms")
    click.echo(f"chosen rate: {result.rate_bpm} breaths/min")


if __name__ == "__main__":
    main()
