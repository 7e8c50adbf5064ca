"""Dispatching and persistence shared by the CLI and the suite."""

from . import plots
from .config import apply_env_overrides
from .manifest import ResultManifest, Stopwatch, manifest_path_for, \
    load_manifest, write_csv, write_rows_json
from .runners import RUNNERS


def execute(cfg, use_env=True):
    """Run one experiment and persist its outputs.

    Returns (payload, manifest).  With no ``out`` path the computation
    still runs and checks are evaluated, nothing is written.
    """
    if use_env:
        cfg = apply_env_overrides(cfg)
    runner = RUNNERS.get(cfg.experiment)
    if runner is None:
        from .config import ConfigError
        raise ConfigError(f"unknown experiment {cfg.experiment!r}")
    with Stopwatch() as sw:
        payload = runner(cfg)
    manifest = ResultManifest(config=cfg.to_dict())
    manifest.wall_clock_s = sw.elapsed
    for name, passed, detail in payload.checks:
        manifest.add_check(name, passed, detail)
    for name, value, stderr in payload.measurements:
        manifest.add_measurement(name, value, stderr)
    if cfg.out:
        meta = dict(payload.metadata)
        meta["experiment"] = cfg.experiment
        meta["version"] = manifest.version
        if cfg.format == "csv":
            write_csv(cfg.out, payload.columns, payload.rows, meta)
        else:
            write_rows_json(cfg.out, payload.columns, payload.rows, meta)
        manifest.register(cfg.out)
        if cfg.plot and cfg.format == "csv":
            png = str(cfg.out).rsplit(".", 1)[0] + ".png"
            made = plots.render(cfg.experiment, payload.columns,
                                payload.rows, png)
            if made:
                manifest.register(made)
        manifest.write(manifest_path_for(cfg.out))
    return payload, manifest


def rerun_from_manifest(path, out_override=None):
    """Re-execute the experiment recorded in a manifest."""
    cfg, _ = load_manifest(path)
    if out_override is not None:
        data = cfg.to_dict()
        data["out"] = out_override
        from .config import ExperimentConfig
        cfg = ExperimentConfig(**data)
    return execute(cfg, use_env=False)
