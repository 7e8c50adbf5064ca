"""Command-line harness.

Every subcommand assembles an ExperimentConfig (config file < environment
variables < explicit flags), runs the experiment, writes the delimited
output with a companion figure and manifest, prints the checks, and exits
0 on all-pass, 1 on a failed check, 2 on configuration errors, 3 on
capacity errors.
"""

import sys

import click

from .config import ConfigError, ExperimentConfig, load_config
from .harness import execute
from .kernel import CapacityError

EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_CAPACITY = 3


def _common(fn):
    fn = click.option("--seed", type=int, default=None,
                      help="RNG seed (required for stochastic runs)")(fn)
    fn = click.option("--threads", type=int, default=None,
                      help="worker processes for sample-parallel runs")(fn)
    fn = click.option("--out", type=click.Path(), default=None,
                      help="output table path (.csv or .json)")(fn)
    fn = click.option("--format", "fmt",
                      type=click.Choice(["csv", "json"]), default=None)(fn)
    fn = click.option("--plot/--no-plot", "plot", default=None,
                      help="render a companion PNG next to the CSV")(fn)
    fn = click.option("--config", "config_path", type=click.Path(exists=True),
                      default=None, help="YAML/JSON config file")(fn)
    return fn


def _run(experiment, config_path, cli_opts):
    try:
        if config_path:
            cfg = load_config(config_path)
            data = cfg.to_dict()
            if data["experiment"] != experiment:
                raise ConfigError(
                    f"config file is for {data['experiment']!r}")
        else:
            data = {"experiment": experiment}
        for k, v in cli_opts.items():
            if v is not None:
                data["format" if k == "fmt" else k] = v
        data.setdefault("experiment", experiment)
        cfg = ExperimentConfig(**data)
        payload, manifest = execute(cfg)
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except CapacityError as exc:
        click.echo(f"capacity error: {exc}", err=True)
        sys.exit(EXIT_CAPACITY)
    for c in manifest.checks:
        tag = "PASS" if c["passed"] else "FAIL"
        click.echo(f"[{tag}] {c['name']}: {c['detail']}")
    for m in manifest.measurements:
        se = f" +- {m['stderr']:.6g}" if "stderr" in m else ""
        click.echo(f"{m['name']} = {m['value']:.12g}{se}")
    if cfg.out:
        click.echo(f"wrote {cfg.out}")
    if not manifest.all_passed:
        sys.exit(EXIT_CHECK_FAILED)


@click.group()
def main():
    """Exact and Monte Carlo numerics for 2D polymer partition moments."""


@main.command("kernel-table")
@click.option("--max-time", type=int, required=True)
@_common
def kernel_table(max_time, config_path, **opts):
    """Exact walk kernels: sup-probability, returns and collision mass."""
    _run("kernel-table", config_path, dict(max_time=max_time, **opts))


@main.command("check-pnstar")
@click.option("--max-time", type=int, required=True)
@_common
def check_pnstar(max_time, config_path, **opts):
    """Verify sup_x p_n(x) <= 2/(pi n) over the full range."""
    _run("check-pnstar", config_path, dict(max_time=max_time, **opts))


@main.command("un")
@click.option("--m", type=int, required=True, help="table horizon")
@click.option("--n", type=int, required=True, help="scale parameter N")
@click.option("--beta-hat", type=float, required=True)
@_common
def un(m, n, beta_hat, config_path, **opts):
    """Overlap-weight renewal table with shape diagnostics."""
    _run("un", config_path, dict(m=m, n=n, beta_hat=beta_hat, **opts))


@main.command("second-moment")
@click.option("--m", type=int, required=True, help="largest horizon")
@click.option("--n", type=int, required=True, help="scale parameter N")
@click.option("--beta-hat", type=float, required=True)
@_common
def second_moment(m, n, beta_hat, config_path, **opts):
    """Exact pair moments: transfer, renewal sums and geometric bound."""
    _run("second-moment", config_path,
         dict(m=m, n=n, beta_hat=beta_hat, **opts))


@main.command("moment-mc")
@click.option("--q", type=int, required=True)
@click.option("--n", type=int, required=True)
@click.option("--beta-hat", type=float, required=True)
@click.option("--samples", type=int, required=True)
@_common
def moment_mc(q, n, beta_hat, samples, config_path, **opts):
    """Monte Carlo q-walk moment with reproducible per-sample streams."""
    _run("moment-mc", config_path,
         dict(q=q, n=n, beta_hat=beta_hat, samples=samples, **opts))


@main.command("moment-exact")
@click.option("--q", type=click.Choice(["2", "3"]), required=True)
@click.option("--t", type=int, required=True)
@click.option("--beta-hat", type=float, required=True)
@click.option("--n", type=int, required=True)
@_common
def moment_exact(q, t, beta_hat, n, config_path, **opts):
    """Exact transfer moments at small horizons."""
    _run("moment-exact", config_path,
         dict(q=int(q), t=t, beta_hat=beta_hat, n=n, **opts))


@main.command("erdos-taylor")
@click.option("--n", type=int, required=True)
@click.option("--samples", type=int, required=True)
@_common
def erdos_taylor(n, samples, config_path, **opts):
    """Normalized pair-collision counts against the exponential limit."""
    _run("erdos-taylor", config_path, dict(n=n, samples=samples, **opts))


@main.command("gaussian-limit")
@click.option("--n", type=int, required=True)
@click.option("--beta-hat", type=float, required=True)
@click.option("--samples", type=int, required=True)
@_common
def gaussian_limit(n, beta_hat, samples, config_path, **opts):
    """Partition-function samples over environments (W, log W)."""
    _run("gaussian-limit", config_path,
         dict(n=n, beta_hat=beta_hat, samples=samples, **opts))


@main.command("chaos-oracle")
@click.option("--t", type=int, required=True)
@click.option("--beta-hat", type=float, required=True)
@click.option("--n", type=int, required=True)
@_common
def chaos_oracle(t, beta_hat, n, config_path, **opts):
    """Brute-force collision series against the product-form transfer."""
    _run("chaos-oracle", config_path,
         dict(t=t, beta_hat=beta_hat, n=n, **opts))


@main.command("diagrams")
@click.option("--q", type=int, required=True)
@click.option("--m", type=int, required=True)
@click.option("--l", type=int, required=True)
@click.option("--check",
              type=click.Choice(["lemmas", "counts", "coeffs", "fibo"]),
              default="lemmas")
@click.option("--t", type=int, default=6, help="budget for --check fibo")
@click.option("--beta-hat", type=float, default=0.3)
@click.option("--n", type=int, default=10 ** 6)
@_common
def diagrams_cmd(q, m, l, check, t, beta_hat, n, config_path, **opts):
    """Diagram classification, counting and induction checks."""
    _run("diagrams", config_path,
         dict(q=q, m=m, l=l, check=check, t=t, beta_hat=beta_hat, n=n,
              **opts))


@main.command("khas")
@click.option("--mode", type=click.Choice(["mod", "thm", "cor"]),
              required=True)
@click.option("--k", type=int, required=True)
@click.option("--kappa-sq", type=float, default=None)
@_common
def khas(mode, k, kappa_sq, config_path, **opts):
    """Discrete exponential-moment bounds on a sampled instance."""
    _run("khas", config_path, dict(mode=mode, k=k, kappa_sq=kappa_sq, **opts))


@main.command("max-bound")
@click.option("--gamma", type=float, required=True)
@click.option("--beta-hat", type=float, required=True)
@_common
def max_bound(gamma, beta_hat, config_path, **opts):
    """Union-bound threshold triple for the running maximum."""
    _run("max-bound", config_path, dict(gamma=gamma, beta_hat=beta_hat,
                                        **opts))


@main.command("suite")
@click.option("--out", type=click.Path(), required=True,
              help="directory for suite outputs")
@click.option("--threads", type=int, default=1)
@click.option("--seed", type=int, default=None,
              help="accepted for interface uniformity; the suite pins "
                   "its own seeds")
def suite_cmd(out, threads, seed):
    """Run the full acceptance battery and write a summary table."""
    import os

    from . import suite as suite_mod
    from .manifest import ResultManifest, write_csv

    from . import plots

    os.makedirs(out, exist_ok=True)
    results = suite_mod.run_all(out, threads=threads, echo=click.echo)
    summary = os.path.join(out, "summary.csv")
    write_csv(summary, ["criterion", "name", "passed", "elapsed_s", "detail"],
              [(r.index, r.name, int(r.passed), r.elapsed_s, r.detail)
               for r in results],
              {"experiment": "suite", "threads": threads})
    figure_kind = {1: "kernel-table", 5: "moment-mc"}
    manifest = ResultManifest(config={"experiment": "suite",
                                      "threads": threads,
                                      "seed": suite_mod.SEED, "out": out})
    for r in results:
        manifest.add_check(f"criterion_{r.index}", r.passed, r.detail)
        if r.rows:
            path = os.path.join(out, f"criterion_{r.index}.csv")
            write_csv(path, r.columns, r.rows,
                      {"criterion": r.index, "name": r.name})
            manifest.register(path)
            kind = figure_kind.get(r.index)
            if kind:
                png = path.rsplit(".", 1)[0] + ".png"
                if plots.render(kind, r.columns, r.rows, png):
                    manifest.register(png)
    manifest.register(summary)
    manifest.write(os.path.join(out, "suite.manifest.json"))
    if not all(r.passed for r in results):
        sys.exit(EXIT_CHECK_FAILED)


if __name__ == "__main__":
    main()
