"""Command-line front end.

Examples
--------
    stocheuler run --problem sod --elements 4096 --mu 1 --t-final 0.15
    stocheuler convergence --problem sod --degree 0 --resolutions 64,128,256,512 \\
        --reference 4096 --samples 100 --dt 1e-5 --t-final 0.15 --mu 1
    stocheuler table --per-sample output/sod_p0_samples.csv

Exit codes: 0 success, 2 configuration error, 3 every sample stopped (or
nothing to tabulate), 4 file output error.
"""

from __future__ import annotations

import logging
import sys
from pathlib import Path

from .config import ConfigError, RunConfig, parse_config
from .experiments import convergence_study, initial_condition
from .io import OutputError, emit_per_sample, emit_snapshot, emit_table, read_per_sample, report_from_samples
from .stochastic import SampleConfig, evolve_sample

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STOPPED = 3
EXIT_IO = 4

log = logging.getLogger("stocheuler")


def _metadata(cfg: RunConfig) -> dict:
    meta = {"config_hash": cfg.hash(), "base_seed": cfg.base_seed}
    for key, value in cfg.items():
        if value is not None:
            meta["config." + key] = ",".join(map(str, value)) if isinstance(value, tuple) else value
    return meta


def _stem(cfg: RunConfig) -> str:
    return f"{cfg.problem}_p{cfg.degree}"


def run_sample(cfg: RunConfig) -> int:
    spec = cfg.problem_spec()
    out = Path(cfg.output_dir)
    meta = _metadata(cfg)
    stem = f"{_stem(cfg)}_n{spec.elements}_s{cfg.sample}"
    initial = initial_condition(spec, spec.mesh(), spec.degree)

    def snapshot(field, t):
        step = int(round(t / spec.dt))
        emit_snapshot(field, t, out / f"{stem}_step{step:07d}.csv", meta)

    config = SampleConfig(scheme=cfg.scheme(), floors=cfg.floors(), sample_index=cfg.sample,
                          snapshot_stride=cfg.snapshot_stride,
                          on_snapshot=snapshot if cfg.snapshot_stride > 0 else None)
    field, record, ledger = evolve_sample(initial, spec.t_final, spec.dt, spec.noise, config)
    try:
        out.mkdir(parents=True, exist_ok=True)
        ledger.to_csv(out / f"{stem}_ledger.csv")
    except OSError as exc:
        raise OutputError(f"cannot write {out / (stem + '_ledger.csv')}: {exc}") from exc
    final_time = record.time if record else spec.t_final
    emit_snapshot(field, final_time, out / f"{stem}_final.csv",
                  {**meta, "stopped": record.reason if record else "no"})
    if record is not None:
        log.warning("sample stopped at t=%g (%s) at element %d node %d", record.time,
                    record.reason, *record.location)
        return EXIT_STOPPED
    log.info("finished %d steps, wrote %s", ledger.n_steps, out)
    return EXIT_OK


def run_convergence(cfg: RunConfig) -> int:
    spec = cfg.problem_spec()
    report = convergence_study(spec, cfg.resolutions, cfg.degree, cfg.samples, cfg.reference,
                               cfg.scheme(), cfg.floors(), normalize=cfg.normalize,
                               progress=lambda s: log.info("sample %d done", s))
    out = Path(cfg.output_dir)
    meta = _metadata(cfg)
    emit_per_sample(report, out / f"{_stem(cfg)}_samples.csv", meta)
    table, full = emit_table(report, out / f"{_stem(cfg)}_table.csv", meta)
    log.info("wrote %s and %s", table, full)
    return EXIT_STOPPED if report.is_empty else EXIT_OK


def run_table(cfg: RunConfig) -> int:
    meta, rows = read_per_sample(cfg.per_sample)
    report = report_from_samples(meta, rows)
    src = Path(cfg.per_sample)
    name = src.stem[:-len("_samples")] if src.stem.endswith("_samples") else src.stem
    emit_table(report, Path(cfg.output_dir) / f"{name}_table.csv",
               {k: v for k, v in meta.items() if k not in ("problem", "degree", "reference", "samples")})
    return EXIT_STOPPED if report.is_empty else EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"stocheuler: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"stocheuler: cannot read config file: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    handlers = {"run": run_sample, "convergence": run_convergence, "table": run_table}
    try:
        return handlers[cfg.mode](cfg)
    except OSError as exc:
        print(f"stocheuler: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
