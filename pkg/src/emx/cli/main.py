"""``emx`` command-line front end.

Exit codes: 0 ok, 1 failed reproduction criterion, 2 config error,
3 physics-domain or fit error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from emx import __version__, config, io
from emx.errors import ConfigError, DomainError, FitRejectedError, RankDeficiencyError

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_DOMAIN, EXIT_IO = 0, 1, 2, 3, 4

KINDS = ("spectrum", "ringdown", "area_vs_T", "area_vs_V", "snr_vs_V", "antispring")


def make_report(command: str, outputs: dict, inputs_hash: str | None = None, **extra) -> dict:
    """The single record both renderings are derived from."""
    rec = {"command": command, "emx_version": __version__, "inputs_hash": inputs_hash}
    rec.update(extra)
    rec["outputs"] = outputs
    return rec


def _fmt(v) -> str:
    if isinstance(v, bool) or v is None:
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.6g}"
    if isinstance(v, str):
        return v
    if isinstance(v, (list, tuple, np.ndarray)):
        if len(v) <= 8 and all(not isinstance(x, (dict, list)) for x in v):
            return "[" + ", ".join(_fmt(x) for x in v) + "]"
        return f"[{len(v)} values]"
    return str(v)


def _text_lines(obj, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    for k, v in obj.items():
        if isinstance(v, dict) and {"value", "stderr", "unit"} <= set(v):
            lim = f" ({v['limit']} limit)" if v.get("limit") else ""
            flags = f" [{', '.join(v['flags'])}]" if v.get("flags") else ""
            lines.append(f"{pad}{k}: {_fmt(v['value'])} +/- {_fmt(v['stderr'])} {v['unit']}{lim}{flags}")
        elif isinstance(v, dict):
            lines.append(f"{pad}{k}:")
            lines += _text_lines(v, indent + 1)
        else:
            lines.append(f"{pad}{k}: {_fmt(v)}")
    return lines


def render_text(report: dict) -> str:
    if report["command"] == "reproduce-paper":
        return render_reproduction(report)
    head = [f"emx {report['command']}"]
    if report.get("inputs_hash"):
        head.append(f"inputs sha256: {report['inputs_hash']}")
    body = {k: v for k, v in report.items() if k not in ("command", "emx_version", "inputs_hash")}
    return "\n".join(head + _text_lines(body)) + "\n"


def render_reproduction(report: dict) -> str:
    lines = [f"{'crit':>4}  {'result':6}  {'computed':>12}  {'target':>12}  {'tolerance':<10}  name"]
    for r in report["outputs"]["rows"]:
        lines.append(f"{r['criterion']:>4}  {'PASS' if r['passed'] else 'FAIL':6}  {r['computed']:>12.5g}  "
                     f"{r['target']:>12.5g}  {r['tolerance']:<10}  {r['name']}")
    o = report["outputs"]
    lines.append(f"{o['n_passed']}/{o['n_rows']} rows passed")
    if o["failed"]:
        lines.append("failing rows: " + "; ".join(o["failed"]))
    return "\n".join(lines) + "\n"


def _emit(report: dict, args) -> None:
    """JSON to ``--out`` (or stdout with ``--format json``); text otherwise."""
    if args.out:
        Path(args.out).write_text(io.dumps(report))
        sys.stdout.write(render_text(report))
    elif args.format == "json":
        sys.stdout.write(io.dumps(report))
    else:
        sys.stdout.write(render_text(report))


def _write_csv(path: Path, header: list[str], rows) -> None:
    with path.open("w") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(repr(float(v)) for v in r) + "\n")


def cmd_predict(args) -> int:
    from emx.workflows import predict

    cfg = config.load(args.config)
    out = predict(cfg)
    spectrum = out.pop("spectrum")
    if args.format in ("csv", "svg"):
        if not args.out:
            raise ConfigError("--out", f"--format {args.format} needs an output path")
        path = Path(args.out)
        if args.format == "csv":
            _write_csv(path, ["frequency_hz", "psd_v2_per_hz"], zip(spectrum["frequency_hz"], spectrum["psd_v2_per_hz"]))
        else:
            from emx.plots import line_plot

            line_plot(spectrum["frequency_hz"], {"sideband": spectrum["psd_v2_per_hz"]}, path,
                      xlabel="frequency (Hz)", ylabel="PSD (V$^2$/Hz)", logy=True)
        sys.stdout.write(render_text(make_report("predict", out, cfg.inputs_hash())))
        return EXIT_OK
    out["spectrum"] = spectrum
    _emit(make_report("predict", out, cfg.inputs_hash()), args)
    return EXIT_OK


def _synth_plot(ds, path: Path) -> None:
    from emx.plots import line_plot

    names = list(ds.columns)
    x = ds.columns[names[0]]
    if ds.kind == "area_vs_V":
        temps = ds.columns["temperature_k"]
        series = {f"{t:g} K": ds.y[temps == t] for t in np.unique(temps)}
        x = x[temps == np.unique(temps)[0]]
    else:
        series = {names[-2]: ds.y}
    line_plot(x, series, path, xlabel=names[0], ylabel=names[-2],
              logy=ds.kind in ("spectrum", "snr_vs_V"))


def cmd_synth(args) -> int:
    from emx.workflows import synthesize

    if not args.out:
        raise ConfigError("--out", "synth needs an output path")
    cfg = config.load(args.config)
    ds = synthesize(cfg, args.kind, args.seed)
    path = Path(args.out)
    csv_path, side = io.write_dataset(ds, path)
    files = [str(csv_path), str(side)]
    if args.format == "svg":
        svg = path.with_suffix(".svg")
        _synth_plot(ds, svg)
        files.append(str(svg))
    rep = make_report("synth", {"kind": ds.kind, "rows": len(ds), "files": files}, cfg.inputs_hash(),
                      seed=args.seed)
    sys.stdout.write(render_text(rep))
    return EXIT_OK


def _config_for_dataset(args, ds) -> config.Config | None:
    if args.config:
        return config.load(args.config)
    doc = ds.true_params.get("device") if ds.true_params else None
    return config.build(doc) if doc else None


def cmd_fit(args) -> int:
    from emx.workflows import fit

    if not args.data:
        raise ConfigError("--data", "fit needs a dataset path")
    ds = io.read_dataset(args.data)
    recipe = args.recipe or ds.kind
    cfg = _config_for_dataset(args, ds)
    out = fit(cfg, ds, recipe)
    _emit(make_report("fit", out, cfg.inputs_hash() if cfg else None, dataset=str(args.data)), args)
    return EXIT_OK


def cmd_sweep(args) -> int:
    from emx.design import SweepSpec, constraints_from_config, sweep

    cfg = config.load(args.config)
    if cfg.sweep is None:
        raise ConfigError("sweep", "required field missing")
    spec = SweepSpec.from_config(cfg.sweep)
    table = sweep(spec, constraints_from_config(cfg.sweep.get("constraints")))
    summary = {"points": spec.size, "n_rows": len(table), "dropped": table.dropped, "columns": table.columns}
    if args.format == "json":
        out = dict(summary, rows=table.rows())
        _emit(make_report("sweep", out, cfg.inputs_hash()), args)
        return EXIT_OK
    if not args.out:
        _write_csv_stream(table)
        return EXIT_OK
    path = Path(args.out)
    csv_path = path.with_suffix(".csv") if args.format == "svg" else path
    _write_csv(csv_path, table.columns, table.data)
    files = [str(csv_path)]
    if args.format == "svg":
        files.append(str(_sweep_plot(spec, table, path.with_suffix(".svg"))))
    sys.stdout.write(render_text(make_report("sweep", dict(summary, files=files), cfg.inputs_hash())))
    return EXIT_OK


def _write_csv_stream(table) -> None:
    sys.stdout.write(",".join(table.columns) + "\n")
    for r in table.data:
        sys.stdout.write(",".join(repr(float(v)) for v in r) + "\n")


def _sweep_plot(spec, table, path: Path) -> Path:
    from emx.plots import heatmap, line_plot

    obj = spec.objectives[0]
    axes = spec.axes
    if len(axes) == 2 and len(table) == spec.size:
        z = table.column(obj).reshape(axes[0].count, axes[1].count)
        return heatmap(axes[0].values(), axes[1].values(), z, path, xlabel=axes[0].name, ylabel=axes[1].name,
                       zlabel=obj, logx=axes[0].scale == "log", logy=axes[1].scale == "log")
    x = table.column(axes[0].name)
    return line_plot(x, {obj: table.column(obj)}, path, xlabel=axes[0].name, ylabel=obj,
                     logx=axes[0].scale == "log")


def cmd_reproduce(args) -> int:
    from emx.reproduce import as_dicts, run_all

    rows = as_dicts(run_all())
    failed = [f"[{r['criterion']}] {r['name']}" for r in rows if not r["passed"]]
    hashes = {n: config.build(config.bundled(n)).inputs_hash() for n in config.bundled_names()}
    out = {"rows": rows, "n_rows": len(rows), "n_passed": len(rows) - len(failed), "failed": failed}
    _emit(make_report("reproduce-paper", out, None, bundled_inputs=hashes), args)
    if failed:
        sys.stderr.write("failing rows:\n" + "\n".join(failed) + "\n")
        return EXIT_FAILED
    return EXIT_OK


COMMANDS = {"predict": cmd_predict, "synth": cmd_synth, "fit": cmd_fit, "sweep": cmd_sweep,
            "reproduce-paper": cmd_reproduce}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="emx", description="Electromechanical rf-to-microwave transducer toolkit.")
    p.add_argument("--version", action="version", version=f"emx {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt_choices, fmt_default, need_config=True):
        sp.add_argument("--config", required=need_config,
                        help="config JSON path, or a bundled name (" + ", ".join(config.bundled_names()) + ")")
        sp.add_argument("--out", help="output path")
        sp.add_argument("--format", choices=fmt_choices, default=fmt_default)
        sp.add_argument("--seed", type=int, default=0)

    common(sub.add_parser("predict", help="model outputs at one operating point"), ("text", "json", "csv", "svg"), "text")
    sp = sub.add_parser("synth", help="generate a synthetic dataset")
    common(sp, ("csv", "svg"), "csv")
    sp.add_argument("--kind", choices=KINDS, required=True)
    sp = sub.add_parser("fit", help="fit a dataset with an extraction recipe")
    common(sp, ("text", "json"), "text", need_config=False)
    sp.add_argument("--data", required=True, help="dataset CSV (sidecar read if present)")
    sp.add_argument("--recipe", help="recipe name; defaults to the dataset kind")
    common(sub.add_parser("sweep", help="design-space sweep"), ("csv", "json", "svg"), "csv")
    common(sub.add_parser("reproduce-paper", help="check published figures of merit"), ("text", "json"), "text",
           need_config=False)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        sys.stderr.write(f"emx: config error at {exc}\n")
        return EXIT_CONFIG
    except DomainError as exc:
        sys.stderr.write(f"emx: domain error in {exc.operation}: {exc}\n")
        return EXIT_DOMAIN
    except (FitRejectedError, RankDeficiencyError) as exc:
        sys.stderr.write(f"emx: fit error: {exc}\n")
        return EXIT_DOMAIN
    except OSError as exc:
        sys.stderr.write(f"emx: I/O error: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
