"""Command-line runner: config/preset expansion, run orchestration and outputs."""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import shutil
import sys
from pathlib import Path

from .config import CaseConfig, ConfigError, list_presets, parse_config
from .integrator import BlowUpError, run_to_steady
from .postprocess import export_fields, export_psi

log = logging.getLogger("qmhd")

EXIT_CONVERGED = 0
EXIT_NOT_CONVERGED = 2
EXIT_BLOWUP = 3
EXIT_CONFIG = 4
EXIT_IO = 5

OUTPUT_FILES = ("fields.tsv", "psi.tsv", "history.tsv", "summary.json")


class OutputError(OSError):
    pass


def prepare_output(path, overwrite: bool = False) -> Path:
    """Create the output directory, refusing to reuse a non-empty one without ``overwrite``."""
    out = Path(path)
    if out.exists():
        if not out.is_dir():
            raise OutputError(f"output path {out} exists and is not a directory")
        if any(out.iterdir()):
            if not overwrite:
                raise OutputError(f"output directory {out} already exists (use --overwrite)")
            for name in OUTPUT_FILES:
                target = out / name
                if target.is_dir():
                    shutil.rmtree(target)
                elif target.exists():
                    target.unlink()
    else:
        try:
            out.mkdir(parents=True)
        except OSError as exc:
            raise OutputError(f"cannot create output directory {out}: {exc}") from exc
    probe = out / ".write-test"
    try:
        probe.write_text("", encoding="utf-8")
        probe.unlink()
    except OSError as exc:
        raise OutputError(f"output directory {out} is not writable: {exc}") from exc
    return out


def set_threads(n: int | None) -> int:
    """Cap numba's worker pool; ``None`` keeps the default (all available)."""
    import numba

    limit = numba.config.NUMBA_NUM_THREADS
    if n is None:
        env = os.environ.get("QMHD_THREADS")
        n = int(env) if env else limit
    n = max(1, min(int(n), limit))
    numba.set_num_threads(n)
    return n


def write_history(path: Path, history) -> None:
    lines = ["# step\tresidual\tpsi_min"]
    lines += [f"{s}\t{r:.17g}\t{p:.17g}" for s, r, p in history]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def summarize(config: CaseConfig, result) -> dict:
    ref = config.reference
    psi_min = result.psi_min
    summary = {
        "preset": config.preset,
        "geometry": config.geometry.value,
        "grid": [config.n1, config.n2],
        "ha": config.params.ha,
        "field_variant": config.field_variant.value,
        "converged": bool(result.converged),
        "steps": int(result.steps),
        "residual": float(result.residual),
        "psi_min": psi_min,
        "psi_min_location": list(result.psi.location) if result.psi is not None else None,
        "vortex_count": result.psi.vortex_count if result.psi is not None else None,
        "wall_time_s": round(result.wall_time, 3),
        "poisson_failures": int(result.poisson_failures),
    }
    if ref is not None:
        summary["psi_min_reference"] = ref.psi_min_ref
        summary["psi_min_rel_deviation"] = abs(psi_min - ref.psi_min_ref) / abs(ref.psi_min_ref)
        summary["steps_reference"] = ref.steps_ref
    return summary


def run_case(config: CaseConfig, overwrite: bool = False) -> int:
    """Run one case to steady state and write its outputs; returns the exit code."""
    if config.output_dir is None:
        log.error("no output directory given (set output_dir or pass --output)")
        return EXIT_CONFIG
    try:
        out = prepare_output(config.output_dir, overwrite)
    except OutputError as exc:
        log.error("%s", exc)
        return EXIT_IO
    set_threads(config.threads)

    def progress(step, residual, psi_min):
        log.info("step %d  residual %.4e  psi_min %.6g", step, residual, psi_min)

    try:
        result = run_to_steady(config, progress=progress)
    except BlowUpError as exc:
        log.error("blow-up: %s", exc)
        try:
            (out / "summary.json").write_text(json.dumps(
                {"converged": False, "blow_up": str(exc), "step": exc.step}, indent=2) + "\n",
                encoding="utf-8")
        except OSError:
            pass
        return EXIT_BLOWUP

    summary = summarize(config, result)
    try:
        export_fields(result.state, result.psi, out / "fields.tsv", config)
        export_psi(result.psi, out / "psi.tsv", config)
        write_history(out / "history.tsv", result.history)
        (out / "summary.json").write_text(json.dumps(summary, indent=2, allow_nan=True) + "\n",
                                          encoding="utf-8")
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_IO

    dev = summary.get("psi_min_rel_deviation")
    log.info("%s after %d steps, psi_min %.6g%s",
             "converged" if result.converged else "NOT converged", result.steps, result.psi_min,
             "" if dev is None or math.isnan(dev) else f" ({100 * dev:.2f}% from reference)")
    return EXIT_CONVERGED if result.converged else EXIT_NOT_CONVERGED


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qmhd", description="Quasi-MHD thermocapillary convection runs.")
    ap.add_argument("--config", metavar="PATH", help="key = value configuration file")
    ap.add_argument("--preset", metavar="NAME", help="named benchmark case (see --list-presets)")
    ap.add_argument("--output", metavar="DIR", help="output directory")
    ap.add_argument("--max-steps", type=int, metavar="N")
    ap.add_argument("--snapshot-every", type=int, metavar="N")
    ap.add_argument("--threads", type=int, metavar="N", help="worker threads (default: $QMHD_THREADS or all)")
    ap.add_argument("--overwrite", action="store_true", help="reuse an existing output directory")
    ap.add_argument("--list-presets", action="store_true", help="print the preset table and exit")
    ap.add_argument("-q", "--quiet", action="store_true", help="only report errors")
    return ap


def format_presets() -> str:
    rows = [f"{'name':<20} {'geometry':<12} {'grid':>8} {'Ha':>5} {'variant':>7} {'psi_min':>9} {'steps':>8}"]
    for p in list_presets():
        rows.append(f"{p.name:<20} {p.geometry.value:<12} {f'{p.n1}x{p.n2}':>8} {p.ha:>5g} "
                    f"{p.variant.value:>7} {p.psi_min_ref:>9g} {p.steps_ref:>8d}")
    return "\n".join(rows)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    if args.list_presets:
        print(format_presets())
        return 0

    text = ""
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            log.error("cannot read config %s: %s", args.config, exc)
            return EXIT_IO
    overrides = {
        "preset": args.preset,
        "output_dir": args.output,
        "max_steps": args.max_steps,
        "snapshot_every": args.snapshot_every,
        "threads": args.threads,
    }
    try:
        config = parse_config(text, overrides)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    return run_case(config, overwrite=args.overwrite)


if __name__ == "__main__":
    sys.exit(main())
