"""Command-line front end for calibration, analysis, statistics, and synthesis.

Subcommands: calibrate, analyze, stats, synth, surface. Data goes to stdout
(and to files under --out); diagnostics go to stderr. Outputs are
deterministic: stable key order, floats at 6 significant digits, and no
timestamps, so identical inputs give byte-identical results.

Exit codes:
    0  success
    2  usage error (bad arguments)
    3  file I/O error
    4  input parse error (CSV rows, scenario/config files)
    5  calibration failure (too few step peaks)
    6  data validation error (too short, too sparse, units, values)
    7  statistics input error (length mismatch, too few pairs)
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .agreement import AgreementReport, AgreementThresholds, PairedSeries, compare
from .calibration import CalibrationProfile, calibrate_recording
from .errors import CalibrationError, DataError, ParseError, StatsError
from .ingest import IngestConfig, SubjectProfile, parse_recording, resample_uniform
from .pipeline import analyze_recording
from .spectral import fft_magnitude, select_step_frequency
from .step_length import DEFAULT_MODEL
from .synthgen import GaitScenario, generate

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_PARSE = 4
EXIT_CALIBRATION = 5
EXIT_DATA = 6
EXIT_STATS = 7

DEFAULTS = {
    "units": "g",
    "time_unit": "s",
    "time_col": "t",
    "x_col": "x",
    "y_col": "y",
    "z_col": "z",
    "window_s": 5.0,
    "band_lo": 0.3,
    "band_hi": 4.6,
    "ratio": 0.6,
    "target_hz": None,
    "min_step_separation_s": 0.4,
    "prominence_fraction": 0.25,
    "pb_min_pairs": 10,
    "slope_lo": 0.9,
    "slope_hi": 1.1,
    "intercept_max_pct": 2.0,
    "ccc_strong": 0.95,
    "ccc_acceptable": 0.90,
}


# --- deterministic serialization -------------------------------------------

def _sig6(x: float) -> float:
    return float(f"{x:.6g}")


def _jsonify(obj):
    """Coerce floats to 6 significant digits and numpy scalars to built-ins."""
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _sig6(float(obj))
    return obj


def _dump_json(obj) -> str:
    return json.dumps(_jsonify(obj), indent=2) + "\n"


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.6g}"


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


# --- configuration ----------------------------------------------------------

def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    try:
        if p.suffix.lower() == ".toml":
            if sys.version_info >= (3, 11):
                import tomllib
            else:
                import tomli as tomllib
            with open(p, "rb") as fh:
                return tomllib.load(fh)
        return json.loads(p.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, ValueError) as exc:
        raise ParseError(f"config file {p}: {exc}") from exc


def _effective_config(args) -> dict:
    """Resolve option values: CLI flag > config file > built-in default."""
    file_cfg = _load_config_file(getattr(args, "config", None))
    cfg = {}
    for key, default in DEFAULTS.items():
        cli_value = getattr(args, key, None)
        if cli_value is not None:
            cfg[key] = cli_value
        elif key in file_cfg:
            cfg[key] = file_cfg[key]
        else:
            cfg[key] = default
    return cfg


def _ingest_config(cfg: dict) -> IngestConfig:
    return IngestConfig(
        time_col=cfg["time_col"],
        x_col=cfg["x_col"],
        y_col=cfg["y_col"],
        z_col=cfg["z_col"],
        time_unit=cfg["time_unit"],
        units=cfg["units"],
    )


def _load_recording(path: str, cfg: dict):
    p = Path(path)
    text = p.read_text(encoding="utf-8")
    rec = parse_recording(text, _ingest_config(cfg))
    target = cfg["target_hz"]
    return resample_uniform(rec, None if target is None else float(target)), _sha256(p)


def _metadata(cfg: dict, inputs: dict[str, str], extra: dict | None = None) -> dict:
    meta = {
        "tool": "fftgait",
        "version": __version__,
        "config": {k: cfg[k] for k in sorted(cfg)},
        "inputs_sha256": inputs,
    }
    if extra:
        meta.update(extra)
    return meta


def _ensure_outdir(args) -> Path | None:
    if getattr(args, "out", None) is None:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# --- subcommands -------------------------------------------------------------

def cmd_calibrate(args) -> int:
    cfg = _effective_config(args)
    rec, digest = _load_recording(args.input, cfg)
    profile = calibrate_recording(
        rec,
        min_step_separation_s=float(cfg["min_step_separation_s"]),
        prominence_fraction=float(cfg["prominence_fraction"]),
    )
    doc = {
        "threshold": profile.threshold,
        "mu_peaks": profile.mu_peaks,
        "sigma_peaks": profile.sigma_peaks,
        "n_steps_m": profile.n_steps,
        "unit": profile.units,
        "metadata": _metadata(cfg, {"input": digest}),
    }
    payload = _dump_json(doc)
    sys.stdout.write(payload)
    out = _ensure_outdir(args)
    if out is not None:
        (out / "calibration.json").write_text(payload, encoding="utf-8")
    return EXIT_OK


def _resolve_calibration(args, cfg: dict) -> tuple[CalibrationProfile, dict[str, str]]:
    sources = [args.calibration_csv, args.calibration_json, args.threshold]
    if sum(s is not None for s in sources) != 1:
        raise DataError(
            "exactly one calibration source is required: "
            "--calibration-csv, --calibration-json, or --threshold"
        )
    if args.threshold is not None:
        return CalibrationProfile.explicit(args.threshold, cfg["units"]), {}
    if args.calibration_json is not None:
        p = Path(args.calibration_json)
        profile = CalibrationProfile.from_json(p.read_text(encoding="utf-8"))
        return profile, {"calibration": _sha256(p)}
    rec, digest = _load_recording(args.calibration_csv, cfg)
    profile = calibrate_recording(
        rec,
        min_step_separation_s=float(cfg["min_step_separation_s"]),
        prominence_fraction=float(cfg["prominence_fraction"]),
    )
    return profile, {"calibration": digest}


def cmd_analyze(args) -> int:
    cfg = _effective_config(args)
    profile, cal_inputs = _resolve_calibration(args, cfg)
    rec, digest = _load_recording(args.input, cfg)
    subject = SubjectProfile(height_m=args.height_m, dmd=args.dmd)
    band = (float(cfg["band_lo"]), float(cfg["band_hi"]))
    metrics, summary = analyze_recording(
        rec,
        profile,
        subject,
        window_s=float(cfg["window_s"]),
        band=band,
        ratio=float(cfg["ratio"]),
    )

    meta = _metadata(
        cfg,
        {"input": digest, **cal_inputs},
        extra={
            "subject": {"height_m": subject.height_m, "dmd": subject.dmd},
            "calibration_threshold": profile.threshold,
            "n_windows": summary.n_windows,
            "any_sf_clamped": any(m.sf_clamped for m in metrics),
            "any_sl_floored": any(m.sl_floored for m in metrics),
        },
    )
    doc = {"summary": summary.to_dict(), "metadata": meta}
    payload = _dump_json(doc)
    sys.stdout.write(payload)

    out = _ensure_outdir(args)
    if out is not None:
        (out / "summary.json").write_text(payload, encoding="utf-8")
        header = [
            "index",
            "t_start",
            "active_s",
            "step_frequency_hz",
            "steps",
            "step_length_m",
            "distance_m",
            "velocity_mps",
        ]
        lines = [",".join(header)]
        for m in metrics:
            lines.append(
                ",".join(
                    [
                        str(m.index),
                        _fmt(m.t_start),
                        str(m.active_s),
                        _fmt(m.step_frequency_hz),
                        _fmt(m.steps),
                        _fmt(m.step_length_m),
                        _fmt(m.distance_m),
                        _fmt(m.velocity_mps),
                    ]
                )
            )
        (out / "windows.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        (out / "windows.json").write_text(
            _dump_json({"windows": [m.to_dict() for m in metrics]}), encoding="utf-8"
        )
        if args.dump_spectra:
            from .pipeline import split_windows

            dumps = []
            for w in split_windows(rec, window_s=float(cfg["window_s"])):
                spectrum = fft_magnitude(w.samples, w.sample_rate_hz)
                decision = select_step_frequency(spectrum, band=band, ratio=float(cfg["ratio"]))
                dumps.append(
                    {
                        "index": w.index,
                        "t_start": w.t_start,
                        "decision": decision.to_dict(),
                        "spectrum": spectrum.to_dict(),
                    }
                )
            (out / "spectra.json").write_text(_dump_json({"windows": dumps}), encoding="utf-8")
    return EXIT_OK


def _read_series_csv(path: str, column: str | None) -> np.ndarray:
    """Read one numeric column; a non-numeric first line is taken as a header."""
    p = Path(path)
    lines = [ln.strip() for ln in p.read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines:
        raise ParseError(f"{p}: empty file")
    fields = [f.strip() for f in lines[0].split(",")]
    col_idx = 0
    start = 0
    try:
        float(fields[0])
    except ValueError:
        if column is not None and column in fields:
            col_idx = fields.index(column)
        elif len(fields) > 1:
            raise ParseError(f"{p}: column {column!r} not found in header")
        start = 1
    else:
        if len(fields) > 1 and column is not None:
            raise ParseError(
                f"{p}: multi-column file needs a header row naming {column!r}"
            )
    values = []
    for row_no, ln in enumerate(lines[start:], start=start + 1):
        parts = ln.split(",")
        try:
            values.append(float(parts[col_idx]))
        except (ValueError, IndexError) as exc:
            raise ParseError(f"{p}: malformed row {row_no}: {exc}") from exc
    return np.asarray(values)


def _report_table(report: AgreementReport) -> str:
    pb, ba = report.pb, report.ba
    lines = [
        f"Metric: {report.label or '(unnamed)'}"
        + (f" [{report.units}]" if report.units else ""),
        f"  N pairs                          {report.n}",
        "  PB Regression",
        f"    Slope (95% CI)                 {_fmt(pb.slope)} "
        f"({_fmt(pb.slope_ci95[0])}, {_fmt(pb.slope_ci95[1])})",
        f"    Intercept (95% CI)             {_fmt(pb.intercept)} "
        f"({_fmt(pb.intercept_ci95[0])}, {_fmt(pb.intercept_ci95[1])})",
        "  BA Plot Analysis",
        f"    Mean % Difference (95% CI)     {_fmt(ba.mean_pct_diff)} "
        f"({_fmt(ba.ci95_lo)}, {_fmt(ba.ci95_hi)})",
        f"    Limits of Agreement (%)        {_fmt(ba.loa_lo)}, {_fmt(ba.loa_hi)}",
        f"  Lin's Concordance Correlation    {_fmt(report.ccc)}",
        f"  MdAE [IQR]                       {_fmt(report.mdae.median)} "
        f"[{_fmt(report.mdae.q1)}-{_fmt(report.mdae.q3)}]",
        f"  MdAPE % [IQR]                    {_fmt(report.mdape.median)} "
        f"[{_fmt(report.mdape.q1)}-{_fmt(report.mdape.q3)}]",
        "  Flags",
    ]
    for name in sorted(report.flags):
        lines.append(f"    {name:<31}{report.flags[name]}")
    return "\n".join(lines) + "\n"


def cmd_stats(args) -> int:
    cfg = _effective_config(args)
    inputs: dict[str, str] = {}
    if args.paired is not None:
        est = _read_series_csv(args.paired, args.est_col)
        ref = _read_series_csv(args.paired, args.ref_col)
        inputs["paired"] = _sha256(Path(args.paired))
    else:
        if args.est is None or args.ref is None:
            raise DataError("provide either a paired CSV or both --est and --ref files")
        est = _read_series_csv(args.est, args.est_col)
        ref = _read_series_csv(args.ref, args.ref_col)
        inputs["est"] = _sha256(Path(args.est))
        inputs["ref"] = _sha256(Path(args.ref))

    series = PairedSeries(est=est, ref=ref, label=args.label, units=args.series_units or "")
    thresholds = AgreementThresholds(
        slope_range=(float(cfg["slope_lo"]), float(cfg["slope_hi"])),
        intercept_max_pct_of_ref=float(cfg["intercept_max_pct"]),
        ccc_strong=float(cfg["ccc_strong"]),
        ccc_acceptable=float(cfg["ccc_acceptable"]),
    )
    report = compare(series, thresholds=thresholds, min_pairs_pb=int(cfg["pb_min_pairs"]))

    doc = {"report": report.to_dict(), "metadata": _metadata(cfg, inputs)}
    if args.json:
        sys.stdout.write(_dump_json(doc))
    else:
        sys.stdout.write(_report_table(report))
    out = _ensure_outdir(args)
    if out is not None:
        (out / "report.json").write_text(_dump_json(doc), encoding="utf-8")
    return EXIT_OK


def cmd_synth(args) -> int:
    cfg = _effective_config(args)
    scenario_path = Path(args.scenario)
    scenario = GaitScenario.from_file(scenario_path)
    recording, truth = generate(scenario, window_s=float(cfg["window_s"]))

    out = _ensure_outdir(args) or Path(".")
    rec_path = out / "recording.csv"
    truth_path = out / "ground_truth.json"
    lines = ["t,x,y,z"]
    for k in range(len(recording)):
        lines.append(
            ",".join(
                [
                    _fmt(recording.t[k]),
                    _fmt(recording.x[k]),
                    _fmt(recording.y[k]),
                    _fmt(recording.z[k]),
                ]
            )
        )
    rec_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    truth_doc = {
        "ground_truth": truth.to_dict(),
        "scenario": scenario.to_dict(),
        "metadata": _metadata(cfg, {"scenario": _sha256(scenario_path)}),
    }
    truth_path.write_text(_dump_json(truth_doc), encoding="utf-8")
    sys.stdout.write(
        _dump_json(
            {
                "recording_csv": str(rec_path),
                "ground_truth_json": str(truth_path),
                "n_samples": len(recording),
                "total_steps": truth.total_steps,
            }
        )
    )
    return EXIT_OK


def cmd_surface(args) -> int:
    grid = DEFAULT_MODEL.surface_grid(
        sf_range=(args.sf_min, args.sf_max),
        h_range=(args.h_min, args.h_max),
        n=args.n,
        dmd=args.dmd,
    )
    lines = ["sf,h,dmd,step_length_m"]
    for sf, h, sl in grid:
        lines.append(f"{_fmt(sf)},{_fmt(h)},{int(args.dmd)},{_fmt(sl)}")
    payload = "\n".join(lines) + "\n"
    out = _ensure_outdir(args)
    if out is not None:
        (out / "surface.csv").write_text(payload, encoding="utf-8")
    sys.stdout.write(payload)
    return EXIT_OK


# --- parser -------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML or JSON config file (flags override it)")
    p.add_argument("--units", choices=["g", "ms2"], default=None, help="signal units tag")
    p.add_argument("--out", help="directory for output files")


def _add_ingest_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--time-unit", dest="time_unit", choices=["s", "ms"], default=None)
    p.add_argument("--time-col", dest="time_col", default=None)
    p.add_argument("--x-col", dest="x_col", default=None)
    p.add_argument("--y-col", dest="y_col", default=None)
    p.add_argument("--z-col", dest="z_col", default=None)
    p.add_argument(
        "--target-hz",
        dest="target_hz",
        type=float,
        default=None,
        help="resampling rate (default: inferred from median spacing)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fftgait",
        description="Frequency-domain gait analysis from waist-worn accelerometer CSVs",
    )
    parser.add_argument("--version", action="version", version=f"fftgait {__version__}")
    sub = parser.add_subparsers(dest="command")

    p_cal = sub.add_parser("calibrate", help="derive the activity threshold from a slow walk")
    p_cal.add_argument("input", help="CSV of the slowest-walk calibration recording")
    _add_common(p_cal)
    _add_ingest_flags(p_cal)
    p_cal.add_argument(
        "--min-step-separation-s", dest="min_step_separation_s", type=float, default=None
    )
    p_cal.add_argument(
        "--prominence-fraction", dest="prominence_fraction", type=float, default=None
    )
    p_cal.set_defaults(func=cmd_calibrate)

    p_an = sub.add_parser("analyze", help="per-window gait metrics and summary")
    p_an.add_argument("input", help="CSV of the recording to analyze")
    _add_common(p_an)
    _add_ingest_flags(p_an)
    p_an.add_argument("--height-m", dest="height_m", type=float, required=True)
    p_an.add_argument("--dmd", action="store_true", help="subject has a DMD diagnosis")
    p_an.add_argument("--calibration-csv", help="slow-walk CSV to calibrate from")
    p_an.add_argument("--calibration-json", help="previously saved calibration profile")
    p_an.add_argument("--threshold", type=float, help="explicit activity threshold")
    p_an.add_argument("--window-s", dest="window_s", type=float, default=None)
    p_an.add_argument("--band-lo", dest="band_lo", type=float, default=None)
    p_an.add_argument("--band-hi", dest="band_hi", type=float, default=None)
    p_an.add_argument("--ratio", dest="ratio", type=float, default=None)
    p_an.add_argument(
        "--min-step-separation-s", dest="min_step_separation_s", type=float, default=None
    )
    p_an.add_argument(
        "--prominence-fraction", dest="prominence_fraction", type=float, default=None
    )
    p_an.add_argument("--dump-spectra", action="store_true")
    p_an.set_defaults(func=cmd_analyze)

    p_st = sub.add_parser("stats", help="agreement statistics for estimate vs reference")
    p_st.add_argument("--paired", help="CSV holding both est and ref columns")
    p_st.add_argument("--est", help="CSV with estimate values")
    p_st.add_argument("--ref", help="CSV with reference (ground truth) values")
    p_st.add_argument("--est-col", dest="est_col", default="est")
    p_st.add_argument("--ref-col", dest="ref_col", default="ref")
    p_st.add_argument("--label", default="")
    p_st.add_argument("--series-units", dest="series_units", default="")
    p_st.add_argument("--json", action="store_true", help="emit JSON instead of the table")
    p_st.add_argument("--pb-min-pairs", dest="pb_min_pairs", type=int, default=None)
    p_st.add_argument("--slope-lo", dest="slope_lo", type=float, default=None)
    p_st.add_argument("--slope-hi", dest="slope_hi", type=float, default=None)
    p_st.add_argument("--intercept-max-pct", dest="intercept_max_pct", type=float, default=None)
    p_st.add_argument("--ccc-strong", dest="ccc_strong", type=float, default=None)
    p_st.add_argument("--ccc-acceptable", dest="ccc_acceptable", type=float, default=None)
    _add_common(p_st)
    p_st.set_defaults(func=cmd_stats)

    p_sy = sub.add_parser("synth", help="render a scenario file into CSV plus ground truth")
    p_sy.add_argument("scenario", help="scenario file (.json or .toml)")
    p_sy.add_argument("--window-s", dest="window_s", type=float, default=None)
    _add_common(p_sy)
    p_sy.set_defaults(func=cmd_synth)

    p_su = sub.add_parser("surface", help="step-length prediction grid as CSV")
    p_su.add_argument("--sf-min", type=float, default=0.3)
    p_su.add_argument("--sf-max", type=float, default=4.6)
    p_su.add_argument("--h-min", type=float, default=0.9)
    p_su.add_argument("--h-max", type=float, default=1.8)
    p_su.add_argument("-n", type=int, default=25, help="grid points per axis")
    p_su.add_argument("--dmd", action="store_true")
    _add_common(p_su)
    p_su.set_defaults(func=cmd_surface)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "func", None) is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CalibrationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    except StatsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STATS
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
