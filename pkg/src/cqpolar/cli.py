"""Command line entry point: ``cqpolar <subcommand> [options]``.

Subcommands
  sweep            run a config and write CSV plus JSON sidecar
  dump-povm        write projectors and POVM elements as JSON
  dump-transition  write P(y|u) as JSON (noisy when the config asks for it)
  optimize-point   capacity and optimal input at one signal level
  selftest         reference-matrix and circuit/POVM consistency checks

``--subcommand NAME`` is accepted in place of the positional name.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .experiments import (
    ConfigError,
    ExperimentConfig,
    channel_for,
    evaluate_point,
    run_sweep,
)
from .scdecoder import build_sc_povm, povm_to_json, sc_projectors, transition_to_json

__all__ = ["main", "build_parser", "selftest"]

SUBCOMMANDS = ("sweep", "dump-povm", "dump-transition", "optimize-point", "selftest")


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cqpolar", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, out_default=None):
        p.add_argument("--config", type=Path, help="JSON experiment config")
        p.add_argument("--out", type=Path, default=out_default, help="output path")
        p.add_argument("--set", action="append", default=[], metavar="FIELD=VALUE",
                       help="override a config field (value parsed as JSON when possible)")
        p.add_argument("--n-bins", type=int, help="block length N")
        p.add_argument("--error-model", choices=("none", "transducer", "gate"))
        p.add_argument("--error-p", type=_float_list, help="error probabilities, comma separated")

    p = sub.add_parser("sweep", help="run a grid and write CSV")
    common(p)
    p.add_argument("--workers", type=int, help="worker processes")
    p.add_argument("--nbar", type=_float_list, help="mean photon numbers per bin, comma separated")

    for name in ("dump-povm", "dump-transition", "optimize-point"):
        p = sub.add_parser(name)
        common(p)
        grp = p.add_mutually_exclusive_group()
        grp.add_argument("--alpha", type=float)
        grp.add_argument("--nbar", type=float)
        if name == "optimize-point":
            p.add_argument("--optimize-alpha", action="store_true",
                           help="maximize PIE over alpha starting from the config grid")

    p = sub.add_parser("selftest", help="run consistency checks")
    p.add_argument("--quick", action="store_true", help="skip the N=8 circuit check")
    return parser


def _normalize_argv(argv: Sequence[str]) -> list[str]:
    argv = list(argv)
    for k, tok in enumerate(argv):
        if tok == "--subcommand" and k + 1 < len(argv):
            name = argv[k + 1]
            return [name] + argv[:k] + argv[k + 2:]
        if tok.startswith("--subcommand="):
            return [tok.split("=", 1)[1]] + argv[:k] + argv[k + 1:]
    return argv


def _overrides(args) -> dict:
    out = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(item, "override must look like FIELD=VALUE")
        key, val = item.split("=", 1)
        out[key.strip()] = _parse_value(val)
    if getattr(args, "n_bins", None) is not None:
        out["n_bins"] = args.n_bins
    if getattr(args, "error_model", None):
        out["error_model"] = args.error_model
    if getattr(args, "error_p", None) is not None:
        out["error_p"] = args.error_p
    if getattr(args, "workers", None) is not None:
        out["workers"] = args.workers
    if getattr(args, "optimize_alpha", False):
        out["optimize_alpha"] = True
    return out


def _config(args, signal: dict | None = None) -> ExperimentConfig:
    """Config file (if any), then flag overrides, then the signal value."""
    doc: dict = {}
    if args.config is not None:
        if not args.config.exists():
            raise ConfigError("config", f"file {args.config} not found")
        try:
            doc = json.loads(args.config.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"not valid JSON ({exc})") from None
        if not isinstance(doc, dict):
            raise ConfigError("config", "top level must be a JSON object")
    doc.update(_overrides(args))
    if signal:
        doc.pop("nbar", None)
        doc.pop("alpha", None)
        doc.update(signal)
    if "nbar" not in doc and "alpha" not in doc:
        doc["nbar"] = [1e-3]
    return ExperimentConfig.from_dict(doc)


def _signal(args) -> tuple[dict | None, float | None]:
    if getattr(args, "alpha", None) is not None:
        return {"alpha": [args.alpha]}, args.alpha
    if isinstance(getattr(args, "nbar", None), float):
        return {"nbar": [args.nbar]}, float(np.sqrt(args.nbar))
    return None, None


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text if text.endswith("\n") else text + "\n")


def _cmd_sweep(args) -> int:
    signal = {"nbar": args.nbar} if args.nbar else None
    cfg = _config(args, signal)
    path = run_sweep(cfg, args.out, cfg.workers)
    print(f"wrote {path} and {path.name}.json")
    return 0


def _single_alpha(cfg: ExperimentConfig, alpha: float | None) -> float:
    if alpha is not None:
        return alpha
    if len(cfg.alphas) != 1:
        raise ConfigError("nbar", "this subcommand needs a single signal value; pass --alpha or --nbar")
    return cfg.alphas[0]


def _cmd_dump_povm(args) -> int:
    signal, alpha = _signal(args)
    cfg = _config(args, signal)
    alpha = _single_alpha(cfg, alpha)
    code = cfg.code()
    povm = build_sc_povm(code, alpha)
    text = povm_to_json(povm, sc_projectors(code, alpha), n_bins=code.n_bins, alpha=alpha,
                        frozen=sorted(code.frozen_positions))
    _emit(text, args.out)
    return 0


def _cmd_dump_transition(args) -> int:
    signal, alpha = _signal(args)
    cfg = _config(args, signal)
    alpha = _single_alpha(cfg, alpha)
    p = float(cfg.error_p[0])
    tm = channel_for(cfg, p, alpha)
    _emit(transition_to_json(tm, n_bins=cfg.n_bins, alpha=alpha, error_model=cfg.error_model, error_p=p), args.out)
    return 0


def _cmd_optimize_point(args) -> int:
    signal, alpha = _signal(args)
    cfg = _config(args, signal if not args.optimize_alpha else None)
    p = float(cfg.error_p[0])
    if cfg.optimize_alpha:
        point = evaluate_point(cfg, p, None)
    else:
        nbar = float(cfg.nbar[0]) if cfg.nbar is not None and len(cfg.nbar) == 1 else None
        point = evaluate_point(cfg, p, _single_alpha(cfg, alpha), nbar)
    doc = {
        "nbar": point.nbar,
        "alpha": point.alpha,
        "I_bits": point.mutual_information_bits,
        "pie": point.pie,
        "n_bins": point.n_bins,
        "optimal_input": point.optimal_input.as_dict(),
        "error_config": point.error_config,
    }
    _emit(json.dumps(doc, indent=2), args.out)
    return 0


def selftest(quick: bool = False, stream=None) -> bool:
    """Run the reference-matrix and circuit/POVM checks, print one line each."""
    from .golden import POVM_N4, PROJECTORS_N4
    from .polar import default_code
    from .qsim.circuits import noisy_pipeline_channel
    from .scdecoder import effective_channel

    stream = stream or sys.stdout
    results = []

    def record(name, ok, detail):
        results.append(ok)
        print(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})", file=stream)

    code4 = default_code(4)
    worst = 0.0
    for a in (0.05, 0.1, 0.25):
        proj = sc_projectors(code4, a)
        povm = build_sc_povm(code4, a)
        worst = max(worst, max(np.abs(proj[k] - v).max() for k, v in PROJECTORS_N4.items()))
        worst = max(worst, max(np.abs(povm[k] - v).max() for k, v in POVM_N4.items()))
    record("reference projectors and POVM, N=4", worst < 1e-9, f"max deviation {worst:.2e}")

    for n in (4, 8):
        povm = build_sc_povm(default_code(n), 0.1)
        comp, neg = povm.completeness_error(), povm.min_eigenvalue()
        record(f"POVM completeness and positivity, N={n}", comp < 1e-9 and neg > -1e-9,
               f"completeness {comp:.1e}, min eigenvalue {neg:.1e}")

    for n in ((4,) if quick else (4, 8)):
        code = default_code(n)
        tm = noisy_pipeline_channel(code, 0.1, multiphoton_policy="ignore")
        ref = effective_channel(code, 0.1, multiphoton_policy="ignore")
        dev = float(np.abs(tm.restrict_outcomes(ref.outcomes).probabilities - ref.probabilities).max())
        record(f"noiseless circuit reproduces POVM, N={n}", dev < 1e-9, f"max deviation {dev:.2e}")
    return all(results)


def _cmd_selftest(args) -> int:
    return 0 if selftest(args.quick) else 1


HANDLERS = {
    "sweep": _cmd_sweep,
    "dump-povm": _cmd_dump_povm,
    "dump-transition": _cmd_dump_transition,
    "optimize-point": _cmd_optimize_point,
    "selftest": _cmd_selftest,
}


def main(argv: Sequence[str] | None = None) -> int:
    argv = _normalize_argv(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return HANDLERS[args.subcommand](args)
    except ConfigError as exc:
        print(f"cqpolar: invalid config field '{exc.field}': {exc}", file=sys.stderr)
        return 2
    except TypeError as exc:
        print(f"cqpolar: invalid config: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
